#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace gridflow::core {

// Counter-based splittable RNG. A stream is identified by (seed, label); the
// same pair always reproduces the same draws, on every platform, so dataset
// generation and training are replayable without shared state.
class SplitRng {
 public:
  SplitRng(uint64_t seed, std::string_view label);

  // Derive an independent child stream from this stream's key.
  SplitRng split(std::string_view label) const;

  uint64_t next_u64();
  uint32_t next_u32() { return static_cast<uint32_t>(next_u64() >> 32); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform();

  // Uniform integer in [0, n), n >= 1. Rejection sampling, no modulo bias.
  uint64_t uniform_int(uint64_t n);

  // Standard normal via Marsaglia polar (no libm trig, reproducible).
  double normal();
  float normal_float() { return static_cast<float>(normal()); }

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(uniform_int(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  uint64_t key() const { return key_; }

  static uint64_t mix(uint64_t z);
  static uint64_t hash_label(uint64_t key, std::string_view label);

 private:
  SplitRng(uint64_t key) : key_(key) {}

  uint64_t key_ = 0;
  uint64_t counter_ = 0;
  bool have_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace gridflow::core
