#include "gridflow/core/rng.hpp"

#include <cmath>

namespace gridflow::core {

namespace {
constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ull;
}

uint64_t SplitRng::mix(uint64_t z) {
  // SplitMix64 finalizer.
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

uint64_t SplitRng::hash_label(uint64_t key, std::string_view label) {
  // FNV-1a over the label bytes, folded into the parent key.
  uint64_t h = 0xCBF29CE484222325ull;
  for (const char ch : label) {
    h ^= static_cast<uint8_t>(ch);
    h *= 0x100000001B3ull;
  }
  return mix(mix(key) ^ h);
}

SplitRng::SplitRng(uint64_t seed, std::string_view label) : key_(hash_label(seed, label)) {}

SplitRng SplitRng::split(std::string_view label) const {
  return SplitRng(hash_label(key_, label));
}

uint64_t SplitRng::next_u64() {
  counter_ += kGolden;
  return mix(key_ ^ counter_);
}

double SplitRng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

uint64_t SplitRng::uniform_int(uint64_t n) {
  if (n <= 1) return 0;
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t draw;
  do {
    draw = next_u64();
  } while (draw >= limit);
  return draw % n;
}

double SplitRng::normal() {
  if (have_spare_normal_) {
    have_spare_normal_ = false;
    return spare_normal_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * scale;
  have_spare_normal_ = true;
  return u * scale;
}

}  // namespace gridflow::core
