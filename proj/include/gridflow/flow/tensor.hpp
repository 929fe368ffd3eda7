#pragma once

#include <cstddef>
#include <vector>

#include "gridflow/core/types.hpp"

namespace gridflow::flow {

// Dense CHW float tensor; the latent space is normalized pixel space.
struct Tensor {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;

  static Tensor zeros(int channels, int height, int width) {
    Tensor t;
    t.channels = channels;
    t.height = height;
    t.width = width;
    t.data.assign(static_cast<size_t>(channels) * height * width, 0.0f);
    return t;
  }

  size_t size() const { return data.size(); }
  bool same_shape(const Tensor& other) const {
    return channels == other.channels && height == other.height && width == other.width;
  }

  float& at(int c, int y, int x) {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }
  float at(int c, int y, int x) const {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }

  bool operator==(const Tensor&) const = default;
};

// Conditioning input: the normalized problem image, or the all-zeros null
// used for classifier-free training and guidance.
struct Condition {
  Tensor tensor;
  bool is_null = false;
};

bool all_finite(const Tensor& t);

}  // namespace gridflow::flow
