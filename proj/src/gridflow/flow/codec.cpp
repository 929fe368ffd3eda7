#include "gridflow/flow/codec.hpp"

#include <algorithm>
#include <cmath>

namespace gridflow::flow {

Tensor encode_image(const core::RasterImage& image) {
  Tensor t = Tensor::zeros(3, image.height, image.width);
  const size_t plane = static_cast<size_t>(image.height) * image.width;
  for (size_t i = 0; i < plane; ++i) {
    for (size_t c = 0; c < 3; ++c) {
      t.data[c * plane + i] = static_cast<float>(image.pixels[i * 3 + c]) / 127.5f - 1.0f;
    }
  }
  return t;
}

core::RasterImage decode_latent(const Tensor& latent) {
  if (latent.channels != 3) throw core::Error("decode_latent: expected 3 channels");
  core::RasterImage image;
  image.width = latent.width;
  image.height = latent.height;
  const size_t plane = static_cast<size_t>(latent.height) * latent.width;
  image.pixels.resize(plane * 3);
  for (size_t i = 0; i < plane; ++i) {
    for (size_t c = 0; c < 3; ++c) {
      const float clamped = std::clamp(latent.data[c * plane + i], -1.0f, 1.0f);
      const float scaled = (clamped + 1.0f) * 127.5f;
      image.pixels[i * 3 + c] = static_cast<uint8_t>(std::lround(scaled));
    }
  }
  return image;
}

Condition encode_condition(const core::RasterImage& image) {
  Condition h;
  h.tensor = encode_image(image);
  h.is_null = false;
  return h;
}

Condition null_condition(int channels, int height, int width) {
  Condition h;
  h.tensor = Tensor::zeros(channels, height, width);
  h.is_null = true;
  return h;
}

}  // namespace gridflow::flow
