#pragma once

#include "gridflow/core/types.hpp"
#include "gridflow/flow/tensor.hpp"

namespace gridflow::flow {

// Identity codec: RGB8 <-> [-1, 1] pixel tensors. Encode maps p to
// p/127.5 - 1; decode clamps to [-1, 1] and quantizes back, so
// decode(encode(image)) == image exactly.
Tensor encode_image(const core::RasterImage& image);
core::RasterImage decode_latent(const Tensor& latent);

Condition encode_condition(const core::RasterImage& image);
Condition null_condition(int channels, int height, int width);

}  // namespace gridflow::flow
