#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gridflow/core/types.hpp"

namespace gridflow::render {

// Lossless 8-bit RGB PNG round trip. Malformed input throws core::PngError.
std::vector<uint8_t> encode_png(const core::RasterImage& image);
core::RasterImage decode_png(const std::vector<uint8_t>& bytes);

void write_png(const std::filesystem::path& path, const core::RasterImage& image);
core::RasterImage read_png(const std::filesystem::path& path);

}  // namespace gridflow::render
