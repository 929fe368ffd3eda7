#pragma once

#include <array>
#include <cstdint>

#include "gridflow/core/types.hpp"

namespace gridflow::render {

// 5x7 binary digit glyphs. Every glyph touches all four edges of its box, so
// the ink bounding box of a clean render is always the full 5x7 region and
// scale-normalization is exact.
inline constexpr int kGlyphWidth = 5;
inline constexpr int kGlyphHeight = 7;

using GlyphBitmap = std::array<std::array<uint8_t, kGlyphWidth>, kGlyphHeight>;

const GlyphBitmap& glyph_bitmap(int digit);

// Hamming distance between a normalized 5x7 bitmap and the template for digit.
int glyph_hamming(const GlyphBitmap& bitmap, int digit);

// Best-matching digit and its Hamming distance.
struct GlyphMatch {
  int digit = -1;
  int distance = 0;
};
GlyphMatch match_glyph(const GlyphBitmap& bitmap);

// Stamps a digit at (x, y) with integer scale; each set glyph cell becomes a
// scale x scale block of `color`.
void draw_digit(core::RasterImage& image, int x, int y, int digit, int scale, core::Rgb color);

// Stamps a 1- or 2-digit number (1..99); digits are scale 1, one pixel apart.
void draw_number(core::RasterImage& image, int x, int y, int value, core::Rgb color);

}  // namespace gridflow::render
