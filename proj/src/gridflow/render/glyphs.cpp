#include "gridflow/render/glyphs.hpp"

#include <limits>

namespace gridflow::render {

namespace {

constexpr GlyphBitmap make(std::array<const char*, kGlyphHeight> rows) {
  GlyphBitmap bitmap{};
  for (int y = 0; y < kGlyphHeight; ++y) {
    for (int x = 0; x < kGlyphWidth; ++x) {
      bitmap[static_cast<size_t>(y)][static_cast<size_t>(x)] =
          rows[static_cast<size_t>(y)][x] == 'X' ? 1 : 0;
    }
  }
  return bitmap;
}

// Every digit touches all four edges of the 5x7 box (see header).
constexpr std::array<GlyphBitmap, 10> kGlyphs = {
    make({".XXX.",
          "X...X",
          "X...X",
          "X...X",
          "X...X",
          "X...X",
          ".XXX."}),
    make({"..X..",
          ".XX..",
          "X.X..",
          "..X..",
          "..X..",
          "..X..",
          "XXXXX"}),
    make({".XXX.",
          "X...X",
          "....X",
          "...X.",
          "..X..",
          ".X...",
          "XXXXX"}),
    make({"XXXXX",
          "....X",
          "...X.",
          "..XX.",
          "....X",
          "X...X",
          ".XXX."}),
    make({"...X.",
          "..XX.",
          ".X.X.",
          "X..X.",
          "XXXXX",
          "...X.",
          "...X."}),
    make({"XXXXX",
          "X....",
          "XXXX.",
          "....X",
          "....X",
          "X...X",
          ".XXX."}),
    make({"..XX.",
          ".X...",
          "X....",
          "XXXX.",
          "X...X",
          "X...X",
          ".XXX."}),
    make({"XXXXX",
          "....X",
          "...X.",
          "..X..",
          "..X..",
          ".X...",
          "X...."}),
    make({".XXX.",
          "X...X",
          "X...X",
          ".XXX.",
          "X...X",
          "X...X",
          ".XXX."}),
    make({".XXX.",
          "X...X",
          "X...X",
          ".XXXX",
          "....X",
          "...X.",
          ".XX.."}),
};

}  // namespace

const GlyphBitmap& glyph_bitmap(int digit) {
  if (digit < 0 || digit > 9) throw core::Error("glyph_bitmap: digit out of range");
  return kGlyphs[static_cast<size_t>(digit)];
}

int glyph_hamming(const GlyphBitmap& bitmap, int digit) {
  const GlyphBitmap& ref = glyph_bitmap(digit);
  int distance = 0;
  for (int y = 0; y < kGlyphHeight; ++y) {
    for (int x = 0; x < kGlyphWidth; ++x) {
      if (bitmap[static_cast<size_t>(y)][static_cast<size_t>(x)] !=
          ref[static_cast<size_t>(y)][static_cast<size_t>(x)]) {
        ++distance;
      }
    }
  }
  return distance;
}

GlyphMatch match_glyph(const GlyphBitmap& bitmap) {
  GlyphMatch best{-1, std::numeric_limits<int>::max()};
  for (int d = 0; d <= 9; ++d) {
    const int distance = glyph_hamming(bitmap, d);
    if (distance < best.distance) {
      best = {d, distance};
    }
  }
  return best;
}

void draw_digit(core::RasterImage& image, int x, int y, int digit, int scale, core::Rgb color) {
  const GlyphBitmap& bitmap = glyph_bitmap(digit);
  for (int gy = 0; gy < kGlyphHeight; ++gy) {
    for (int gx = 0; gx < kGlyphWidth; ++gx) {
      if (!bitmap[static_cast<size_t>(gy)][static_cast<size_t>(gx)]) continue;
      for (int dy = 0; dy < scale; ++dy) {
        for (int dx = 0; dx < scale; ++dx) {
          const int px = x + gx * scale + dx;
          const int py = y + gy * scale + dy;
          if (image.in_bounds(px, py)) image.set(px, py, color);
        }
      }
    }
  }
}

void draw_number(core::RasterImage& image, int x, int y, int value, core::Rgb color) {
  if (value < 1 || value > 99) throw core::Error("draw_number: value out of range");
  if (value >= 10) {
    draw_digit(image, x, y, value / 10, 1, color);
    draw_digit(image, x + kGlyphWidth + 1, y, value % 10, 1, color);
  } else {
    draw_digit(image, x, y, value, 1, color);
  }
}

}  // namespace gridflow::render
