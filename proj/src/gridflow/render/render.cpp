#include "gridflow/render/render.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gridflow/core/rng.hpp"
#include "gridflow/oracle/oracle.hpp"
#include "gridflow/render/glyphs.hpp"

namespace gridflow::render {

using core::ActionSequence;
using core::Cell;
using core::Permutation;
using core::RasterImage;
using core::RenderRefusedError;
using core::Rgb;
using core::SudokuGrid;
using core::TaskInstance;
using core::TaskKind;
using core::Tour;

namespace {

void fill_rect(RasterImage& img, int x0, int y0, int x1, int y1, Rgb color) {
  x0 = std::max(x0, 0);
  y0 = std::max(y0, 0);
  x1 = std::min(x1, img.width);
  y1 = std::min(y1, img.height);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) img.set(x, y, color);
  }
}

void draw_frame(RasterImage& img, Rgb color) {
  fill_rect(img, 0, 0, img.width, 1, color);
  fill_rect(img, 0, img.height - 1, img.width, img.height, color);
  fill_rect(img, 0, 0, 1, img.height, color);
  fill_rect(img, img.width - 1, 0, img.width, img.height, color);
}

void draw_disk(RasterImage& img, int cx, int cy, int radius, Rgb color) {
  for (int y = cy - radius; y <= cy + radius; ++y) {
    for (int x = cx - radius; x <= cx + radius; ++x) {
      if (!img.in_bounds(x, y)) continue;
      const int dx = x - cx;
      const int dy = y - cy;
      if (dx * dx + dy * dy <= radius * radius) img.set(x, y, color);
    }
  }
}

double point_segment_distance(double px, double py, double ax, double ay, double bx, double by) {
  const double dx = bx - ax;
  const double dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  double t = len2 == 0.0 ? 0.0 : ((px - ax) * dx + (py - ay) * dy) / len2;
  t = std::clamp(t, 0.0, 1.0);
  const double qx = ax + t * dx;
  const double qy = ay + t * dy;
  return std::hypot(px - qx, py - qy);
}

// Stroke: every pixel whose lattice point lies within hw + 0.5 of the segment.
void draw_segment(RasterImage& img, int ax, int ay, int bx, int by, int hw, Rgb color) {
  const int x0 = std::min(ax, bx) - hw - 1;
  const int x1 = std::max(ax, bx) + hw + 1;
  const int y0 = std::min(ay, by) - hw - 1;
  const int y1 = std::max(ay, by) + hw + 1;
  const double limit = hw + 0.5;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (!img.in_bounds(x, y)) continue;
      if (point_segment_distance(x, y, ax, ay, bx, by) <= limit) img.set(x, y, color);
    }
  }
}

void draw_cell_lattice(RasterImage& img, int size, const RenderSpec& spec) {
  for (int k = 1; k < size; ++k) {
    fill_rect(img, k * spec.cell_px, 0, k * spec.cell_px + 1, img.height, palette::kGridLine);
    fill_rect(img, 0, k * spec.cell_px, img.width, k * spec.cell_px + 1, palette::kGridLine);
  }
}

// --- VSP -------------------------------------------------------------------

RasterImage vsp_base(const core::VspPayload& grid, const RenderSpec& spec) {
  const int side = grid.size * spec.cell_px;
  RasterImage img = RasterImage::filled(side, side, palette::kBackground);
  draw_cell_lattice(img, grid.size, spec);
  for (int r = 0; r < grid.size; ++r) {
    for (int c = 0; c < grid.size; ++c) {
      if (grid.hole(r, c)) {
        fill_rect(img, c * spec.cell_px, r * spec.cell_px, (c + 1) * spec.cell_px,
                  (r + 1) * spec.cell_px, palette::kBlocked);
      }
    }
  }
  draw_frame(img, palette::kGridLine);
  return img;
}

void draw_grid_markers(RasterImage& img, Cell start, Cell goal, const RenderSpec& spec) {
  const auto [sx, sy] = cell_center(start, spec);
  const auto [gx, gy] = cell_center(goal, spec);
  draw_disk(img, sx, sy, spec.marker_radius_px, palette::kStart);
  draw_disk(img, gx, gy, spec.marker_radius_px, palette::kGoal);
}

void draw_cell_path(RasterImage& img, Cell start, const ActionSequence& moves,
                    const RenderSpec& spec) {
  Cell cur = start;
  for (const core::Move m : moves.moves) {
    const Cell nxt = core::step(cur, m);
    const auto [ax, ay] = cell_center(cur, spec);
    const auto [bx, by] = cell_center(nxt, spec);
    draw_segment(img, ax, ay, bx, by, spec.path_halfwidth_px, palette::kSolutionInk);
    cur = nxt;
  }
}

// --- Maze ------------------------------------------------------------------

RasterImage maze_base(const core::MazePayload& maze, const RenderSpec& spec) {
  const int side = maze.size * spec.cell_px;
  RasterImage img = RasterImage::filled(side, side, palette::kBackground);
  const int w = spec.wall_px;
  for (int r = 0; r < maze.size; ++r) {
    for (int c = 0; c < maze.size; ++c) {
      if (c + 1 < maze.size && !maze.can_go_right(r, c)) {
        const int x = (c + 1) * spec.cell_px;
        fill_rect(img, x - w / 2, r * spec.cell_px - 1, x + (w + 1) / 2,
                  (r + 1) * spec.cell_px + 1, palette::kBlocked);
      }
      if (r + 1 < maze.size && !maze.can_go_down(r, c)) {
        const int y = (r + 1) * spec.cell_px;
        fill_rect(img, c * spec.cell_px - 1, y - w / 2, (c + 1) * spec.cell_px + 1,
                  y + (w + 1) / 2, palette::kBlocked);
      }
    }
  }
  // Outer boundary doubles as the border frame.
  fill_rect(img, 0, 0, side, w, palette::kBlocked);
  fill_rect(img, 0, side - w, side, side, palette::kBlocked);
  fill_rect(img, 0, 0, w, side, palette::kBlocked);
  fill_rect(img, side - w, 0, side, side, palette::kBlocked);
  return img;
}

// --- TSP -------------------------------------------------------------------

RasterImage tsp_base(const RenderSpec& spec) {
  RasterImage img =
      RasterImage::filled(spec.tsp_canvas_px, spec.tsp_canvas_px, palette::kBackground);
  draw_frame(img, palette::kGridLine);
  return img;
}

void draw_cities(RasterImage& img, const core::TspPayload& tsp, const RenderSpec& spec) {
  for (size_t i = 0; i < tsp.cities.size(); ++i) {
    const auto [x, y] = tsp_point_px(tsp.cities[i], spec);
    const Rgb color = static_cast<int>(i) == tsp.start ? palette::kStart : palette::kGoal;
    draw_disk(img, x, y, spec.city_radius_px, color);
  }
}

// --- Sudoku ----------------------------------------------------------------

RasterImage sudoku_base(const core::SudokuPayload& sudoku, const RenderSpec& spec) {
  const int side = 9 * spec.cell_px;
  RasterImage img = RasterImage::filled(side, side, palette::kBackground);
  draw_cell_lattice(img, 9, spec);
  // Heavy box separators; the outer edge keeps the thin frame so glyph
  // bounding-box search (inset 1 px) never meets black lattice ink.
  for (const int k : {3, 6}) {
    const int x = k * spec.cell_px;
    fill_rect(img, x - 1, 0, x + 1, side, palette::kBlocked);
    fill_rect(img, 0, x - 1, side, x + 1, palette::kBlocked);
  }
  draw_frame(img, palette::kGridLine);
  for (int i = 0; i < 81; ++i) {
    const uint8_t d = sudoku.givens[static_cast<size_t>(i)];
    if (d == 0) continue;
    const int r = i / 9, c = i % 9;
    const int gx = c * spec.cell_px + (spec.cell_px - kGlyphWidth * spec.sudoku_glyph_scale) / 2;
    const int gy = r * spec.cell_px + (spec.cell_px - kGlyphHeight * spec.sudoku_glyph_scale) / 2;
    draw_digit(img, gx, gy, d, spec.sudoku_glyph_scale, palette::kClueInk);
  }
  return img;
}

// --- Jigsaw ----------------------------------------------------------------

void stamp_label(RasterImage& img, int x0, int y0, int slot_index, const RenderSpec& spec) {
  fill_rect(img, x0, y0, x0 + spec.label_box_px, y0 + spec.label_box_px, palette::kBackground);
  const int value = slot_index + 1;
  const int text_w = value >= 10 ? 2 * kGlyphWidth + 1 : kGlyphWidth;
  const int x = x0 + (spec.label_box_px - text_w) / 2;
  const int y = y0 + (spec.label_box_px - kGlyphHeight) / 2;
  draw_number(img, x, y, value, palette::kClueInk);
}

void blit(RasterImage& dst, int dx0, int dy0, const RasterImage& src, int sx0, int sy0, int w,
          int h) {
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      dst.set(dx0 + x, dy0 + y, src.get(sx0 + x, sy0 + y));
    }
  }
}

// Input mosaic without the border frame: slot i shows source patch
// arrangement[i], stamped with slot label i+1 that travels with the patch.
RasterImage jigsaw_mosaic(const core::JigsawPayload& jig, const RenderSpec& spec) {
  const RasterImage texture = jigsaw_texture(jig, spec);
  RasterImage img = RasterImage::filled(jig.cols * spec.patch_px, jig.rows * spec.patch_px,
                                        palette::kBackground);
  const int p = spec.patch_px;
  for (int slot = 0; slot < jig.patch_count(); ++slot) {
    const int src = jig.arrangement[static_cast<size_t>(slot)];
    const int sx = (src % jig.cols) * p;
    const int sy = (src / jig.cols) * p;
    const int dx = (slot % jig.cols) * p;
    const int dy = (slot / jig.cols) * p;
    blit(img, dx, dy, texture, sx, sy, p, p);
    stamp_label(img, dx, dy, slot, spec);
  }
  return img;
}

bool is_permutation(const std::vector<int>& values, int n) {
  if (static_cast<int>(values.size()) != n) return false;
  std::vector<uint8_t> seen(static_cast<size_t>(n), 0);
  for (const int v : values) {
    if (v < 0 || v >= n || seen[static_cast<size_t>(v)]) return false;
    seen[static_cast<size_t>(v)] = 1;
  }
  return true;
}

}  // namespace

core::Json render_spec_to_json(const RenderSpec& spec) {
  return core::Json{{"cell_px", spec.cell_px},
                    {"marker_radius_px", spec.marker_radius_px},
                    {"path_halfwidth_px", spec.path_halfwidth_px},
                    {"wall_px", spec.wall_px},
                    {"tsp_canvas_px", spec.tsp_canvas_px},
                    {"tsp_margin_px", spec.tsp_margin_px},
                    {"city_radius_px", spec.city_radius_px},
                    {"tour_halfwidth_px", spec.tour_halfwidth_px},
                    {"sudoku_glyph_scale", spec.sudoku_glyph_scale},
                    {"patch_px", spec.patch_px},
                    {"label_box_px", spec.label_box_px}};
}

RenderSpec render_spec_from_json(const core::Json& j) {
  RenderSpec spec;
  const core::Json canonical = render_spec_to_json(spec);
  for (const auto& [key, value] : j.items()) {
    if (!canonical.contains(key)) throw core::Error("unknown render spec key: " + key);
    if (!value.is_number_integer()) throw core::Error("render spec values must be integers");
  }
  spec.cell_px = j.value("cell_px", spec.cell_px);
  spec.marker_radius_px = j.value("marker_radius_px", spec.marker_radius_px);
  spec.path_halfwidth_px = j.value("path_halfwidth_px", spec.path_halfwidth_px);
  spec.wall_px = j.value("wall_px", spec.wall_px);
  spec.tsp_canvas_px = j.value("tsp_canvas_px", spec.tsp_canvas_px);
  spec.tsp_margin_px = j.value("tsp_margin_px", spec.tsp_margin_px);
  spec.city_radius_px = j.value("city_radius_px", spec.city_radius_px);
  spec.tour_halfwidth_px = j.value("tour_halfwidth_px", spec.tour_halfwidth_px);
  spec.sudoku_glyph_scale = j.value("sudoku_glyph_scale", spec.sudoku_glyph_scale);
  spec.patch_px = j.value("patch_px", spec.patch_px);
  spec.label_box_px = j.value("label_box_px", spec.label_box_px);
  return spec;
}

std::pair<int, int> image_size(const TaskInstance& instance, const RenderSpec& spec) {
  switch (instance.kind) {
    case TaskKind::VspFrozenLake:
      return {instance.vsp().size * spec.cell_px, instance.vsp().size * spec.cell_px};
    case TaskKind::Maze:
      return {instance.maze().size * spec.cell_px, instance.maze().size * spec.cell_px};
    case TaskKind::Tsp:
      return {spec.tsp_canvas_px, spec.tsp_canvas_px};
    case TaskKind::Sudoku:
      return {9 * spec.cell_px, 9 * spec.cell_px};
    case TaskKind::Jigsaw:
      return {instance.jigsaw().cols * spec.patch_px, instance.jigsaw().rows * spec.patch_px};
  }
  throw core::Error("image_size: unknown task kind");
}

std::pair<int, int> tsp_point_px(const core::Point2& point, const RenderSpec& spec) {
  const int span = spec.tsp_canvas_px - 2 * spec.tsp_margin_px - 1;
  return {spec.tsp_margin_px + static_cast<int>(std::llround(point.x * span)),
          spec.tsp_margin_px + static_cast<int>(std::llround(point.y * span))};
}

core::RasterImage jigsaw_texture(const core::JigsawPayload& jig, const RenderSpec& spec) {
  const int width = jig.cols * spec.patch_px;
  const int height = jig.rows * spec.patch_px;
  RasterImage img = RasterImage::filled(width, height, palette::kBackground);

  // Smooth multi-sinusoid field, wavelengths on the order of a patch side, so
  // any two patch crops are far apart in mean squared distance.
  core::SplitRng rng(jig.texture_seed, "texture");
  struct Wave {
    double fx, fy, phase, amp;
  };
  std::array<std::vector<Wave>, 3> waves;
  for (auto& channel : waves) {
    for (int i = 0; i < 3; ++i) {
      const double wavelength = 20.0 + rng.uniform() * 70.0;
      const double angle = rng.uniform() * 2.0 * M_PI;
      channel.push_back({std::cos(angle) / wavelength, std::sin(angle) / wavelength,
                         rng.uniform() * 2.0 * M_PI, 18.0 + rng.uniform() * 22.0});
    }
  }
  // Small per-source-patch tint keeps even near-periodic fields distinct.
  core::SplitRng tint_rng = rng.split("tint");
  std::vector<std::array<double, 3>> tints;
  for (int p = 0; p < jig.patch_count(); ++p) {
    tints.push_back({tint_rng.uniform() * 24.0 - 12.0, tint_rng.uniform() * 24.0 - 12.0,
                     tint_rng.uniform() * 24.0 - 12.0});
  }
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int patch = (y / spec.patch_px) * jig.cols + (x / spec.patch_px);
      Rgb color;
      uint8_t* out[3] = {&color.r, &color.g, &color.b};
      for (int ch = 0; ch < 3; ++ch) {
        double v = 140.0 + tints[static_cast<size_t>(patch)][static_cast<size_t>(ch)];
        for (const Wave& w : waves[static_cast<size_t>(ch)]) {
          v += w.amp * std::sin(2.0 * M_PI * (w.fx * x + w.fy * y) + w.phase);
        }
        *out[ch] = static_cast<uint8_t>(std::clamp(v, 40.0, 230.0));
      }
      img.set(x, y, color);
    }
  }
  return img;
}

core::RasterImage render_instance(const TaskInstance& instance, const RenderSpec& spec) {
  switch (instance.kind) {
    case TaskKind::VspFrozenLake: {
      RasterImage img = vsp_base(instance.vsp(), spec);
      draw_grid_markers(img, instance.vsp().start, instance.vsp().goal, spec);
      return img;
    }
    case TaskKind::Maze: {
      RasterImage img = maze_base(instance.maze(), spec);
      draw_grid_markers(img, instance.maze().start, instance.maze().goal, spec);
      return img;
    }
    case TaskKind::Tsp: {
      RasterImage img = tsp_base(spec);
      draw_cities(img, instance.tsp(), spec);
      return img;
    }
    case TaskKind::Sudoku:
      return sudoku_base(instance.sudoku(), spec);
    case TaskKind::Jigsaw: {
      RasterImage img = jigsaw_mosaic(instance.jigsaw(), spec);
      draw_frame(img, palette::kGridLine);
      return img;
    }
  }
  throw core::Error("render_instance: unknown task kind");
}

core::RasterImage render_solution(const TaskInstance& instance,
                                  const core::SymbolicSolution& solution, const RenderSpec& spec) {
  if (!core::solution_matches_kind(instance.kind, solution)) {
    throw RenderRefusedError("render_solution: solution kind does not match instance");
  }
  switch (instance.kind) {
    case TaskKind::VspFrozenLake: {
      const auto& moves = std::get<ActionSequence>(solution);
      if (!oracle::walk_path(instance.vsp(), moves)) {
        throw RenderRefusedError("render_solution: path is not a legal walk");
      }
      RasterImage img = vsp_base(instance.vsp(), spec);
      draw_cell_path(img, instance.vsp().start, moves, spec);
      draw_grid_markers(img, instance.vsp().start, instance.vsp().goal, spec);
      return img;
    }
    case TaskKind::Maze: {
      const auto& moves = std::get<ActionSequence>(solution);
      if (!oracle::walk_path(instance.maze(), moves)) {
        throw RenderRefusedError("render_solution: path is not a legal walk");
      }
      RasterImage img = maze_base(instance.maze(), spec);
      draw_cell_path(img, instance.maze().start, moves, spec);
      draw_grid_markers(img, instance.maze().start, instance.maze().goal, spec);
      return img;
    }
    case TaskKind::Tsp: {
      const auto& tour = std::get<Tour>(solution);
      const auto& tsp = instance.tsp();
      if (!is_permutation(tour.order, static_cast<int>(tsp.cities.size()))) {
        throw RenderRefusedError("render_solution: tour is not a permutation of the cities");
      }
      RasterImage img = tsp_base(spec);
      const size_t n = tour.order.size();
      for (size_t i = 0; i < n; ++i) {
        const auto [ax, ay] = tsp_point_px(tsp.cities[static_cast<size_t>(tour.order[i])], spec);
        const auto [bx, by] =
            tsp_point_px(tsp.cities[static_cast<size_t>(tour.order[(i + 1) % n])], spec);
        draw_segment(img, ax, ay, bx, by, spec.tour_halfwidth_px, palette::kSolutionInk);
      }
      draw_cities(img, tsp, spec);
      return img;
    }
    case TaskKind::Sudoku: {
      const auto& grid = std::get<SudokuGrid>(solution);
      const auto& givens = instance.sudoku().givens;
      for (int i = 0; i < 81; ++i) {
        const uint8_t d = grid.cells[static_cast<size_t>(i)];
        if (d < 1 || d > 9) {
          throw RenderRefusedError("render_solution: sudoku digit out of range");
        }
        if (givens[static_cast<size_t>(i)] != 0 && d != givens[static_cast<size_t>(i)]) {
          throw RenderRefusedError("render_solution: grid overwrites a given clue");
        }
      }
      RasterImage img = sudoku_base(instance.sudoku(), spec);
      for (int i = 0; i < 81; ++i) {
        if (givens[static_cast<size_t>(i)] != 0) continue;
        const int r = i / 9, c = i % 9;
        const int gx = c * spec.cell_px + (spec.cell_px - kGlyphWidth * spec.sudoku_glyph_scale) / 2;
        const int gy =
            r * spec.cell_px + (spec.cell_px - kGlyphHeight * spec.sudoku_glyph_scale) / 2;
        draw_digit(img, gx, gy, grid.cells[static_cast<size_t>(i)], spec.sudoku_glyph_scale,
                   palette::kSolutionInk);
      }
      return img;
    }
    case TaskKind::Jigsaw: {
      const auto& perm = std::get<Permutation>(solution);
      const auto& jig = instance.jigsaw();
      if (!is_permutation(perm.slot_to_patch, jig.patch_count())) {
        throw RenderRefusedError("render_solution: placement is not a permutation of the patches");
      }
      const RasterImage mosaic = jigsaw_mosaic(jig, spec);
      RasterImage img = RasterImage::filled(mosaic.width, mosaic.height, palette::kBackground);
      const int p = spec.patch_px;
      for (int slot = 0; slot < jig.patch_count(); ++slot) {
        const int src_slot = perm.slot_to_patch[static_cast<size_t>(slot)];
        blit(img, (slot % jig.cols) * p, (slot / jig.cols) * p, mosaic, (src_slot % jig.cols) * p,
             (src_slot / jig.cols) * p, p, p);
      }
      draw_frame(img, palette::kGridLine);
      return img;
    }
  }
  throw core::Error("render_solution: unknown task kind");
}

}  // namespace gridflow::render
