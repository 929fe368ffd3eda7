#include "gridflow/parse/parse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gridflow/render/glyphs.hpp"

namespace gridflow::parse {

using core::Cell;
using core::RasterImage;
using core::Rgb;
using core::TaskInstance;
using core::TaskKind;

namespace {

constexpr int kInkDistance2 = kInkDistance * kInkDistance;

bool near_color(Rgb pixel, Rgb target) {
  return core::color_dist2(pixel, target) <= kInkDistance2;
}

ParseResult fail(ParseErrorCode code, std::string detail) {
  ParseResult result;
  result.error = code;
  result.detail = std::move(detail);
  return result;
}

bool dims_match(const RasterImage& image, const TaskInstance& instance,
                const render::RenderSpec& spec) {
  const auto [w, h] = render::image_size(instance, spec);
  return image.width == w && image.height == h;
}

// Fraction-of-central-region ink test for one grid cell.
bool cell_inked(const RasterImage& image, Cell cell, const render::RenderSpec& spec) {
  const int quarter = spec.cell_px / 4;
  const int x0 = cell.c * spec.cell_px + quarter;
  const int y0 = cell.r * spec.cell_px + quarter;
  const int side = spec.cell_px / 2;
  int inked = 0;
  for (int y = y0; y < y0 + side; ++y) {
    for (int x = x0; x < x0 + side; ++x) {
      if (is_solution_ink(image.get(x, y))) ++inked;
    }
  }
  return inked >= static_cast<int>(kCellInkCoverage * side * side);
}

struct PathGraph {
  int size = 0;
  std::vector<uint8_t> node;                 // cell is inked or start/goal
  std::vector<std::array<int, 4>> neighbor;  // node indices, -1 terminated
  std::vector<int> degree;
};

// Movement edges come from the instance: open passages for mazes, plain grid
// adjacency for VSP (ink across a hole parses fine and fails verification).
template <typename Connected>
PathGraph build_path_graph(const RasterImage& image, int size, Cell start, Cell goal,
                           Connected connected, const render::RenderSpec& spec) {
  PathGraph g;
  g.size = size;
  g.node.assign(static_cast<size_t>(size) * size, 0);
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      if (cell_inked(image, {r, c}, spec)) g.node[static_cast<size_t>(r * size + c)] = 1;
    }
  }
  g.node[static_cast<size_t>(start.r * size + start.c)] = 1;
  g.node[static_cast<size_t>(goal.r * size + goal.c)] = 1;
  g.neighbor.assign(g.node.size(), {-1, -1, -1, -1});
  g.degree.assign(g.node.size(), 0);
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      const int i = r * size + c;
      if (!g.node[static_cast<size_t>(i)]) continue;
      int count = 0;
      const Cell here{r, c};
      for (const core::Move m :
           {core::Move::Up, core::Move::Down, core::Move::Left, core::Move::Right}) {
        const Cell next = core::step(here, m);
        if (next.r < 0 || next.r >= size || next.c < 0 || next.c >= size) continue;
        if (!connected(here, next)) continue;
        const int j = next.r * size + next.c;
        if (!g.node[static_cast<size_t>(j)]) continue;
        g.neighbor[static_cast<size_t>(i)][static_cast<size_t>(count++)] = j;
      }
      g.degree[static_cast<size_t>(i)] = count;
    }
  }
  return g;
}

ParseResult walk_path_graph(const PathGraph& g, Cell start, Cell goal) {
  const int size = g.size;
  const int start_i = start.r * size + start.c;
  const int goal_i = goal.r * size + goal.c;
  int node_count = 0;
  for (size_t i = 0; i < g.node.size(); ++i) {
    if (!g.node[i]) continue;
    ++node_count;
    if (g.degree[i] >= 3) {
      return fail(ParseErrorCode::AmbiguousPath,
                  "cell (" + std::to_string(static_cast<int>(i) / size) + "," +
                      std::to_string(static_cast<int>(i) % size) + ") has " +
                      std::to_string(g.degree[i]) + " inked neighbors");
    }
  }
  if (start_i == goal_i) {
    if (node_count > 1) return fail(ParseErrorCode::AmbiguousPath, "stray ink around trivial path");
    core::ActionSequence empty;
    ParseResult result;
    result.solution = core::SymbolicSolution{std::move(empty)};
    return result;
  }
  // A simple path needs exactly one way out of each endpoint.
  if (g.degree[static_cast<size_t>(start_i)] == 0) {
    return fail(ParseErrorCode::NoPath, "no ink adjacent to the start cell");
  }
  if (g.degree[static_cast<size_t>(start_i)] > 1) {
    return fail(ParseErrorCode::AmbiguousPath, "multiple routes leave the start cell");
  }
  std::vector<int> order{start_i};
  int prev = -1;
  int cur = start_i;
  while (cur != goal_i) {
    int next = -1;
    for (const int nb : g.neighbor[static_cast<size_t>(cur)]) {
      if (nb < 0 || nb == prev) continue;
      next = nb;
      break;
    }
    if (next < 0) return fail(ParseErrorCode::NoPath, "ink trail ends before the goal");
    order.push_back(next);
    prev = cur;
    cur = next;
    if (order.size() > g.node.size()) {
      return fail(ParseErrorCode::AmbiguousPath, "ink trail loops");
    }
  }
  if (static_cast<int>(order.size()) != node_count) {
    return fail(ParseErrorCode::AmbiguousPath, "disjoint ink outside the start-goal route");
  }
  core::ActionSequence moves;
  for (size_t k = 1; k < order.size(); ++k) {
    const Cell a{order[k - 1] / size, order[k - 1] % size};
    const Cell b{order[k] / size, order[k] % size};
    if (b.r == a.r - 1) {
      moves.moves.push_back(core::Move::Up);
    } else if (b.r == a.r + 1) {
      moves.moves.push_back(core::Move::Down);
    } else if (b.c == a.c - 1) {
      moves.moves.push_back(core::Move::Left);
    } else {
      moves.moves.push_back(core::Move::Right);
    }
  }
  ParseResult result;
  result.solution = core::SymbolicSolution{std::move(moves)};
  return result;
}

// --- Sudoku helpers --------------------------------------------------------

bool sudoku_ink(Rgb pixel) {
  return near_color(pixel, render::palette::kClueInk) ||
         near_color(pixel, render::palette::kSolutionInk);
}

// Binarize a cell interior, crop to the ink bounding box, resample to 5x7.
// Returns false when the cell holds no ink at all.
bool normalize_cell(const RasterImage& image, int r, int c, const render::RenderSpec& spec,
                    render::GlyphBitmap& out) {
  const int px = spec.cell_px;
  const int x0 = c * px + 1, x1 = (c + 1) * px - 1;
  const int y0 = r * px + 1, y1 = (r + 1) * px - 1;
  int bx0 = x1, bx1 = x0 - 1, by0 = y1, by1 = y0 - 1;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      if (!sudoku_ink(image.get(x, y))) continue;
      bx0 = std::min(bx0, x);
      bx1 = std::max(bx1, x);
      by0 = std::min(by0, y);
      by1 = std::max(by1, y);
    }
  }
  if (bx1 < bx0) return false;
  const int bw = bx1 - bx0 + 1;
  const int bh = by1 - by0 + 1;
  for (int gy = 0; gy < render::kGlyphHeight; ++gy) {
    const int sy0 = by0 + gy * bh / render::kGlyphHeight;
    const int sy1 = by0 + (gy + 1) * bh / render::kGlyphHeight;
    for (int gx = 0; gx < render::kGlyphWidth; ++gx) {
      const int sx0 = bx0 + gx * bw / render::kGlyphWidth;
      const int sx1 = bx0 + (gx + 1) * bw / render::kGlyphWidth;
      int inked = 0, total = 0;
      for (int y = sy0; y < std::max(sy1, sy0 + 1); ++y) {
        for (int x = sx0; x < std::max(sx1, sx0 + 1); ++x) {
          ++total;
          if (sudoku_ink(image.get(x, y))) ++inked;
        }
      }
      out[static_cast<size_t>(gy)][static_cast<size_t>(gx)] = 2 * inked >= total ? 1 : 0;
    }
  }
  return true;
}

// --- Jigsaw helpers --------------------------------------------------------

// Exact minimum-cost perfect assignment (Hungarian algorithm with potentials).
// Returns row -> column.
std::vector<int> min_cost_assignment(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<size_t>(n) + 1, 0.0), v(static_cast<size_t>(n) + 1, 0.0);
  std::vector<int> match(static_cast<size_t>(n) + 1, 0);  // column -> row (1-based)
  std::vector<int> way(static_cast<size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<size_t>(n) + 1, inf);
    std::vector<uint8_t> used(static_cast<size_t>(n) + 1, 0);
    do {
      used[static_cast<size_t>(j0)] = 1;
      const int i0 = match[static_cast<size_t>(j0)];
      double delta = inf;
      int j1 = -1;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<size_t>(j)]) continue;
        const double cur = cost[static_cast<size_t>(i0 - 1)][static_cast<size_t>(j - 1)] -
                           u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
        if (cur < minv[static_cast<size_t>(j)]) {
          minv[static_cast<size_t>(j)] = cur;
          way[static_cast<size_t>(j)] = j0;
        }
        if (minv[static_cast<size_t>(j)] < delta) {
          delta = minv[static_cast<size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<size_t>(j)]) {
          u[static_cast<size_t>(match[static_cast<size_t>(j)])] += delta;
          v[static_cast<size_t>(j)] -= delta;
        } else {
          minv[static_cast<size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<size_t>(j0)];
      match[static_cast<size_t>(j0)] = match[static_cast<size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(static_cast<size_t>(n), -1);
  for (int j = 1; j <= n; ++j) {
    if (match[static_cast<size_t>(j)] != 0) {
      row_to_col[static_cast<size_t>(match[static_cast<size_t>(j)] - 1)] = j - 1;
    }
  }
  return row_to_col;
}

double patch_mse(const RasterImage& a, int ax0, int ay0, const RasterImage& b, int bx0, int by0,
                 const render::RenderSpec& spec) {
  double sum = 0.0;
  int count = 0;
  for (int y = 0; y < spec.patch_px; ++y) {
    for (int x = 0; x < spec.patch_px; ++x) {
      if (x < spec.label_box_px && y < spec.label_box_px) continue;  // label box excluded
      const Rgb pa = a.get(ax0 + x, ay0 + y);
      const Rgb pb = b.get(bx0 + x, by0 + y);
      sum += core::color_dist2(pa, pb);
      count += 3;
    }
  }
  return sum / count;
}

}  // namespace

std::string_view to_string(ParseErrorCode code) {
  switch (code) {
    case ParseErrorCode::NoPath: return "NoPath";
    case ParseErrorCode::AmbiguousPath: return "AmbiguousPath";
    case ParseErrorCode::OffGrid: return "OffGrid";
    case ParseErrorCode::NotACycle: return "NotACycle";
    case ParseErrorCode::DegreeViolation: return "DegreeViolation";
    case ParseErrorCode::GivenMismatch: return "GivenMismatch";
    case ParseErrorCode::IllegibleCell: return "IllegibleCell";
  }
  return "Unknown";
}

bool is_solution_ink(Rgb color) {
  return near_color(color, render::palette::kSolutionInk);
}

ParseResult parse_path(const RasterImage& image, const TaskInstance& instance,
                       const render::RenderSpec& spec) {
  if (!dims_match(image, instance, spec)) {
    return fail(ParseErrorCode::OffGrid, "image dimensions do not match the instance");
  }
  if (instance.kind == TaskKind::VspFrozenLake) {
    const auto& grid = instance.vsp();
    const auto g = build_path_graph(
        image, grid.size, grid.start, grid.goal, [](Cell, Cell) { return true; }, spec);
    return walk_path_graph(g, grid.start, grid.goal);
  }
  if (instance.kind == TaskKind::Maze) {
    const auto& maze = instance.maze();
    const auto connected = [&maze](Cell a, Cell b) {
      if (b.r == a.r + 1) return maze.can_go_down(a.r, a.c);
      if (b.r == a.r - 1) return maze.can_go_down(b.r, b.c);
      if (b.c == a.c + 1) return maze.can_go_right(a.r, a.c);
      return maze.can_go_right(b.r, b.c);
    };
    const auto g = build_path_graph(image, maze.size, maze.start, maze.goal, connected, spec);
    return walk_path_graph(g, maze.start, maze.goal);
  }
  return fail(ParseErrorCode::OffGrid, "parse_path expects a VSP or Maze instance");
}

ParseResult parse_tour(const RasterImage& image, const TaskInstance& instance,
                       const render::RenderSpec& spec) {
  if (instance.kind != TaskKind::Tsp) {
    return fail(ParseErrorCode::OffGrid, "parse_tour expects a TSP instance");
  }
  if (!dims_match(image, instance, spec)) {
    return fail(ParseErrorCode::OffGrid, "image dimensions do not match the instance");
  }
  const auto& tsp = instance.tsp();
  const int n = static_cast<int>(tsp.cities.size());
  std::vector<std::pair<int, int>> centers;
  centers.reserve(static_cast<size_t>(n));
  for (const auto& city : tsp.cities) centers.push_back(render::tsp_point_px(city, spec));

  std::vector<std::vector<int>> adjacency(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double ax = centers[static_cast<size_t>(i)].first;
      const double ay = centers[static_cast<size_t>(i)].second;
      const double bx = centers[static_cast<size_t>(j)].first;
      const double by = centers[static_cast<size_t>(j)].second;
      const double len = std::hypot(bx - ax, by - ay);
      if (len <= 2.0 * kEdgeEndClearance + 2.0) continue;  // too short to attest
      int inked = 0;
      for (int k = 0; k < kEdgeSamples; ++k) {
        const double along =
            kEdgeEndClearance + (len - 2.0 * kEdgeEndClearance) * (2 * k + 1) / (2.0 * kEdgeSamples);
        const double t = along / len;
        const int x = static_cast<int>(std::llround(ax + t * (bx - ax)));
        const int y = static_cast<int>(std::llround(ay + t * (by - ay)));
        if (image.in_bounds(x, y) && is_solution_ink(image.get(x, y))) ++inked;
      }
      if (inked >= kEdgeSamplesRequired) {
        adjacency[static_cast<size_t>(i)].push_back(j);
        adjacency[static_cast<size_t>(j)].push_back(i);
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    if (adjacency[static_cast<size_t>(i)].size() != 2) {
      return fail(ParseErrorCode::DegreeViolation,
                  "city " + std::to_string(i) + " has degree " +
                      std::to_string(adjacency[static_cast<size_t>(i)].size()));
    }
  }
  core::Tour tour;
  const int start = tsp.start;
  const auto& first_pair = adjacency[static_cast<size_t>(start)];
  int next = std::min(first_pair[0], first_pair[1]);
  int prev = start;
  tour.order.push_back(start);
  while (next != start) {
    tour.order.push_back(next);
    const auto& pair = adjacency[static_cast<size_t>(next)];
    const int following = pair[0] == prev ? pair[1] : pair[0];
    prev = next;
    next = following;
    if (static_cast<int>(tour.order.size()) > n) break;
  }
  if (static_cast<int>(tour.order.size()) != n) {
    return fail(ParseErrorCode::NotACycle, "present edges split into multiple cycles");
  }
  ParseResult result;
  result.solution = core::SymbolicSolution{std::move(tour)};
  return result;
}

ParseResult parse_sudoku(const RasterImage& image, const TaskInstance& instance,
                         const render::RenderSpec& spec) {
  if (instance.kind != TaskKind::Sudoku) {
    return fail(ParseErrorCode::OffGrid, "parse_sudoku expects a Sudoku instance");
  }
  if (!dims_match(image, instance, spec)) {
    return fail(ParseErrorCode::OffGrid, "image dimensions do not match the instance");
  }
  const auto& givens = instance.sudoku().givens;
  core::SudokuGrid grid;
  for (int i = 0; i < 81; ++i) {
    const int r = i / 9, c = i % 9;
    render::GlyphBitmap bitmap{};
    if (!normalize_cell(image, r, c, spec, bitmap)) {
      return fail(ParseErrorCode::IllegibleCell,
                  "cell " + std::to_string(i) + " holds no legible digit");
    }
    int best_digit = -1;
    int best_distance = std::numeric_limits<int>::max();
    for (int d = 1; d <= 9; ++d) {
      const int distance = render::glyph_hamming(bitmap, d);
      if (distance < best_distance) {
        best_distance = distance;
        best_digit = d;
      }
    }
    if (best_distance > kGlyphSlackBits) {
      return fail(ParseErrorCode::IllegibleCell,
                  "cell " + std::to_string(i) + " holds no legible digit");
    }
    if (givens[static_cast<size_t>(i)] != 0 &&
        best_digit != static_cast<int>(givens[static_cast<size_t>(i)])) {
      return fail(ParseErrorCode::GivenMismatch,
                  "cell " + std::to_string(i) + " contradicts its given clue");
    }
    grid.cells[static_cast<size_t>(i)] = static_cast<uint8_t>(best_digit);
  }
  ParseResult result;
  result.solution = core::SymbolicSolution{grid};
  return result;
}

ParseResult parse_jigsaw(const RasterImage& image, const TaskInstance& instance,
                         const render::RenderSpec& spec) {
  if (instance.kind != TaskKind::Jigsaw) {
    return fail(ParseErrorCode::OffGrid, "parse_jigsaw expects a Jigsaw instance");
  }
  if (!dims_match(image, instance, spec)) {
    return fail(ParseErrorCode::OffGrid, "image dimensions do not match the instance");
  }
  const auto& jig = instance.jigsaw();
  const int n = jig.patch_count();
  const RasterImage reference = render_instance(instance, spec);
  const int p = spec.patch_px;
  std::vector<std::vector<double>> cost(static_cast<size_t>(n),
                                        std::vector<double>(static_cast<size_t>(n), 0.0));
  for (int slot = 0; slot < n; ++slot) {
    const int sx = (slot % jig.cols) * p;
    const int sy = (slot / jig.cols) * p;
    for (int patch = 0; patch < n; ++patch) {
      const int rx = (patch % jig.cols) * p;
      const int ry = (patch / jig.cols) * p;
      cost[static_cast<size_t>(slot)][static_cast<size_t>(patch)] =
          patch_mse(image, sx, sy, reference, rx, ry, spec);
    }
  }
  const std::vector<int> assignment = min_cost_assignment(cost);
  double total = 0.0;
  for (int slot = 0; slot < n; ++slot) {
    total += cost[static_cast<size_t>(slot)][static_cast<size_t>(assignment[static_cast<size_t>(slot)])];
  }
  ParseResult result;
  core::Permutation perm;
  perm.slot_to_patch = assignment;
  result.solution = core::SymbolicSolution{std::move(perm)};
  result.low_confidence = total / n > kJigsawConfidenceMse;
  if (result.low_confidence) result.detail = "assignment cost above confidence threshold";
  return result;
}

ParseResult parse(const RasterImage& image, const TaskInstance& instance,
                  const render::RenderSpec& spec) {
  switch (instance.kind) {
    case TaskKind::VspFrozenLake:
    case TaskKind::Maze:
      return parse_path(image, instance, spec);
    case TaskKind::Tsp:
      return parse_tour(image, instance, spec);
    case TaskKind::Sudoku:
      return parse_sudoku(image, instance, spec);
    case TaskKind::Jigsaw:
      return parse_jigsaw(image, instance, spec);
  }
  return fail(ParseErrorCode::OffGrid, "unknown task kind");
}

}  // namespace gridflow::parse
