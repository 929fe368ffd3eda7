#include "gridflow/taskgen/taskgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_set>

#include "gridflow/core/parallel.hpp"
#include "gridflow/core/rng.hpp"
#include "gridflow/core/serialize.hpp"
#include "gridflow/oracle/oracle.hpp"
#include "gridflow/parse/parse.hpp"
#include "gridflow/render/png_io.hpp"
#include "gridflow/render/render.hpp"

namespace gridflow::taskgen {

namespace fs = std::filesystem;
using core::Cell;
using core::SplitRng;
using core::TaskInstance;
using core::TaskKind;

namespace {

constexpr int kMaxAttempts = 10000;
constexpr int kMaxSudokuRestarts = 1000;
constexpr double kMinCityDistance = 0.04;

std::string instance_id(TaskKind kind, const core::DifficultyLevel& level, uint64_t seed) {
  return std::string(core::to_string(kind)) + "-" + core::to_string(level) + "-" +
         std::to_string(seed);
}

TaskInstance make_instance(TaskKind kind, core::DifficultyLevel level, uint64_t seed,
                           core::TaskPayload payload) {
  TaskInstance inst;
  inst.id = instance_id(kind, level, seed);
  inst.kind = kind;
  inst.level = level;
  inst.seed = seed;
  inst.payload = std::move(payload);
  return inst;
}

int manhattan(Cell a, Cell b) { return std::abs(a.r - b.r) + std::abs(a.c - b.c); }

Cell random_cell(SplitRng& rng, int size) {
  return {static_cast<int>(rng.uniform_int(static_cast<uint64_t>(size))),
          static_cast<int>(rng.uniform_int(static_cast<uint64_t>(size)))};
}

// Randomized full-grid fill: row-major cells, candidate digits shuffled per
// cell, standard bitmask backtracking. Always succeeds.
struct GridFiller {
  std::array<uint16_t, 9> rows{}, cols{}, boxes{};
  std::array<uint8_t, 81> cells{};
  SplitRng* rng = nullptr;

  static int box_of(int r, int c) { return (r / 3) * 3 + c / 3; }

  bool fill(int idx) {
    if (idx == 81) return true;
    const int r = idx / 9;
    const int c = idx % 9;
    const uint16_t used = rows[r] | cols[c] | boxes[box_of(r, c)];
    std::array<uint8_t, 9> digits{1, 2, 3, 4, 5, 6, 7, 8, 9};
    for (size_t i = digits.size(); i > 1; --i) {
      std::swap(digits[i - 1], digits[rng->uniform_int(i)]);
    }
    for (const uint8_t d : digits) {
      const uint16_t bit = static_cast<uint16_t>(1u << (d - 1));
      if (used & bit) continue;
      rows[r] |= bit;
      cols[c] |= bit;
      boxes[box_of(r, c)] |= bit;
      cells[idx] = d;
      if (fill(idx + 1)) return true;
      rows[r] = static_cast<uint16_t>(rows[r] & ~bit);
      cols[c] = static_cast<uint16_t>(cols[c] & ~bit);
      boxes[box_of(r, c)] = static_cast<uint16_t>(boxes[box_of(r, c)] & ~bit);
      cells[idx] = 0;
    }
    return false;
  }
};

}  // namespace

GeneratedInstance gen_vsp(uint64_t seed, int grid_size) {
  if (grid_size < 2) {
    throw core::InvalidLevelError("vsp grid size must be >= 2, got " + std::to_string(grid_size));
  }
  SplitRng rng(seed, "gen/vsp");
  const int cells = grid_size * grid_size;
  const int n_holes = static_cast<int>(std::llround(0.2 * (cells - 2)));
  const int region = std::min(grid_size, std::max(2, grid_size / 4));
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    core::VspPayload p;
    p.size = grid_size;
    p.holes.assign(static_cast<size_t>(cells), 0);
    p.start = random_cell(rng, region);
    do {
      p.goal = random_cell(rng, grid_size);
    } while (p.goal == p.start);
    std::vector<int> open;
    open.reserve(static_cast<size_t>(cells));
    for (int i = 0; i < cells; ++i) {
      const Cell cell{i / grid_size, i % grid_size};
      if (cell == p.start || cell == p.goal) continue;
      open.push_back(i);
    }
    rng.shuffle(open);
    for (int i = 0; i < n_holes; ++i) p.holes[static_cast<size_t>(open[i])] = 1;
    auto path = oracle::bfs_shortest_path(p);
    if (!path) continue;
    auto inst = make_instance(TaskKind::VspFrozenLake, {grid_size, 0}, seed, std::move(p));
    return {std::move(inst), core::SymbolicSolution{std::move(*path)}};
  }
  throw core::GenerationStuckError("vsp generation exhausted " + std::to_string(kMaxAttempts) +
                                   " attempts (seed " + std::to_string(seed) + ")");
}

GeneratedInstance gen_maze(uint64_t seed, int grid_size) {
  if (grid_size < 2) {
    throw core::InvalidLevelError("maze grid size must be >= 2, got " + std::to_string(grid_size));
  }
  SplitRng rng(seed, "gen/maze");
  const int n = grid_size;
  core::MazePayload p;
  p.size = n;
  p.open_right.assign(static_cast<size_t>(n) * n, 0);
  p.open_down.assign(static_cast<size_t>(n) * n, 0);

  // Randomized depth-first carving; the result is a spanning tree, so every
  // cell pair is connected by exactly one path.
  std::vector<uint8_t> visited(static_cast<size_t>(n) * n, 0);
  std::vector<int> stack;
  stack.reserve(visited.size());
  const int first = static_cast<int>(rng.uniform_int(visited.size()));
  visited[static_cast<size_t>(first)] = 1;
  stack.push_back(first);
  while (!stack.empty()) {
    const int cur = stack.back();
    const int r = cur / n;
    const int c = cur % n;
    std::array<int, 4> next{};
    int count = 0;
    if (r > 0 && !visited[static_cast<size_t>(cur - n)]) next[count++] = cur - n;
    if (r + 1 < n && !visited[static_cast<size_t>(cur + n)]) next[count++] = cur + n;
    if (c > 0 && !visited[static_cast<size_t>(cur - 1)]) next[count++] = cur - 1;
    if (c + 1 < n && !visited[static_cast<size_t>(cur + 1)]) next[count++] = cur + 1;
    if (count == 0) {
      stack.pop_back();
      continue;
    }
    const int chosen = next[rng.uniform_int(static_cast<uint64_t>(count))];
    if (chosen == cur - n) p.open_down[static_cast<size_t>(chosen)] = 1;
    if (chosen == cur + n) p.open_down[static_cast<size_t>(cur)] = 1;
    if (chosen == cur - 1) p.open_right[static_cast<size_t>(chosen)] = 1;
    if (chosen == cur + 1) p.open_right[static_cast<size_t>(cur)] = 1;
    visited[static_cast<size_t>(chosen)] = 1;
    stack.push_back(chosen);
  }

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    p.start = random_cell(rng, n);
    p.goal = random_cell(rng, n);
    if (manhattan(p.start, p.goal) < n) continue;
    auto path = oracle::bfs_shortest_path(p);
    if (!path) continue;  // unreachable for a spanning tree, kept as a guard
    auto inst = make_instance(TaskKind::Maze, {grid_size, 0}, seed, std::move(p));
    return {std::move(inst), core::SymbolicSolution{std::move(*path)}};
  }
  throw core::GenerationStuckError("maze start/goal placement exhausted attempts (seed " +
                                   std::to_string(seed) + ")");
}

GeneratedInstance gen_tsp(uint64_t seed, int n_cities) {
  if (n_cities < 3 || n_cities > 20) {
    throw core::InvalidLevelError("tsp city count must be in [3, 20], got " +
                                  std::to_string(n_cities));
  }
  SplitRng rng(seed, "gen/tsp");
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<core::Point2> cities;
    cities.reserve(static_cast<size_t>(n_cities));
    bool placed_all = true;
    for (int i = 0; i < n_cities && placed_all; ++i) {
      placed_all = false;
      for (int tries = 0; tries < 200; ++tries) {
        const core::Point2 pt{rng.uniform(), rng.uniform()};
        const bool clear = std::all_of(cities.begin(), cities.end(), [&](const core::Point2& q) {
          return std::hypot(pt.x - q.x, pt.y - q.y) >= kMinCityDistance;
        });
        if (clear) {
          cities.push_back(pt);
          placed_all = true;
          break;
        }
      }
    }
    if (!placed_all) continue;

    core::TspPayload p;
    p.cities = std::move(cities);
    p.start = 0;
    core::Tour tour = oracle::held_karp(p.cities, p.start);
    auto inst = make_instance(TaskKind::Tsp, {n_cities, 0}, seed, std::move(p));

    // Reject layouts the probe parser cannot read back exactly: tour edges too
    // short to attest, chords grazing drawn strokes, cities occluding edges.
    const core::RasterImage target = render::render_solution(inst, core::SymbolicSolution{tour});
    const parse::ParseResult read = parse::parse_tour(target, inst);
    if (!read.ok() || !(std::get<core::Tour>(*read.solution) == tour)) continue;
    return {std::move(inst), core::SymbolicSolution{std::move(tour)}};
  }
  throw core::GenerationStuckError("tsp generation exhausted " + std::to_string(kMaxAttempts) +
                                   " attempts (seed " + std::to_string(seed) + ")");
}

GeneratedInstance gen_sudoku(uint64_t seed, int clues) {
  if (clues < 17 || clues > 80) {
    throw core::InvalidLevelError("sudoku clue count must be in [17, 80], got " +
                                  std::to_string(clues));
  }
  SplitRng rng(seed, "gen/sudoku");
  for (int restart = 0; restart < kMaxSudokuRestarts; ++restart) {
    GridFiller filler;
    filler.rng = &rng;
    if (!filler.fill(0)) continue;

    std::array<uint8_t, 81> givens = filler.cells;
    std::vector<int> order(81);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    // Greedy uniqueness-preserving removal. Once a removal would admit a
    // second solution it stays impossible for the rest of the pass (dropping
    // other clues only weakens the constraints), so one pass is exhaustive.
    int remaining = 81;
    for (const int cell : order) {
      if (remaining == clues) break;
      const uint8_t saved = givens[static_cast<size_t>(cell)];
      givens[static_cast<size_t>(cell)] = 0;
      if (oracle::count_sudoku_solutions(givens, 2) == 1) {
        --remaining;
      } else {
        givens[static_cast<size_t>(cell)] = saved;
      }
    }
    if (remaining != clues) continue;

    core::SudokuPayload p;
    p.givens = givens;
    auto inst = make_instance(TaskKind::Sudoku, {clues, 0}, seed, std::move(p));
    core::SudokuGrid solution;
    solution.cells = filler.cells;
    return {std::move(inst), core::SymbolicSolution{solution}};
  }
  throw core::GenerationStuckError("sudoku generation exhausted " +
                                   std::to_string(kMaxSudokuRestarts) + " restarts (seed " +
                                   std::to_string(seed) + ")");
}

GeneratedInstance gen_jigsaw(uint64_t seed, int rows, int cols) {
  if (rows < 1 || cols < 1 || rows > 4 || cols > 4 || rows * cols < 2) {
    throw core::InvalidLevelError("jigsaw layout must be within 4x4 with at least 2 patches, got " +
                                  std::to_string(rows) + "x" + std::to_string(cols));
  }
  SplitRng rng(seed, "gen/jigsaw");
  core::JigsawPayload p;
  p.rows = rows;
  p.cols = cols;
  p.texture_seed = rng.next_u64();
  const int n = rows * cols;
  p.arrangement.resize(static_cast<size_t>(n));
  std::iota(p.arrangement.begin(), p.arrangement.end(), 0);
  const auto is_identity = [&] {
    for (int i = 0; i < n; ++i) {
      if (p.arrangement[static_cast<size_t>(i)] != i) return false;
    }
    return true;
  };
  do {
    rng.shuffle(p.arrangement);
  } while (is_identity());

  core::Permutation truth;
  truth.slot_to_patch.assign(static_cast<size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    truth.slot_to_patch[static_cast<size_t>(p.arrangement[static_cast<size_t>(i)])] = i;
  }
  auto inst = make_instance(TaskKind::Jigsaw, {rows, cols}, seed, std::move(p));
  return {std::move(inst), core::SymbolicSolution{std::move(truth)}};
}

GeneratedInstance gen_instance(TaskKind kind, core::DifficultyLevel level, uint64_t seed) {
  switch (kind) {
    case TaskKind::VspFrozenLake:
      return gen_vsp(seed, level.value);
    case TaskKind::Maze:
      return gen_maze(seed, level.value);
    case TaskKind::Tsp:
      return gen_tsp(seed, level.value);
    case TaskKind::Sudoku:
      return gen_sudoku(seed, level.value);
    case TaskKind::Jigsaw:
      if (!level.is_layout()) {
        throw core::InvalidLevelError("jigsaw level must be rows x cols, got " +
                                      core::to_string(level));
      }
      return gen_jigsaw(seed, level.rows(), level.cols);
  }
  throw core::Error("unknown TaskKind");
}

std::vector<core::ManifestRecord> gen_dataset(const GenConfig& config, const fs::path& out_dir,
                                              int jobs) {
  if (config.count < 1) {
    throw core::Error("gen_dataset: count must be >= 1, got " + std::to_string(config.count));
  }
  if (!core::level_admissible(config.kind, config.level)) {
    throw core::InvalidLevelError("level " + core::to_string(config.level) +
                                  " is not admissible for " +
                                  std::string(core::to_string(config.kind)));
  }
  if (jobs <= 0) jobs = core::default_jobs();

  std::vector<GeneratedInstance> made;
  made.reserve(static_cast<size_t>(config.count));
  std::unordered_set<uint64_t> seen;
  uint64_t next_seed = config.base_seed;
  while (made.size() < static_cast<size_t>(config.count)) {
    if (next_seed - config.base_seed >=
        static_cast<uint64_t>(config.count) + static_cast<uint64_t>(kMaxAttempts)) {
      throw core::GenerationStuckError("gen_dataset: payload dedup burned " +
                                       std::to_string(kMaxAttempts) + " extra seeds");
    }
    auto gi = gen_instance(config.kind, config.level, next_seed++);
    if (!seen.insert(core::payload_hash(gi.first.payload)).second) continue;
    made.push_back(std::move(gi));
  }

  fs::create_directories(out_dir / "inputs");
  fs::create_directories(out_dir / "targets");
  std::vector<core::ManifestRecord> records(made.size());
  core::parallel_for(made.size(), jobs, [&](size_t i) {
    const auto& [inst, solution] = made[i];
    const std::string input_rel = "inputs/" + inst.id + ".png";
    const std::string target_rel = "targets/" + inst.id + ".png";
    render::write_png(out_dir / input_rel, render::render_instance(inst));
    render::write_png(out_dir / target_rel, render::render_solution(inst, solution));
    core::ManifestRecord& rec = records[i];
    rec.id = inst.id;
    rec.kind = inst.kind;
    rec.level = inst.level;
    rec.seed = inst.seed;
    rec.input_png_path = input_rel;
    rec.target_png_path = target_rel;
    rec.solution = solution;
  });
  core::write_manifest(records, out_dir / "manifest.jsonl");
  return records;
}

}  // namespace gridflow::taskgen
