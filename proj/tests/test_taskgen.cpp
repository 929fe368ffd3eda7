#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "gridflow/core/serialize.hpp"
#include "gridflow/oracle/oracle.hpp"
#include "gridflow/parse/parse.hpp"
#include "gridflow/render/render.hpp"
#include "gridflow/taskgen/taskgen.hpp"

namespace fs = std::filesystem;
using namespace gridflow;
using core::TaskKind;

namespace {

fs::path temp_dir(const char* tag) {
  const fs::path dir = fs::temp_directory_path() / (std::string("gridflow_taskgen_") + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("every generated instance verifies as correct with full reward") {
  const std::vector<std::pair<TaskKind, core::DifficultyLevel>> cases{
      {TaskKind::VspFrozenLake, {4, 0}}, {TaskKind::Maze, {8, 0}}, {TaskKind::Tsp, {12, 0}},
      {TaskKind::Sudoku, {40, 0}},       {TaskKind::Jigsaw, {3, 3}},
  };
  for (const auto& [kind, level] : cases) {
    const int count = kind == TaskKind::Sudoku || kind == TaskKind::Tsp ? 5 : 15;
    for (uint64_t seed = 0; seed < static_cast<uint64_t>(count); ++seed) {
      const auto [inst, solution] = taskgen::gen_instance(kind, level, seed);
      CHECK(inst.kind == kind);
      CHECK(inst.level == level);
      CHECK(inst.seed == seed);
      CHECK(!inst.id.empty());
      const auto verdict = oracle::verify(inst, solution);
      CHECK(verdict.correct);
      CHECK(verdict.partial_reward == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("generation is a pure function of the seed") {
  for (const auto kind :
       {TaskKind::VspFrozenLake, TaskKind::Maze, TaskKind::Tsp, TaskKind::Sudoku,
        TaskKind::Jigsaw}) {
    const core::DifficultyLevel level = core::admissible_levels(kind).front();
    const auto a = taskgen::gen_instance(kind, level, 77);
    const auto b = taskgen::gen_instance(kind, level, 77);
    CHECK(a.first.payload == b.first.payload);
    CHECK(a.second == b.second);
    const auto c = taskgen::gen_instance(kind, level, 78);
    CHECK(core::payload_hash(a.first.payload) != core::payload_hash(c.first.payload));
  }
}

TEST_CASE("vsp instances respect the placement and density contract") {
  for (uint64_t seed = 0; seed < 25; ++seed) {
    const auto [inst, solution] = taskgen::gen_vsp(seed, 8);
    const auto& p = inst.vsp();
    CHECK(p.size == 8);
    CHECK(p.start.r < 2);
    CHECK(p.start.c < 2);
    CHECK(p.goal != p.start);
    CHECK(!p.hole(p.start.r, p.start.c));
    CHECK(!p.hole(p.goal.r, p.goal.c));
    int holes = 0;
    for (const uint8_t h : p.holes) holes += h;
    CHECK(holes == std::llround(0.2 * (64 - 2)));
    const auto path = oracle::bfs_shortest_path(p);
    REQUIRE(path.has_value());
    CHECK(std::get<core::ActionSequence>(solution) == *path);
  }
}

TEST_CASE("mazes are perfect: spanning tree with distant endpoints") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const auto [inst, solution] = taskgen::gen_maze(seed, 8);
    const auto& m = inst.maze();
    int passages = 0;
    for (int r = 0; r < 8; ++r) {
      for (int c = 0; c < 8; ++c) {
        passages += m.can_go_right(r, c) ? 1 : 0;
        passages += m.can_go_down(r, c) ? 1 : 0;
      }
    }
    // 64 cells, 63 carved passages: connected + acyclic, so paths are unique.
    CHECK(passages == 63);
    CHECK(std::abs(m.start.r - m.goal.r) + std::abs(m.start.c - m.goal.c) >= 8);
    // Connectivity: BFS reaches every cell.
    std::vector<int> reach(64, 0);
    std::vector<int> queue{m.start.r * 8 + m.start.c};
    reach[static_cast<size_t>(queue[0])] = 1;
    for (size_t head = 0; head < queue.size(); ++head) {
      const int r = queue[head] / 8, c = queue[head] % 8;
      const auto push = [&](int rr, int cc) {
        if (!reach[static_cast<size_t>(rr * 8 + cc)]) {
          reach[static_cast<size_t>(rr * 8 + cc)] = 1;
          queue.push_back(rr * 8 + cc);
        }
      };
      if (m.can_go_right(r, c)) push(r, c + 1);
      if (m.can_go_down(r, c)) push(r + 1, c);
      if (c > 0 && m.can_go_right(r, c - 1)) push(r, c - 1);
      if (r > 0 && m.can_go_down(r - 1, c)) push(r - 1, c);
    }
    CHECK(queue.size() == 64);
  }
}

TEST_CASE("tsp instances keep cities apart and tours parseable") {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    const auto [inst, solution] = taskgen::gen_tsp(seed, 12);
    const auto& p = inst.tsp();
    CHECK(p.cities.size() == 12);
    CHECK(p.start == 0);
    for (size_t i = 0; i < p.cities.size(); ++i) {
      CHECK(p.cities[i].x >= 0.0);
      CHECK(p.cities[i].x <= 1.0);
      for (size_t j = i + 1; j < p.cities.size(); ++j) {
        CHECK(std::hypot(p.cities[i].x - p.cities[j].x, p.cities[i].y - p.cities[j].y) >= 0.04);
      }
    }
    const auto& tour = std::get<core::Tour>(solution);
    CHECK(tour.order[0] == 0);
    // The rendered truth reads back exactly (generator-side rejection).
    const auto image = render::render_solution(inst, solution);
    const auto read = parse::parse_tour(image, inst);
    REQUIRE(read.ok());
    CHECK(std::get<core::Tour>(*read.solution) == tour);
  }
}

TEST_CASE("sudoku instances have the exact clue count and a unique solution") {
  for (uint64_t seed = 0; seed < 3; ++seed) {
    const auto [inst, solution] = taskgen::gen_sudoku(seed, 40);
    const auto& p = inst.sudoku();
    CHECK(p.clue_count() == 40);
    CHECK(oracle::count_sudoku_solutions(p.givens, 2) == 1);
    const auto& grid = std::get<core::SudokuGrid>(solution);
    CHECK(oracle::sudoku_grid_valid(grid));
    CHECK(oracle::sudoku_respects_givens(grid, p.givens));
    const auto solved = oracle::solve_sudoku(p.givens);
    REQUIRE(solved.has_value());
    CHECK(solved->cells == grid.cells);
  }
}

TEST_CASE("jigsaw arrangements are non-identity and invert to the truth") {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const auto [inst, solution] = taskgen::gen_jigsaw(seed, 2, 2);
    const auto& p = inst.jigsaw();
    bool identity = true;
    std::set<int> values;
    for (int i = 0; i < 4; ++i) {
      identity &= p.arrangement[static_cast<size_t>(i)] == i;
      values.insert(p.arrangement[static_cast<size_t>(i)]);
    }
    CHECK(!identity);
    CHECK(values.size() == 4);
    const auto& truth = std::get<core::Permutation>(solution);
    for (int i = 0; i < 4; ++i) {
      CHECK(truth.slot_to_patch[static_cast<size_t>(p.arrangement[static_cast<size_t>(i)])] == i);
    }
  }
  // The only 1x2 arrangement is the swap.
  const auto [pair_inst, pair_sol] = taskgen::gen_jigsaw(5, 1, 2);
  CHECK(pair_inst.jigsaw().arrangement == std::vector<int>{1, 0});
}

TEST_CASE("out-of-range levels are rejected") {
  CHECK_THROWS_AS(taskgen::gen_vsp(0, 1), core::InvalidLevelError);
  CHECK_THROWS_AS(taskgen::gen_maze(0, 1), core::InvalidLevelError);
  CHECK_THROWS_AS(taskgen::gen_tsp(0, 2), core::InvalidLevelError);
  CHECK_THROWS_AS(taskgen::gen_tsp(0, 21), core::InvalidLevelError);
  CHECK_THROWS_AS(taskgen::gen_sudoku(0, 16), core::InvalidLevelError);
  CHECK_THROWS_AS(taskgen::gen_sudoku(0, 81), core::InvalidLevelError);
  CHECK_THROWS_AS(taskgen::gen_jigsaw(0, 1, 1), core::InvalidLevelError);
  CHECK_THROWS_AS(taskgen::gen_jigsaw(0, 5, 2), core::InvalidLevelError);
  CHECK_THROWS_AS(taskgen::gen_instance(TaskKind::Jigsaw, {4, 0}, 0), core::InvalidLevelError);
}

TEST_CASE("gen_dataset writes a deduplicated, replayable dataset") {
  taskgen::GenConfig config;
  config.kind = TaskKind::VspFrozenLake;
  config.level = {3, 0};
  config.count = 24;
  config.base_seed = 7;

  const fs::path dir_a = temp_dir("ds_a");
  const fs::path dir_b = temp_dir("ds_b");
  const auto records_a = taskgen::gen_dataset(config, dir_a, 2);
  const auto records_b = taskgen::gen_dataset(config, dir_b, 1);
  REQUIRE(records_a.size() == 24);
  CHECK(records_a == records_b);
  CHECK(slurp(dir_a / "manifest.jsonl") == slurp(dir_b / "manifest.jsonl"));

  std::set<std::string> ids;
  std::set<uint64_t> hashes;
  for (const auto& rec : records_a) {
    ids.insert(rec.id);
    CHECK(rec.seed >= config.base_seed);
    CHECK(fs::exists(dir_a / rec.input_png_path));
    CHECK(fs::exists(dir_a / rec.target_png_path));
    const auto [inst, solution] = taskgen::gen_instance(rec.kind, rec.level, rec.seed);
    CHECK(inst.id == rec.id);
    CHECK(solution == rec.solution);
    hashes.insert(core::payload_hash(inst.payload));
    CHECK(slurp(dir_a / rec.input_png_path) == slurp(dir_b / rec.input_png_path));
  }
  CHECK(ids.size() == records_a.size());
  CHECK(hashes.size() == records_a.size());

  const auto reread = core::read_manifest(dir_a / "manifest.jsonl");
  CHECK(reread == records_a);
}

TEST_CASE("small instance spaces force seed skipping but stay unique") {
  // 3x3 boards have a few hundred distinct layouts; 48 draws collide with
  // high probability, exercising the resample-on-collision path.
  taskgen::GenConfig config;
  config.kind = TaskKind::VspFrozenLake;
  config.level = {3, 0};
  config.count = 48;
  config.base_seed = 0;
  const fs::path dir = temp_dir("ds_skip");
  const auto records = taskgen::gen_dataset(config, dir, 2);
  std::set<uint64_t> hashes;
  uint64_t max_seed = 0;
  for (const auto& rec : records) {
    const auto [inst, solution] = taskgen::gen_instance(rec.kind, rec.level, rec.seed);
    hashes.insert(core::payload_hash(inst.payload));
    max_seed = std::max(max_seed, rec.seed);
  }
  CHECK(hashes.size() == 48);
  CHECK(max_seed >= 47);  // equality only if no collision occurred
}

TEST_CASE("bad dataset configs are rejected") {
  taskgen::GenConfig config;
  config.kind = TaskKind::VspFrozenLake;
  config.level = {3, 0};
  config.count = 0;
  config.base_seed = 0;
  const fs::path dir = temp_dir("ds_bad");
  CHECK_THROWS_AS(taskgen::gen_dataset(config, dir, 1), core::Error);
  config.count = 1;
  config.level = {9, 0};  // not an admissible VSP size
  CHECK_THROWS_AS(taskgen::gen_dataset(config, dir, 1), core::InvalidLevelError);
}
