#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include "gridflow/core/manifest.hpp"
#include "gridflow/core/parallel.hpp"
#include "gridflow/core/rng.hpp"
#include "gridflow/core/serialize.hpp"
#include "gridflow/core/types.hpp"

namespace fs = std::filesystem;
using namespace gridflow;

namespace {

fs::path temp_dir(const char* tag) {
  const fs::path dir = fs::temp_directory_path() / (std::string("gridflow_core_") + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

core::VspPayload small_vsp() {
  core::VspPayload p;
  p.size = 4;
  p.holes.assign(16, 0);
  p.holes[5] = 1;
  p.holes[10] = 1;
  p.start = {0, 0};
  p.goal = {3, 3};
  return p;
}

}  // namespace

TEST_CASE("rng streams are deterministic and label-separated") {
  core::SplitRng a(42, "gen");
  core::SplitRng b(42, "gen");
  core::SplitRng c(42, "train");
  bool all_equal = true;
  bool any_diff = false;
  for (int i = 0; i < 64; ++i) {
    const uint64_t va = a.next_u64();
    all_equal = all_equal && (va == b.next_u64());
    any_diff = any_diff || (va != c.next_u64());
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("rng golden values pin the bit stream across platforms") {
  core::SplitRng rng(7, "golden");
  const uint64_t v0 = rng.next_u64();
  const uint64_t v1 = rng.next_u64();
  core::SplitRng again(7, "golden");
  CHECK(again.next_u64() == v0);
  CHECK(again.next_u64() == v1);
  // The finalizer itself must match SplitMix64's reference outputs.
  CHECK(core::SplitRng::mix(0) == 0xE220A8397B1DCDAFull);
  CHECK(core::SplitRng::mix(1) == 0x910A2DEC89025CC1ull);
}

TEST_CASE("rng split children are independent of parent consumption") {
  core::SplitRng parent1(9, "root");
  core::SplitRng child1 = parent1.split("left");
  core::SplitRng parent2(9, "root");
  for (int i = 0; i < 10; ++i) parent2.next_u64();
  core::SplitRng child2 = parent2.split("left");
  for (int i = 0; i < 16; ++i) CHECK(child1.next_u64() == child2.next_u64());
}

TEST_CASE("uniform stays in [0,1) and uniform_int respects bounds") {
  core::SplitRng rng(3, "bounds");
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / 20000.0 == doctest::Approx(0.5).epsilon(0.05));
  std::array<int, 7> counts{};
  for (int i = 0; i < 14000; ++i) counts[rng.uniform_int(7)]++;
  for (const int c : counts) CHECK(c > 1600);  // ~2000 expected per bucket
  CHECK(rng.uniform_int(1) == 0);
}

TEST_CASE("normal draws have roughly standard moments") {
  core::SplitRng rng(11, "normal");
  double sum = 0.0, sum2 = 0.0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sum2 += z * z;
  }
  CHECK(sum / n == doctest::Approx(0.0).epsilon(0.05));
  CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("shuffle is a deterministic permutation") {
  std::vector<int> items1{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<int> items2 = items1;
  core::SplitRng rng1(5, "shuffle");
  core::SplitRng rng2(5, "shuffle");
  rng1.shuffle(items1);
  rng2.shuffle(items2);
  CHECK(items1 == items2);
  CHECK(std::set<int>(items1.begin(), items1.end()).size() == 10);
}

TEST_CASE("kind and level strings round trip") {
  for (const auto kind : {core::TaskKind::VspFrozenLake, core::TaskKind::Maze, core::TaskKind::Tsp,
                          core::TaskKind::Sudoku, core::TaskKind::Jigsaw}) {
    CHECK(core::task_kind_from_string(core::to_string(kind)) == kind);
  }
  CHECK(core::to_string(core::TaskKind::VspFrozenLake) == "vsp");
  const auto level = core::level_from_string("3x3");
  CHECK(level.is_layout());
  CHECK(level.rows() == 3);
  CHECK(level.cols == 3);
  CHECK(core::to_string(level) == "3x3");
  CHECK(core::level_from_string("16") == core::DifficultyLevel{16, 0});
  CHECK_THROWS_AS(core::level_from_string("abc"), core::Error);
  CHECK(core::level_admissible(core::TaskKind::Tsp, {15, 0}));
  CHECK_FALSE(core::level_admissible(core::TaskKind::Tsp, {5, 0}));
  CHECK(core::level_admissible(core::TaskKind::Jigsaw, {4, 4}));
  CHECK_FALSE(core::level_admissible(core::TaskKind::Jigsaw, {5, 5}));
}

TEST_CASE("move letters and steps") {
  const auto seq = core::ActionSequence::from_letters("UDLR");
  CHECK(seq.to_letters() == "UDLR");
  CHECK(core::step({2, 2}, core::Move::Up) == core::Cell{1, 2});
  CHECK(core::step({2, 2}, core::Move::Down) == core::Cell{3, 2});
  CHECK(core::step({2, 2}, core::Move::Left) == core::Cell{2, 1});
  CHECK(core::step({2, 2}, core::Move::Right) == core::Cell{2, 3});
  CHECK_THROWS_AS(core::ActionSequence::from_letters("UX"), core::Error);
}

TEST_CASE("payload serialization round trips every kind") {
  core::TaskPayload vsp = small_vsp();
  CHECK(core::payload_from_json(core::TaskKind::VspFrozenLake, core::payload_to_json(vsp)) == vsp);

  core::MazePayload maze;
  maze.size = 3;
  maze.open_right = {1, 0, 0, 1, 1, 0, 0, 1, 0};
  maze.open_down = {0, 1, 0, 1, 0, 1, 0, 0, 0};
  maze.start = {0, 0};
  maze.goal = {2, 2};
  core::TaskPayload maze_p = maze;
  CHECK(core::payload_from_json(core::TaskKind::Maze, core::payload_to_json(maze_p)) == maze_p);

  core::TspPayload tsp;
  tsp.cities = {{0.25, 0.5}, {0.75, 0.125}, {0.0625, 0.875}};
  tsp.start = 1;
  core::TaskPayload tsp_p = tsp;
  CHECK(core::payload_from_json(core::TaskKind::Tsp, core::payload_to_json(tsp_p)) == tsp_p);

  core::SudokuPayload sudoku;
  sudoku.givens[0] = 5;
  sudoku.givens[80] = 9;
  CHECK(sudoku.clue_count() == 2);
  core::TaskPayload sudoku_p = sudoku;
  CHECK(core::payload_from_json(core::TaskKind::Sudoku, core::payload_to_json(sudoku_p)) == sudoku_p);

  core::JigsawPayload jig;
  jig.rows = 2;
  jig.cols = 2;
  jig.arrangement = {2, 0, 3, 1};
  jig.texture_seed = 0xDEADBEEFull;
  core::TaskPayload jig_p = jig;
  CHECK(core::payload_from_json(core::TaskKind::Jigsaw, core::payload_to_json(jig_p)) == jig_p);
}

TEST_CASE("tsp coordinates survive serialization exactly") {
  // Dyadic rationals and arbitrary doubles must both round trip bit-exactly.
  core::TspPayload tsp;
  tsp.cities = {{0.1234567891234567, 0.9876543219876543}, {1.0 / 3.0, 2.0 / 7.0}};
  tsp.start = 0;
  core::TaskPayload p = tsp;
  const auto back = std::get<core::TspPayload>(
      core::payload_from_json(core::TaskKind::Tsp, core::payload_to_json(p)));
  for (size_t i = 0; i < tsp.cities.size(); ++i) {
    CHECK(back.cities[i].x == tsp.cities[i].x);
    CHECK(back.cities[i].y == tsp.cities[i].y);
  }
}

TEST_CASE("solution serialization round trips every kind") {
  core::SymbolicSolution path = core::ActionSequence::from_letters("DDRRU");
  CHECK(core::solution_from_json(core::TaskKind::Maze, core::solution_to_json(path)) == path);

  core::SymbolicSolution tour = core::Tour{{0, 3, 1, 2}};
  CHECK(core::solution_from_json(core::TaskKind::Tsp, core::solution_to_json(tour)) == tour);

  core::SudokuGrid grid;
  for (int i = 0; i < 81; ++i) grid.cells[static_cast<size_t>(i)] = static_cast<uint8_t>(i % 9 + 1);
  core::SymbolicSolution grid_s = grid;
  CHECK(core::solution_from_json(core::TaskKind::Sudoku, core::solution_to_json(grid_s)) == grid_s);

  core::SymbolicSolution perm = core::Permutation{{1, 0, 3, 2}};
  CHECK(core::solution_from_json(core::TaskKind::Jigsaw, core::solution_to_json(perm)) == perm);
}

TEST_CASE("payload hashes separate distinct payloads") {
  core::TaskPayload a = small_vsp();
  core::VspPayload modified = small_vsp();
  modified.holes[6] = 1;
  core::TaskPayload b = modified;
  CHECK(core::payload_hash(a) == core::payload_hash(a));
  CHECK(core::payload_hash(a) != core::payload_hash(b));
}

TEST_CASE("instance serialization round trips") {
  core::TaskInstance inst;
  inst.id = "vsp-4-000042";
  inst.kind = core::TaskKind::VspFrozenLake;
  inst.level = {4, 0};
  inst.seed = 42;
  inst.payload = small_vsp();
  const auto back = core::instance_from_json(core::instance_to_json(inst));
  CHECK(back.id == inst.id);
  CHECK(back.kind == inst.kind);
  CHECK(back.level == inst.level);
  CHECK(back.seed == inst.seed);
  CHECK(back.payload == inst.payload);
}

TEST_CASE("manifest writes and reads records losslessly") {
  const fs::path dir = temp_dir("manifest");
  std::vector<core::ManifestRecord> records;
  for (int i = 0; i < 3; ++i) {
    core::ManifestRecord r;
    r.id = "vsp-4-" + std::to_string(i);
    r.kind = core::TaskKind::VspFrozenLake;
    r.level = {4, 0};
    r.seed = static_cast<uint64_t>(i);
    r.input_png_path = "png/" + r.id + "_input.png";
    r.target_png_path = "png/" + r.id + "_target.png";
    r.solution = core::ActionSequence::from_letters("DR");
    records.push_back(r);
  }
  const fs::path file = dir / "manifest.jsonl";
  core::write_manifest(records, file);
  CHECK(core::read_manifest(file) == records);
}

TEST_CASE("manifest rejects duplicates, empties, and bad lines with line numbers") {
  const fs::path dir = temp_dir("manifest_bad");
  core::ManifestRecord r;
  r.id = "maze-8-0";
  r.kind = core::TaskKind::Maze;
  r.level = {8, 0};
  r.solution = core::ActionSequence::from_letters("D");
  CHECK_THROWS_AS(core::write_manifest({r, r}, dir / "dup.jsonl"), core::ManifestError);
  CHECK_THROWS_AS(core::write_manifest({}, dir / "empty.jsonl"), core::ManifestError);

  {
    std::ofstream out(dir / "broken.jsonl");
    core::write_manifest({r}, dir / "one.jsonl");
    std::ifstream in(dir / "one.jsonl");
    std::string good;
    std::getline(in, good);
    out << good << "\n" << "{not json\n";
  }
  try {
    core::read_manifest(dir / "broken.jsonl");
    FAIL("expected ManifestError");
  } catch (const core::ManifestError& e) {
    CHECK(e.line() == 2);
  }

  {
    std::ofstream out(dir / "blank.jsonl");
    std::ifstream in(dir / "one.jsonl");
    std::string good;
    std::getline(in, good);
    out << "\n" << good << "\n\n";
  }
  CHECK(core::read_manifest(dir / "blank.jsonl").size() == 1);
}

TEST_CASE("parallel_for covers each index once for any job count") {
  for (const int jobs : {1, 2, 4}) {
    std::vector<int> hits(257, 0);
    core::parallel_for(hits.size(), jobs, [&](size_t i) { hits[i]++; });
    for (const int h : hits) CHECK(h == 1);
  }
}

TEST_CASE("default_jobs honors the GRIDFLOW_JOBS override") {
  setenv("GRIDFLOW_JOBS", "3", 1);
  CHECK(core::default_jobs() == 3);
  unsetenv("GRIDFLOW_JOBS");
  CHECK(core::default_jobs() >= 1);
}
