#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "gridflow/core/rng.hpp"
#include "gridflow/oracle/oracle.hpp"
#include "gridflow/rewards/rewards.hpp"

using namespace gridflow;
using core::ActionSequence;
using core::Cell;
using core::Move;
using core::Point2;
using core::SudokuGrid;
using core::Tour;

namespace {

core::VspPayload open_grid(int size) {
  core::VspPayload p;
  p.size = size;
  p.holes.assign(static_cast<size_t>(size) * size, 0);
  p.start = {0, 0};
  p.goal = {size - 1, size - 1};
  return p;
}

// Independent distance computation: Bellman-Ford style relaxation sweeps.
int reference_distance(const core::VspPayload& grid) {
  const int n = grid.size;
  const int inf = std::numeric_limits<int>::max() / 2;
  std::vector<int> dist(static_cast<size_t>(n) * n, inf);
  if (grid.hole(grid.start.r, grid.start.c)) return inf;
  dist[static_cast<size_t>(grid.start.r * n + grid.start.c)] = 0;
  for (int sweep = 0; sweep < n * n; ++sweep) {
    bool changed = false;
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        if (grid.hole(r, c)) continue;
        const int d = dist[static_cast<size_t>(r * n + c)];
        if (d >= inf) continue;
        const Cell neighbors[4] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
        for (const Cell nb : neighbors) {
          if (nb.r < 0 || nb.r >= n || nb.c < 0 || nb.c >= n) continue;
          if (grid.hole(nb.r, nb.c)) continue;
          int& slot = dist[static_cast<size_t>(nb.r * n + nb.c)];
          if (d + 1 < slot) {
            slot = d + 1;
            changed = true;
          }
        }
      }
    }
    if (!changed) break;
  }
  return dist[static_cast<size_t>(grid.goal.r * n + grid.goal.c)];
}

core::TspPayload random_tsp(int n, uint64_t seed) {
  core::SplitRng rng(seed, "test_tsp");
  core::TspPayload p;
  for (int i = 0; i < n; ++i) {
    p.cities.push_back({rng.uniform(), rng.uniform()});
  }
  p.start = 0;
  return p;
}

double brute_force_tsp(const std::vector<Point2>& cities, int start) {
  std::vector<int> rest;
  for (int i = 0; i < static_cast<int>(cities.size()); ++i) {
    if (i != start) rest.push_back(i);
  }
  std::sort(rest.begin(), rest.end());
  double best = std::numeric_limits<double>::infinity();
  do {
    std::vector<int> order{start};
    order.insert(order.end(), rest.begin(), rest.end());
    best = std::min(best, oracle::cycle_length(order, cities));
  } while (std::next_permutation(rest.begin(), rest.end()));
  return best;
}

constexpr const char* kPuzzle =
    "530070000"
    "600195000"
    "098000060"
    "800060003"
    "400803001"
    "700020006"
    "060000280"
    "000419005"
    "000080079";
constexpr const char* kPuzzleSolution =
    "534678912"
    "672195348"
    "198342567"
    "859761423"
    "426853791"
    "713924856"
    "961537284"
    "287419635"
    "345286179";

std::array<uint8_t, 81> digits_from(const char* text) {
  std::array<uint8_t, 81> out{};
  for (int i = 0; i < 81; ++i) out[static_cast<size_t>(i)] = static_cast<uint8_t>(text[i] - '0');
  return out;
}

}  // namespace

TEST_CASE("bfs on an open grid is Manhattan-optimal and deterministic") {
  const auto grid = open_grid(3);
  const auto path = oracle::bfs_shortest_path(grid);
  REQUIRE(path.has_value());
  CHECK(path->moves.size() == 4);
  // Expansion order Up, Down, Left, Right makes the down-then-right path canonical.
  CHECK(path->to_letters() == "DDRR");
  CHECK(oracle::bfs_shortest_path(grid)->to_letters() == "DDRR");
}

TEST_CASE("bfs routes around holes and detects unreachable goals") {
  core::VspPayload grid = open_grid(3);
  grid.holes = {0, 0, 0,
                1, 1, 0,
                0, 0, 0};
  const auto path = oracle::bfs_shortest_path(grid);
  REQUIRE(path.has_value());
  CHECK(path->to_letters() == "RRDD");

  grid.holes = {0, 1, 0,
                1, 1, 0,
                0, 0, 0};
  CHECK_FALSE(oracle::bfs_shortest_path(grid).has_value());

  grid.holes = {0, 0, 0,
                0, 0, 0,
                0, 0, 1};  // goal itself blocked
  CHECK_FALSE(oracle::bfs_shortest_path(grid).has_value());
}

TEST_CASE("bfs length matches an independent relaxation on random grids") {
  core::SplitRng rng(99, "grids");
  int solvable = 0;
  for (int trial = 0; trial < 200; ++trial) {
    core::VspPayload grid = open_grid(6);
    for (size_t i = 0; i < grid.holes.size(); ++i) {
      grid.holes[i] = rng.bernoulli(0.25) ? 1 : 0;
    }
    grid.holes[0] = 0;
    grid.holes[grid.holes.size() - 1] = 0;
    const int ref = reference_distance(grid);
    const auto path = oracle::bfs_shortest_path(grid);
    if (ref >= std::numeric_limits<int>::max() / 2) {
      CHECK_FALSE(path.has_value());
      continue;
    }
    ++solvable;
    REQUIRE(path.has_value());
    CHECK(static_cast<int>(path->moves.size()) == ref);
    const auto end = oracle::walk_path(grid, *path);
    REQUIRE(end.has_value());
    CHECK(*end == grid.goal);
  }
  CHECK(solvable > 50);  // the comparison actually exercised real paths
}

TEST_CASE("maze bfs follows carved passages only") {
  // 2x2 maze carved as a single corridor: (0,0)-(0,1)-(1,1)-(1,0).
  core::MazePayload maze;
  maze.size = 2;
  maze.open_right = {1, 0, 1, 0};
  maze.open_down = {0, 1, 0, 0};
  maze.start = {0, 0};
  maze.goal = {1, 0};
  const auto path = oracle::bfs_shortest_path(maze);
  REQUIRE(path.has_value());
  CHECK(path->to_letters() == "RDL");

  // Fully open maze: shortest path is Manhattan.
  core::MazePayload open;
  open.size = 5;
  open.open_right.assign(25, 1);
  open.open_down.assign(25, 1);
  open.start = {0, 0};
  open.goal = {4, 4};
  CHECK(oracle::bfs_shortest_path(open)->moves.size() == 8);
}

TEST_CASE("walk_path rejects leaving the grid and blocked transitions") {
  const auto grid = open_grid(3);
  CHECK_FALSE(oracle::walk_path(grid, ActionSequence::from_letters("U")).has_value());
  CHECK_FALSE(oracle::walk_path(grid, ActionSequence::from_letters("DDDD")).has_value());
  core::VspPayload holed = grid;
  holed.holes[4] = 1;  // center
  CHECK_FALSE(oracle::walk_path(holed, ActionSequence::from_letters("DR")).has_value());
  CHECK(oracle::walk_path(holed, ActionSequence::from_letters("DDRR")).has_value());
}

TEST_CASE("held_karp matches brute force on random instances") {
  for (uint64_t seed = 1; seed <= 6; ++seed) {
    const auto tsp = random_tsp(8, seed);
    const Tour tour = oracle::held_karp(tsp.cities, tsp.start);
    REQUIRE(tour.order.size() == 8);
    CHECK(tour.order[0] == 0);
    std::vector<int> sorted = tour.order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> expect(8);
    std::iota(expect.begin(), expect.end(), 0);
    CHECK(sorted == expect);
    const double best = brute_force_tsp(tsp.cities, tsp.start);
    CHECK(oracle::cycle_length(tour.order, tsp.cities) == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("held_karp is deterministic and canonically oriented") {
  const auto tsp = random_tsp(10, 77);
  const Tour a = oracle::held_karp(tsp.cities, tsp.start);
  const Tour b = oracle::held_karp(tsp.cities, tsp.start);
  CHECK(a.order == b.order);
  // Of the two directions around the cycle, the kept one steps to the
  // lower-indexed neighbor of the start city first.
  CHECK(a.order[1] < a.order.back());

  // Non-zero start city is honored.
  const Tour c = oracle::held_karp(tsp.cities, 3);
  CHECK(c.order[0] == 3);
  CHECK(oracle::cycle_length(c.order, tsp.cities) ==
        doctest::Approx(oracle::cycle_length(a.order, tsp.cities)).epsilon(1e-12));
}

TEST_CASE("held_karp rejects out-of-contract inputs") {
  std::vector<Point2> one{{0.5, 0.5}};
  CHECK_THROWS_AS(oracle::held_karp(one, 0), core::Error);
  std::vector<Point2> two{{0.0, 0.0}, {1.0, 1.0}};
  CHECK_THROWS_AS(oracle::held_karp(two, 5), core::Error);
  const Tour pair = oracle::held_karp(two, 0);
  CHECK(pair.order == std::vector<int>{0, 1});
}

TEST_CASE("sudoku solver reproduces the known solution of a classic puzzle") {
  const auto givens = digits_from(kPuzzle);
  const auto solved = oracle::solve_sudoku(givens);
  REQUIRE(solved.has_value());
  CHECK(solved->cells == digits_from(kPuzzleSolution));
  CHECK(oracle::sudoku_grid_valid(*solved));
  CHECK(oracle::sudoku_respects_givens(*solved, givens));
  CHECK(oracle::count_sudoku_solutions(givens, 2) == 1);
}

TEST_CASE("sudoku solution counting caps and detects contradictions") {
  std::array<uint8_t, 81> empty{};
  CHECK(oracle::count_sudoku_solutions(empty, 2) == 2);
  CHECK(oracle::count_sudoku_solutions(empty, 5) == 5);

  std::array<uint8_t, 81> clash{};
  clash[0] = 5;
  clash[1] = 5;  // same row
  CHECK(oracle::count_sudoku_solutions(clash, 2) == 0);
  CHECK_FALSE(oracle::solve_sudoku(clash).has_value());

  // Dropping one clue from a solved grid keeps the solution unique.
  auto nearly = digits_from(kPuzzleSolution);
  nearly[17] = 0;
  CHECK(oracle::count_sudoku_solutions(nearly, 2) == 1);
}

TEST_CASE("sudoku validity helpers catch digit and conflict errors") {
  SudokuGrid grid;
  grid.cells = digits_from(kPuzzleSolution);
  CHECK(oracle::sudoku_grid_valid(grid));
  grid.cells[0] = 0;
  CHECK_FALSE(oracle::sudoku_grid_valid(grid));
  grid.cells = digits_from(kPuzzleSolution);
  grid.cells[1] = grid.cells[0];
  CHECK_FALSE(oracle::sudoku_grid_valid(grid));
}

TEST_CASE("oracle solutions verify as correct for every kind") {
  core::TaskInstance vsp;
  vsp.kind = core::TaskKind::VspFrozenLake;
  vsp.payload = open_grid(4);

  core::MazePayload maze;
  maze.size = 3;
  maze.open_right = {1, 1, 0, 0, 0, 0, 1, 1, 0};
  maze.open_down = {0, 0, 1, 0, 0, 1, 0, 0, 0};
  maze.start = {0, 0};
  maze.goal = {2, 0};
  core::TaskInstance maze_inst;
  maze_inst.kind = core::TaskKind::Maze;
  maze_inst.payload = maze;

  core::TaskInstance tsp;
  tsp.kind = core::TaskKind::Tsp;
  tsp.payload = random_tsp(7, 5);

  core::TaskInstance sudoku;
  sudoku.kind = core::TaskKind::Sudoku;
  core::SudokuPayload sp;
  sp.givens = digits_from(kPuzzle);
  sudoku.payload = sp;

  core::TaskInstance jig;
  jig.kind = core::TaskKind::Jigsaw;
  core::JigsawPayload jp;
  jp.rows = 2;
  jp.cols = 2;
  jp.arrangement = {2, 0, 3, 1};
  jig.payload = jp;

  for (const auto* inst : {&vsp, &maze_inst, &tsp, &sudoku, &jig}) {
    const auto truth = oracle::oracle_solution(*inst);
    const auto verdict = oracle::verify(*inst, truth);
    CHECK(verdict.correct);
    CHECK(verdict.partial_reward == doctest::Approx(1.0));
    CHECK(verdict.reason.empty());
  }
}

TEST_CASE("jigsaw oracle inverts the arrangement") {
  core::TaskInstance jig;
  jig.kind = core::TaskKind::Jigsaw;
  core::JigsawPayload jp;
  jp.rows = 2;
  jp.cols = 2;
  jp.arrangement = {2, 0, 3, 1};  // input slot i shows source patch arrangement[i]
  jig.payload = jp;
  const auto truth = std::get<core::Permutation>(oracle::oracle_solution(jig));
  // Source patch s sits at the input slot whose arrangement entry is s.
  CHECK(truth.slot_to_patch == std::vector<int>{1, 3, 0, 2});
}

TEST_CASE("verify accepts any valid goal-reaching plan and scores failures") {
  core::TaskInstance inst;
  inst.kind = core::TaskKind::VspFrozenLake;
  inst.payload = open_grid(4);
  const auto truth = std::get<ActionSequence>(oracle::oracle_solution(inst));
  REQUIRE(truth.to_letters() == "DDDRRR");

  // Valid non-shortest detour reaching the goal: correct by task semantics.
  const auto detour = ActionSequence::from_letters("DDDRRURD");
  const auto v1 = oracle::verify(inst, core::SymbolicSolution{detour});
  CHECK(v1.correct);
  CHECK(v1.partial_reward == doctest::Approx(1.0));

  // Walks off the grid.
  const auto off = ActionSequence::from_letters("UU");
  const auto v2 = oracle::verify(inst, core::SymbolicSolution{off});
  CHECK_FALSE(v2.correct);
  CHECK(v2.partial_reward == doctest::Approx(0.0));
  CHECK(v2.reason.find("leaves the grid") != std::string::npos);

  // Ends short of the goal.
  const auto shortstop = ActionSequence::from_letters("DDD");
  const auto v3 = oracle::verify(inst, core::SymbolicSolution{shortstop});
  CHECK_FALSE(v3.correct);
  CHECK(v3.partial_reward == doctest::Approx(0.5));

  // A different shortest path also counts.
  const auto alt = ActionSequence::from_letters("RRRDDD");
  const auto v4 = oracle::verify(inst, core::SymbolicSolution{alt});
  CHECK(v4.correct);
  CHECK(v4.partial_reward == doctest::Approx(1.0));

  // Entering a hole names the cell.
  core::VspPayload holed = open_grid(4);
  holed.holes[1] = 1;  // (0,1)
  core::TaskInstance holed_inst;
  holed_inst.kind = core::TaskKind::VspFrozenLake;
  holed_inst.payload = holed;
  const auto v5 = oracle::verify(holed_inst, core::SymbolicSolution{alt});
  CHECK_FALSE(v5.correct);
  CHECK(v5.reason.find("hole at (0,1)") != std::string::npos);
}

TEST_CASE("verify scores tsp candidates by set, start, and length") {
  core::TaskInstance inst;
  inst.kind = core::TaskKind::Tsp;
  inst.payload = random_tsp(7, 21);
  const auto truth = std::get<Tour>(oracle::oracle_solution(inst));

  // Reversed direction: same cycle, still optimal.
  Tour reversed = truth;
  std::reverse(reversed.order.begin() + 1, reversed.order.end());
  const auto v1 = oracle::verify(inst, core::SymbolicSolution{reversed});
  CHECK(v1.correct);
  CHECK(v1.partial_reward == doctest::Approx(1.0));

  // Swap two interior cities: usually suboptimal, always same set.
  Tour swapped = truth;
  std::swap(swapped.order[2], swapped.order[4]);
  const auto v2 = oracle::verify(inst, core::SymbolicSolution{swapped});
  const double len_gap = std::abs(oracle::cycle_length(swapped.order, inst.tsp().cities) -
                                  oracle::cycle_length(truth.order, inst.tsp().cities));
  if (len_gap >= rewards::kTspLengthTolerance) {
    CHECK_FALSE(v2.correct);
    CHECK(v2.partial_reward == doctest::Approx(0.5));
  }

  // Wrong start city.
  Tour rotated = truth;
  std::rotate(rotated.order.begin(), rotated.order.begin() + 1, rotated.order.end());
  const auto v3 = oracle::verify(inst, core::SymbolicSolution{rotated});
  CHECK_FALSE(v3.correct);

  // Missing city.
  Tour missing = truth;
  missing.order.pop_back();
  const auto v4 = oracle::verify(inst, core::SymbolicSolution{missing});
  CHECK_FALSE(v4.correct);
  CHECK(v4.partial_reward == doctest::Approx(0.0));
}

TEST_CASE("verify scores sudoku candidates cell-wise and enforces givens") {
  core::TaskInstance inst;
  inst.kind = core::TaskKind::Sudoku;
  core::SudokuPayload sp;
  sp.givens = digits_from(kPuzzle);
  inst.payload = sp;
  const auto truth = std::get<SudokuGrid>(oracle::oracle_solution(inst));

  SudokuGrid tampered = truth;
  tampered.cells[2] = static_cast<uint8_t>(tampered.cells[2] % 9 + 1);  // cell (0,2) is not a given
  REQUIRE(sp.givens[2] == 0);
  const auto v = oracle::verify(inst, core::SymbolicSolution{tampered});
  CHECK_FALSE(v.correct);
  CHECK(v.partial_reward == doctest::Approx(80.0 / 81.0));
}

TEST_CASE("verify rejects mismatched solution kinds") {
  core::TaskInstance inst;
  inst.kind = core::TaskKind::Sudoku;
  core::SudokuPayload sp;
  sp.givens = digits_from(kPuzzle);
  inst.payload = sp;
  CHECK_THROWS_AS(oracle::verify(inst, core::SymbolicSolution{Tour{{0, 1}}}),
                  core::KindMismatchError);
}

TEST_CASE("verify_with_truth agrees with verify") {
  core::TaskInstance inst;
  inst.kind = core::TaskKind::Tsp;
  inst.payload = random_tsp(9, 3);
  const auto truth = oracle::oracle_solution(inst);
  Tour swapped = std::get<Tour>(truth);
  std::swap(swapped.order[1], swapped.order[3]);
  const auto a = oracle::verify(inst, core::SymbolicSolution{swapped});
  const auto b = oracle::verify_with_truth(inst, core::SymbolicSolution{swapped}, truth);
  CHECK(a.correct == b.correct);
  CHECK(a.partial_reward == doctest::Approx(b.partial_reward));
}
