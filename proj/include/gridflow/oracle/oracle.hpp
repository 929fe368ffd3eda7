#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "gridflow/core/types.hpp"

namespace gridflow::oracle {

// Outcome of checking a candidate symbolic solution against an instance.
struct Verdict {
  bool correct = false;
  double partial_reward = 0.0;
  std::string reason;  // empty when correct
};

// Shortest path search over a VSP grid. Returns std::nullopt when the goal is
// unreachable. Neighbor expansion follows Move enum order, which makes the
// returned path deterministic.
std::optional<core::ActionSequence> bfs_shortest_path(const core::VspPayload& grid);
std::optional<core::ActionSequence> bfs_shortest_path(const core::MazePayload& maze);

// Exact TSP via Held-Karp dynamic programming. Requires 2 <= n <= 20.
// The result starts at `start` and is canonically oriented: of the two
// traversal directions the one whose second city has the lower index is kept.
core::Tour held_karp(const std::vector<core::Point2>& cities, int start);

// Tour length through `cities` in `order`, closing back to the first city.
double cycle_length(const std::vector<int>& order, const std::vector<core::Point2>& cities);

// Backtracking solver with bitmask candidate sets. Cells are chosen
// most-constrained-first (ties: lowest index) and digits tried ascending, so
// the first solution found is deterministic.
std::optional<core::SudokuGrid> solve_sudoku(const std::array<uint8_t, 81>& givens);

// Counts complete solutions, stopping early once `cap` are found.
int count_sudoku_solutions(const std::array<uint8_t, 81>& givens, int cap);

// Validity helpers shared by verify and the parsers' tests.
bool sudoku_grid_valid(const core::SudokuGrid& grid);
bool sudoku_respects_givens(const core::SudokuGrid& grid, const std::array<uint8_t, 81>& givens);

// Walks `moves` from start; returns the final cell or nullopt if the walk
// leaves the grid or enters a blocked cell / crosses a wall.
std::optional<core::Cell> walk_path(const core::VspPayload& grid, const core::ActionSequence& moves);
std::optional<core::Cell> walk_path(const core::MazePayload& maze, const core::ActionSequence& moves);

// Ground-truth solution for an instance. Throws core::Error if the instance is
// unsolvable (generators only emit solvable instances).
core::SymbolicSolution oracle_solution(const core::TaskInstance& instance);

// Checks a candidate against the recomputed ground truth. `correct` follows
// task semantics: any legal walk ending at the goal, any optimal-length tour,
// any valid grid respecting the givens, the exact patch placement. The partial
// reward is 1.0 for correct candidates and the task's partial credit otherwise.
Verdict verify(const core::TaskInstance& instance, const core::SymbolicSolution& candidate);

// Same as verify but reuses a precomputed ground truth (used by eval loops).
Verdict verify_with_truth(const core::TaskInstance& instance,
                          const core::SymbolicSolution& candidate,
                          const core::SymbolicSolution& truth);

}  // namespace gridflow::oracle
