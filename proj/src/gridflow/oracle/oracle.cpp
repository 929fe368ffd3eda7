#include "gridflow/oracle/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>

#include "gridflow/rewards/rewards.hpp"

namespace gridflow::oracle {

using core::ActionSequence;
using core::Cell;
using core::KindMismatchError;
using core::Move;
using core::Permutation;
using core::Point2;
using core::SudokuGrid;
using core::SymbolicSolution;
using core::TaskInstance;
using core::TaskKind;
using core::Tour;

namespace {

constexpr std::array<Move, 4> kMoves = {Move::Up, Move::Down, Move::Left, Move::Right};

// Generic BFS over an n*n grid; `passable(from, move)` gates each step.
template <typename Passable>
std::optional<ActionSequence> grid_bfs(int size, Cell start, Cell goal, Passable passable) {
  const auto idx = [size](Cell c) { return c.r * size + c.c; };
  std::vector<int> parent(static_cast<size_t>(size) * size, -1);
  std::vector<Move> via(static_cast<size_t>(size) * size, Move::Up);
  std::vector<uint8_t> seen(static_cast<size_t>(size) * size, 0);
  std::queue<Cell> frontier;
  frontier.push(start);
  seen[static_cast<size_t>(idx(start))] = 1;
  while (!frontier.empty()) {
    const Cell cur = frontier.front();
    frontier.pop();
    if (cur.r == goal.r && cur.c == goal.c) {
      std::vector<Move> rev;
      Cell c = cur;
      while (!(c.r == start.r && c.c == start.c)) {
        const int i = idx(c);
        rev.push_back(via[static_cast<size_t>(i)]);
        const int p = parent[static_cast<size_t>(i)];
        c = Cell{p / size, p % size};
      }
      std::reverse(rev.begin(), rev.end());
      return ActionSequence{std::move(rev)};
    }
    for (const Move m : kMoves) {
      if (!passable(cur, m)) continue;
      const Cell nxt = core::step(cur, m);
      const int i = idx(nxt);
      if (seen[static_cast<size_t>(i)]) continue;
      seen[static_cast<size_t>(i)] = 1;
      parent[static_cast<size_t>(i)] = idx(cur);
      via[static_cast<size_t>(i)] = m;
      frontier.push(nxt);
    }
  }
  return std::nullopt;
}

template <typename Passable>
std::optional<Cell> walk_generic(int size, Cell start, const ActionSequence& moves, Passable passable) {
  Cell cur = start;
  for (const Move m : moves.moves) {
    if (!passable(cur, m)) return std::nullopt;
    cur = core::step(cur, m);
    if (cur.r < 0 || cur.r >= size || cur.c < 0 || cur.c >= size) return std::nullopt;
  }
  return cur;
}

bool vsp_passable(const core::VspPayload& grid, Cell from, Move m) {
  const Cell to = core::step(from, m);
  if (to.r < 0 || to.r >= grid.size || to.c < 0 || to.c >= grid.size) return false;
  return grid.holes[static_cast<size_t>(to.r * grid.size + to.c)] == 0;
}

bool maze_passable(const core::MazePayload& maze, Cell from, Move m) {
  switch (m) {
    case Move::Up:
      return from.r > 0 && maze.can_go_down(from.r - 1, from.c);
    case Move::Down:
      return from.r < maze.size - 1 && maze.can_go_down(from.r, from.c);
    case Move::Left:
      return from.c > 0 && maze.can_go_right(from.r, from.c - 1);
    case Move::Right:
      return from.c < maze.size - 1 && maze.can_go_right(from.r, from.c);
  }
  return false;
}

struct SudokuState {
  std::array<uint16_t, 9> rows{};
  std::array<uint16_t, 9> cols{};
  std::array<uint16_t, 9> boxes{};
  std::array<uint8_t, 81> cells{};

  static int box_of(int r, int c) { return (r / 3) * 3 + c / 3; }

  // Returns false if the givens already conflict.
  bool init(const std::array<uint8_t, 81>& givens) {
    for (int i = 0; i < 81; ++i) {
      const uint8_t d = givens[static_cast<size_t>(i)];
      cells[static_cast<size_t>(i)] = d;
      if (d == 0) continue;
      const int r = i / 9, c = i % 9, b = box_of(r, c);
      const uint16_t bit = static_cast<uint16_t>(1u << (d - 1));
      if ((rows[r] & bit) || (cols[c] & bit) || (boxes[b] & bit)) return false;
      rows[r] = static_cast<uint16_t>(rows[r] | bit);
      cols[c] = static_cast<uint16_t>(cols[c] | bit);
      boxes[b] = static_cast<uint16_t>(boxes[b] | bit);
    }
    return true;
  }

  uint16_t candidates(int i) const {
    const int r = i / 9, c = i % 9, b = box_of(r, c);
    return static_cast<uint16_t>(0x1FF & ~(rows[r] | cols[c] | boxes[b]));
  }

  void place(int i, uint8_t d) {
    const int r = i / 9, c = i % 9, b = box_of(r, c);
    const uint16_t bit = static_cast<uint16_t>(1u << (d - 1));
    rows[r] = static_cast<uint16_t>(rows[r] | bit);
    cols[c] = static_cast<uint16_t>(cols[c] | bit);
    boxes[b] = static_cast<uint16_t>(boxes[b] | bit);
    cells[static_cast<size_t>(i)] = d;
  }

  void remove(int i, uint8_t d) {
    const int r = i / 9, c = i % 9, b = box_of(r, c);
    const uint16_t bit = static_cast<uint16_t>(~(1u << (d - 1)));
    rows[r] = static_cast<uint16_t>(rows[r] & bit);
    cols[c] = static_cast<uint16_t>(cols[c] & bit);
    boxes[b] = static_cast<uint16_t>(boxes[b] & bit);
    cells[static_cast<size_t>(i)] = 0;
  }

  // Most-constrained empty cell, lowest index on ties; -1 when full.
  int pick_cell() const {
    int best = -1, best_count = 10;
    for (int i = 0; i < 81; ++i) {
      if (cells[static_cast<size_t>(i)] != 0) continue;
      const int count = std::popcount(static_cast<unsigned>(candidates(i)));
      if (count < best_count) {
        best = i;
        best_count = count;
        if (count <= 1) break;
      }
    }
    return best;
  }
};

// Counts solutions up to `cap`; when `first` is non-null the first complete
// grid found is stored there.
int sudoku_search(SudokuState& state, int cap, std::array<uint8_t, 81>* first) {
  const int i = state.pick_cell();
  if (i < 0) {
    if (first && first->at(0) == 0xFF) *first = state.cells;
    return 1;
  }
  uint16_t cands = state.candidates(i);
  if (cands == 0) return 0;
  int found = 0;
  while (cands != 0) {
    const int bit = std::countr_zero(static_cast<unsigned>(cands));
    cands = static_cast<uint16_t>(cands & (cands - 1));
    const uint8_t d = static_cast<uint8_t>(bit + 1);
    state.place(i, d);
    found += sudoku_search(state, cap - found, first);
    state.remove(i, d);
    if (found >= cap) return found;
  }
  return found;
}

}  // namespace

std::optional<ActionSequence> bfs_shortest_path(const core::VspPayload& grid) {
  if (grid.holes[static_cast<size_t>(grid.start.r * grid.size + grid.start.c)] ||
      grid.holes[static_cast<size_t>(grid.goal.r * grid.size + grid.goal.c)]) {
    return std::nullopt;
  }
  return grid_bfs(grid.size, grid.start, grid.goal,
                  [&](Cell from, Move m) { return vsp_passable(grid, from, m); });
}

std::optional<ActionSequence> bfs_shortest_path(const core::MazePayload& maze) {
  return grid_bfs(maze.size, maze.start, maze.goal,
                  [&](Cell from, Move m) { return maze_passable(maze, from, m); });
}

double cycle_length(const std::vector<int>& order, const std::vector<Point2>& cities) {
  double total = 0.0;
  const size_t n = order.size();
  for (size_t i = 0; i < n; ++i) {
    const Point2& a = cities[static_cast<size_t>(order[i])];
    const Point2& b = cities[static_cast<size_t>(order[(i + 1) % n])];
    total += std::hypot(a.x - b.x, a.y - b.y);
  }
  return total;
}

Tour held_karp(const std::vector<Point2>& cities, int start) {
  const int n = static_cast<int>(cities.size());
  if (n < 2 || n > 20) throw core::Error("held_karp: city count must be in [2, 20]");
  if (start < 0 || start >= n) throw core::Error("held_karp: start index out of range");

  // Cities other than start, in ascending index order.
  std::vector<int> others;
  others.reserve(static_cast<size_t>(n - 1));
  for (int i = 0; i < n; ++i) {
    if (i != start) others.push_back(i);
  }
  const int m = n - 1;
  std::vector<double> dist(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      dist[static_cast<size_t>(i * n + j)] =
          std::hypot(cities[i].x - cities[j].x, cities[i].y - cities[j].y);
    }
  }

  const size_t masks = size_t{1} << m;
  const double inf = std::numeric_limits<double>::infinity();
  // dp[mask][j]: min cost of a path start -> (others in mask) ending at others[j].
  std::vector<double> dp(masks * static_cast<size_t>(m), inf);
  std::vector<int8_t> prev(masks * static_cast<size_t>(m), -1);
  for (int j = 0; j < m; ++j) {
    dp[(size_t{1} << j) * static_cast<size_t>(m) + static_cast<size_t>(j)] =
        dist[static_cast<size_t>(start * n + others[static_cast<size_t>(j)])];
  }
  for (size_t mask = 1; mask < masks; ++mask) {
    for (int j = 0; j < m; ++j) {
      if (!(mask & (size_t{1} << j))) continue;
      const double base = dp[mask * static_cast<size_t>(m) + static_cast<size_t>(j)];
      if (base == inf) continue;
      const size_t rest = mask;
      for (int k = 0; k < m; ++k) {
        if (rest & (size_t{1} << k)) continue;
        const size_t next_mask = mask | (size_t{1} << k);
        const double cost =
            base + dist[static_cast<size_t>(others[static_cast<size_t>(j)] * n +
                                            others[static_cast<size_t>(k)])];
        double& slot = dp[next_mask * static_cast<size_t>(m) + static_cast<size_t>(k)];
        // Strict improvement only: with ascending j the predecessor of a tied
        // cost stays at the lowest index, keeping reconstruction deterministic.
        if (cost < slot) {
          slot = cost;
          prev[next_mask * static_cast<size_t>(m) + static_cast<size_t>(k)] =
              static_cast<int8_t>(j);
        }
      }
    }
  }
  const size_t full = masks - 1;
  double best = inf;
  int best_end = -1;
  for (int j = 0; j < m; ++j) {
    const double cost = dp[full * static_cast<size_t>(m) + static_cast<size_t>(j)] +
                        dist[static_cast<size_t>(others[static_cast<size_t>(j)] * n + start)];
    if (cost < best) {
      best = cost;
      best_end = j;
    }
  }
  if (best_end < 0) throw core::Error("held_karp: no tour found");

  std::vector<int> order;
  order.reserve(static_cast<size_t>(n));
  size_t mask = full;
  int j = best_end;
  while (j >= 0) {
    order.push_back(others[static_cast<size_t>(j)]);
    const int p = prev[mask * static_cast<size_t>(m) + static_cast<size_t>(j)];
    mask &= ~(size_t{1} << j);
    j = p;
  }
  order.push_back(start);
  std::reverse(order.begin(), order.end());

  // Canonical orientation: the cycle read in either direction has the same
  // length; keep the direction whose city after start has the lower index.
  if (n > 2 && order.back() < order[1]) {
    std::reverse(order.begin() + 1, order.end());
  }
  return Tour{std::move(order)};
}

std::optional<SudokuGrid> solve_sudoku(const std::array<uint8_t, 81>& givens) {
  SudokuState state;
  if (!state.init(givens)) return std::nullopt;
  std::array<uint8_t, 81> first{};
  first[0] = 0xFF;  // sentinel: not yet filled
  if (sudoku_search(state, 1, &first) == 0) return std::nullopt;
  SudokuGrid grid;
  grid.cells = first;
  return grid;
}

int count_sudoku_solutions(const std::array<uint8_t, 81>& givens, int cap) {
  SudokuState state;
  if (!state.init(givens)) return 0;
  return sudoku_search(state, cap, nullptr);
}

bool sudoku_grid_valid(const core::SudokuGrid& grid) {
  std::array<uint16_t, 9> rows{}, cols{}, boxes{};
  for (int i = 0; i < 81; ++i) {
    const uint8_t d = grid.cells[static_cast<size_t>(i)];
    if (d < 1 || d > 9) return false;
    const int r = i / 9, c = i % 9, b = SudokuState::box_of(r, c);
    const uint16_t bit = static_cast<uint16_t>(1u << (d - 1));
    if ((rows[r] & bit) || (cols[c] & bit) || (boxes[b] & bit)) return false;
    rows[r] = static_cast<uint16_t>(rows[r] | bit);
    cols[c] = static_cast<uint16_t>(cols[c] | bit);
    boxes[b] = static_cast<uint16_t>(boxes[b] | bit);
  }
  return true;
}

bool sudoku_respects_givens(const core::SudokuGrid& grid, const std::array<uint8_t, 81>& givens) {
  for (int i = 0; i < 81; ++i) {
    const uint8_t g = givens[static_cast<size_t>(i)];
    if (g != 0 && grid.cells[static_cast<size_t>(i)] != g) return false;
  }
  return true;
}

std::optional<Cell> walk_path(const core::VspPayload& grid, const ActionSequence& moves) {
  return walk_generic(grid.size, grid.start, moves,
                      [&](Cell from, Move m) { return vsp_passable(grid, from, m); });
}

std::optional<Cell> walk_path(const core::MazePayload& maze, const ActionSequence& moves) {
  return walk_generic(maze.size, maze.start, moves,
                      [&](Cell from, Move m) { return maze_passable(maze, from, m); });
}

SymbolicSolution oracle_solution(const TaskInstance& instance) {
  switch (instance.kind) {
    case TaskKind::VspFrozenLake: {
      auto path = bfs_shortest_path(instance.vsp());
      if (!path) throw core::Error("oracle_solution: unreachable goal in " + instance.id);
      return SymbolicSolution{std::move(*path)};
    }
    case TaskKind::Maze: {
      auto path = bfs_shortest_path(instance.maze());
      if (!path) throw core::Error("oracle_solution: unreachable goal in " + instance.id);
      return SymbolicSolution{std::move(*path)};
    }
    case TaskKind::Tsp:
      return SymbolicSolution{held_karp(instance.tsp().cities, instance.tsp().start)};
    case TaskKind::Sudoku: {
      auto grid = solve_sudoku(instance.sudoku().givens);
      if (!grid) throw core::Error("oracle_solution: unsolvable sudoku in " + instance.id);
      return SymbolicSolution{*grid};
    }
    case TaskKind::Jigsaw: {
      const auto& jig = instance.jigsaw();
      const int n = jig.rows * jig.cols;
      Permutation inv;
      inv.slot_to_patch.assign(static_cast<size_t>(n), -1);
      for (int i = 0; i < n; ++i) {
        inv.slot_to_patch[static_cast<size_t>(jig.arrangement[static_cast<size_t>(i)])] = i;
      }
      return SymbolicSolution{std::move(inv)};
    }
  }
  throw core::Error("oracle_solution: unknown task kind");
}

namespace {

std::string cell_str(Cell c) {
  return "(" + std::to_string(c.r) + "," + std::to_string(c.c) + ")";
}

// Any valid walk that ends at the goal counts as correct; optimality is not
// required (the solved-length metric lives in eval, not here).
template <typename Passable>
Verdict verify_plan(Passable passable, int size, Cell start, Cell goal,
                    const ActionSequence& candidate, const ActionSequence& truth,
                    bool blocked_is_hole) {
  Verdict v;
  v.partial_reward = rewards::r_plan(candidate, truth);
  Cell cur = start;
  for (const Move m : candidate.moves) {
    const Cell next = core::step(cur, m);
    if (next.r < 0 || next.r >= size || next.c < 0 || next.c >= size) {
      v.reason = "leaves the grid at " + cell_str(next);
      return v;
    }
    if (!passable(cur, m)) {
      v.reason = blocked_is_hole ? "hole at " + cell_str(next)
                                 : "wall between " + cell_str(cur) + " and " + cell_str(next);
      return v;
    }
    cur = next;
  }
  if (!(cur == goal)) {
    v.reason = "ends at " + cell_str(cur) + ", not the goal";
    return v;
  }
  v.correct = true;
  v.partial_reward = 1.0;
  return v;
}

}  // namespace

Verdict verify_with_truth(const TaskInstance& instance, const SymbolicSolution& candidate,
                          const SymbolicSolution& truth) {
  switch (instance.kind) {
    case TaskKind::VspFrozenLake:
    case TaskKind::Maze: {
      const auto* cand = std::get_if<ActionSequence>(&candidate);
      const auto* gt = std::get_if<ActionSequence>(&truth);
      if (!cand || !gt) throw KindMismatchError("verify: expected an action sequence");
      if (instance.kind == TaskKind::VspFrozenLake) {
        const auto& grid = instance.vsp();
        return verify_plan([&](Cell from, Move m) { return vsp_passable(grid, from, m); },
                           grid.size, grid.start, grid.goal, *cand, *gt, true);
      }
      const auto& maze = instance.maze();
      return verify_plan([&](Cell from, Move m) { return maze_passable(maze, from, m); },
                         maze.size, maze.start, maze.goal, *cand, *gt, false);
    }
    case TaskKind::Tsp: {
      const auto* cand = std::get_if<Tour>(&candidate);
      const auto* gt = std::get_if<Tour>(&truth);
      if (!cand || !gt) throw KindMismatchError("verify: expected a tour");
      const auto& cities = instance.tsp().cities;
      Verdict v;
      v.partial_reward = rewards::r_tsp(*cand, *gt, cities);
      if (cand->order.size() != cities.size()) {
        v.reason = "tour does not visit every city exactly once";
        return v;
      }
      std::vector<uint8_t> seen(cities.size(), 0);
      for (const int i : cand->order) {
        if (i < 0 || static_cast<size_t>(i) >= cities.size() || seen[static_cast<size_t>(i)]) {
          v.reason = "tour does not visit every city exactly once";
          return v;
        }
        seen[static_cast<size_t>(i)] = 1;
      }
      if (cand->order[0] != instance.tsp().start) {
        v.reason = "tour does not start at the start city";
        return v;
      }
      const double gap =
          std::abs(cycle_length(cand->order, cities) - cycle_length(gt->order, cities));
      if (gap >= rewards::kTspLengthTolerance) {
        v.reason = "tour length is not optimal";
        return v;
      }
      v.correct = true;
      v.partial_reward = 1.0;
      return v;
    }
    case TaskKind::Sudoku: {
      const auto* cand = std::get_if<SudokuGrid>(&candidate);
      const auto* gt = std::get_if<SudokuGrid>(&truth);
      if (!cand || !gt) throw KindMismatchError("verify: expected a sudoku grid");
      Verdict v;
      std::vector<uint8_t> digits(cand->cells.begin(), cand->cells.end());
      v.partial_reward = rewards::r_sudoku(digits, *gt);
      if (!sudoku_grid_valid(*cand)) {
        v.reason = "grid violates a row, column, or box constraint";
        return v;
      }
      if (!sudoku_respects_givens(*cand, instance.sudoku().givens)) {
        v.reason = "grid overwrites a given clue";
        return v;
      }
      v.correct = true;
      v.partial_reward = 1.0;
      return v;
    }
    case TaskKind::Jigsaw: {
      const auto* cand = std::get_if<Permutation>(&candidate);
      const auto* gt = std::get_if<Permutation>(&truth);
      if (!cand || !gt) throw KindMismatchError("verify: expected a permutation");
      const int n = instance.jigsaw().rows * instance.jigsaw().cols;
      Verdict v;
      v.partial_reward = rewards::r_jigsaw(*cand, *gt, n);
      if (cand->slot_to_patch != gt->slot_to_patch) {
        v.reason = "permutation does not restore the original image";
        return v;
      }
      v.correct = true;
      v.partial_reward = 1.0;
      return v;
    }
  }
  throw core::Error("verify: unknown task kind");
}

Verdict verify(const TaskInstance& instance, const SymbolicSolution& candidate) {
  return verify_with_truth(instance, candidate, oracle_solution(instance));
}

}  // namespace gridflow::oracle
