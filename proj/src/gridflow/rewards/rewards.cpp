#include "gridflow/rewards/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace gridflow::rewards {

using core::ActionSequence;
using core::Permutation;
using core::Point2;
using core::SudokuGrid;
using core::Tour;

double tour_length(const Tour& tour, const std::vector<Point2>& cities) {
  double total = 0.0;
  const size_t n = tour.order.size();
  for (size_t i = 0; i < n; ++i) {
    const Point2& a = cities[static_cast<size_t>(tour.order[i])];
    const Point2& b = cities[static_cast<size_t>(tour.order[(i + 1) % n])];
    total += std::hypot(a.x - b.x, a.y - b.y);
  }
  return total;
}

double r_plan(const ActionSequence& predicted, const ActionSequence& truth) {
  if (truth.moves.empty()) {
    throw core::Error("r_plan: ground truth sequence is empty");
  }
  const size_t limit = std::min(predicted.moves.size(), truth.moves.size());
  size_t k = 0;
  while (k < limit && predicted.moves[k] == truth.moves[k]) ++k;
  return static_cast<double>(k) / static_cast<double>(truth.moves.size());
}

double r_tsp(const Tour& predicted, const Tour& truth, const std::vector<Point2>& cities) {
  const auto index_ok = [&](int i) { return i >= 0 && static_cast<size_t>(i) < cities.size(); };
  for (const int i : predicted.order) {
    if (!index_ok(i)) throw core::Error("r_tsp: predicted city index out of range");
  }
  for (const int i : truth.order) {
    if (!index_ok(i)) throw core::Error("r_tsp: truth city index out of range");
  }
  // Visited coordinate sets; indices are unique handles onto exact coordinates.
  const std::set<int> pred_set(predicted.order.begin(), predicted.order.end());
  const std::set<int> truth_set(truth.order.begin(), truth.order.end());
  if (pred_set != truth_set || pred_set.size() != predicted.order.size()) {
    return 0.0;
  }
  const double dl = std::abs(tour_length(predicted, cities) - tour_length(truth, cities));
  return 0.5 * (1.0 + (dl < kTspLengthTolerance ? 1.0 : 0.0));
}

double r_sudoku(const std::vector<uint8_t>& predicted_digits, const SudokuGrid& truth) {
  if (predicted_digits.size() != 81) return 0.0;
  int hits = 0;
  for (size_t i = 0; i < 81; ++i) {
    if (predicted_digits[i] == truth.cells[i]) ++hits;
  }
  return static_cast<double>(hits) / 81.0;
}

double r_jigsaw(const Permutation& predicted, const Permutation& truth, int n) {
  if (n < 2) throw core::Error("r_jigsaw: n must be >= 2");
  if (predicted.slot_to_patch.size() != static_cast<size_t>(n) ||
      truth.slot_to_patch.size() != static_cast<size_t>(n)) {
    return 0.0;
  }
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    if (predicted.slot_to_patch[static_cast<size_t>(i)] == truth.slot_to_patch[static_cast<size_t>(i)]) {
      ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

}  // namespace gridflow::rewards
