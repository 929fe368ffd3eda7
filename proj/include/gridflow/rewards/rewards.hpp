#pragma once

#include <vector>

#include "gridflow/core/types.hpp"

namespace gridflow::rewards {

// Partial-credit reward functions, all in [0, 1]. These are reported as
// evaluation metrics alongside binary accuracy.

// Longest agreeing prefix length over |truth|.
double r_plan(const core::ActionSequence& predicted, const core::ActionSequence& truth);

// 0 if the visited coordinate sets differ, else 0.5 plus 0.5 more when the
// tour lengths match within kTspLengthTolerance.
double r_tsp(const core::Tour& predicted, const core::Tour& truth,
             const std::vector<core::Point2>& cities);

// Element-wise accuracy over the 81 cells, gated on the prediction having
// exactly 81 digits.
double r_sudoku(const std::vector<uint8_t>& predicted_digits, const core::SudokuGrid& truth);

// Fraction of slots assigned the correct patch, gated on |predicted| == n.
double r_jigsaw(const core::Permutation& predicted, const core::Permutation& truth, int n);

// Floating point tolerance for tour-length comparison.
inline constexpr double kTspLengthTolerance = 1e-4;

double tour_length(const core::Tour& tour, const std::vector<core::Point2>& cities);

}  // namespace gridflow::rewards
