#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "gridflow/rewards/rewards.hpp"

using namespace gridflow;
using core::ActionSequence;
using core::Permutation;
using core::Point2;
using core::SudokuGrid;
using core::Tour;

TEST_CASE("plan reward is the agreeing prefix over truth length") {
  const auto truth = ActionSequence::from_letters("DDRRUU");
  CHECK(rewards::r_plan(truth, truth) == doctest::Approx(1.0));
  CHECK(rewards::r_plan(ActionSequence::from_letters("DDRL"), truth) == doctest::Approx(3.0 / 6.0));
  CHECK(rewards::r_plan(ActionSequence::from_letters("UD"), truth) == doctest::Approx(0.0));
  CHECK(rewards::r_plan(ActionSequence{}, truth) == doctest::Approx(0.0));
  // A longer prediction that starts with the full truth earns 1.
  CHECK(rewards::r_plan(ActionSequence::from_letters("DDRRUUL"), truth) == doctest::Approx(1.0));
  // A shorter fully agreeing prefix is scored against |truth|.
  CHECK(rewards::r_plan(ActionSequence::from_letters("DDR"), truth) == doctest::Approx(0.5));
  CHECK_THROWS_AS(rewards::r_plan(truth, ActionSequence{}), core::Error);
}

TEST_CASE("tsp reward gates on the visited set, then on length") {
  const std::vector<Point2> cities{{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
  const Tour square{{0, 1, 2, 3}};
  CHECK(rewards::tour_length(square, cities) == doctest::Approx(4.0));

  // Same cycle traversed backwards: same set, same length.
  CHECK(rewards::r_tsp(Tour{{0, 3, 2, 1}}, square, cities) == doctest::Approx(1.0));
  // Same set, longer (crossing) cycle: set credit only.
  CHECK(rewards::r_tsp(Tour{{0, 2, 1, 3}}, square, cities) == doctest::Approx(0.5));
  // Missing a city: zero.
  CHECK(rewards::r_tsp(Tour{{0, 1, 2}}, square, cities) == doctest::Approx(0.0));
  // Repeating a city: zero even though the set of visited indices matches.
  CHECK(rewards::r_tsp(Tour{{0, 1, 2, 3, 0}}, square, cities) == doctest::Approx(0.0));
  CHECK_THROWS_AS(rewards::r_tsp(Tour{{0, 9, 2, 3}}, square, cities), core::Error);
}

TEST_CASE("tsp length gate is strict at the tolerance") {
  // Two cities twice: degenerate but exercises the exact threshold.
  const double eps = rewards::kTspLengthTolerance;
  const std::vector<Point2> cities{{0.0, 0.0}, {1.0, 0.0}, {0.5, 0.5}, {0.5 + eps / 2.0, 0.5}};
  const Tour truth{{0, 1, 2, 3}};
  const Tour alt{{0, 1, 3, 2}};
  const double gap = std::abs(rewards::tour_length(alt, cities) - rewards::tour_length(truth, cities));
  const double expect = gap < eps ? 1.0 : 0.5;
  CHECK(rewards::r_tsp(alt, truth, cities) == doctest::Approx(expect));
  // Identical tours always clear the gate.
  CHECK(rewards::r_tsp(truth, truth, cities) == doctest::Approx(1.0));
}

TEST_CASE("sudoku reward is mean cell agreement gated on 81 digits") {
  SudokuGrid truth;
  for (int i = 0; i < 81; ++i) truth.cells[static_cast<size_t>(i)] = static_cast<uint8_t>(i % 9 + 1);
  std::vector<uint8_t> pred(truth.cells.begin(), truth.cells.end());
  CHECK(rewards::r_sudoku(pred, truth) == doctest::Approx(1.0));
  pred[0] = static_cast<uint8_t>(pred[0] % 9 + 1);
  pred[40] = static_cast<uint8_t>(pred[40] % 9 + 1);
  CHECK(rewards::r_sudoku(pred, truth) == doctest::Approx(79.0 / 81.0));
  pred.pop_back();
  CHECK(rewards::r_sudoku(pred, truth) == doctest::Approx(0.0));
}

TEST_CASE("jigsaw reward is mean slot agreement gated on size") {
  const Permutation truth{{2, 0, 3, 1}};
  CHECK(rewards::r_jigsaw(truth, truth, 4) == doctest::Approx(1.0));
  CHECK(rewards::r_jigsaw(Permutation{{2, 0, 1, 3}}, truth, 4) == doctest::Approx(0.5));
  CHECK(rewards::r_jigsaw(Permutation{{2, 0, 3}}, truth, 4) == doctest::Approx(0.0));
  CHECK(rewards::r_jigsaw(Permutation{{2, 1, 0, 3}}, truth, 4) == doctest::Approx(0.25));
  CHECK_THROWS_AS(rewards::r_jigsaw(truth, truth, 1), core::Error);
}
