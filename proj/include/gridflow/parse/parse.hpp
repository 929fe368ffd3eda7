#pragma once

#include <optional>
#include <string>

#include "gridflow/core/types.hpp"
#include "gridflow/render/render.hpp"

namespace gridflow::parse {

// Declared thresholds — the parser's entire tuning surface.
inline constexpr int kInkDistance = 60;             // Euclidean RGB radius per color class
inline constexpr double kCellInkCoverage = 0.25;    // of a cell's central 50% region
inline constexpr int kEdgeSamples = 9;              // probes per potential tour edge
inline constexpr int kEdgeSamplesRequired = 7;      // inked probes for edge presence
inline constexpr int kEdgeEndClearance = 6;         // px excluded around city centers
inline constexpr int kGlyphSlackBits = 10;          // max Hamming distance for a digit
inline constexpr double kJigsawConfidenceMse = 1500.0;  // per pixel-channel

enum class ParseErrorCode {
  NoPath,
  AmbiguousPath,
  OffGrid,
  NotACycle,
  DegreeViolation,
  GivenMismatch,
  IllegibleCell,
};

std::string_view to_string(ParseErrorCode code);

// Total result: either a solution or a typed error, never an exception.
struct ParseResult {
  std::optional<core::SymbolicSolution> solution;
  std::optional<ParseErrorCode> error;
  std::string detail;
  bool low_confidence = false;  // jigsaw assignment cost above threshold

  bool ok() const { return solution.has_value(); }
};

// Pixel is in the solution-ink color class.
bool is_solution_ink(core::Rgb color);

// VSP/Maze: inked cells plus instance start/goal must form a simple path.
ParseResult parse_path(const core::RasterImage& image, const core::TaskInstance& instance,
                       const render::RenderSpec& spec = {});

// TSP: probe every city pair; present edges must form one Hamiltonian cycle.
ParseResult parse_tour(const core::RasterImage& image, const core::TaskInstance& instance,
                       const render::RenderSpec& spec = {});

// Sudoku: template-match every cell; givens must decode to themselves.
ParseResult parse_sudoku(const core::RasterImage& image, const core::TaskInstance& instance,
                         const render::RenderSpec& spec = {});

// Jigsaw: minimum-cost assignment of generated slots to input-mosaic patches.
ParseResult parse_jigsaw(const core::RasterImage& image, const core::TaskInstance& instance,
                         const render::RenderSpec& spec = {});

// Dispatch on instance kind.
ParseResult parse(const core::RasterImage& image, const core::TaskInstance& instance,
                  const render::RenderSpec& spec = {});

}  // namespace gridflow::parse
