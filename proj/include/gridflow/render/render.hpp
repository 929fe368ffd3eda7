#pragma once

#include <utility>

#include "gridflow/core/serialize.hpp"
#include "gridflow/core/types.hpp"

namespace gridflow::render {

// Fixed palette. Parsers classify pixels by nearest of these colors, so the
// classes must stay far apart (pairwise RGB distance well above 2*tau).
namespace palette {
inline constexpr core::Rgb kBackground{255, 255, 255};
inline constexpr core::Rgb kGridLine{160, 160, 160};
inline constexpr core::Rgb kBlocked{0, 0, 0};  // holes, maze walls
inline constexpr core::Rgb kStart{255, 200, 0};
inline constexpr core::Rgb kGoal{0, 90, 220};  // also city disks
inline constexpr core::Rgb kSolutionInk{220, 30, 30};
inline constexpr core::Rgb kClueInk{0, 0, 0};
}  // namespace palette

// All geometry constants in one place. Every field is in pixels.
struct RenderSpec {
  int cell_px = 16;            // grid-cell side (VSP, Maze, Sudoku)
  int marker_radius_px = 6;    // start/goal disks on cell grids
  int path_halfwidth_px = 2;   // VSP/Maze solution stroke half-width
  int wall_px = 2;             // maze wall stroke width
  int tsp_canvas_px = 256;
  int tsp_margin_px = 8;
  int city_radius_px = 4;
  int tour_halfwidth_px = 1;   // TSP solution stroke half-width
  int sudoku_glyph_scale = 2;  // 5x7 glyphs scaled to 10x14 in a 16px cell
  int patch_px = 48;           // jigsaw patch side
  int label_box_px = 12;       // jigsaw corner label box side

  bool operator==(const RenderSpec&) const = default;
};

core::Json render_spec_to_json(const RenderSpec& spec);
RenderSpec render_spec_from_json(const core::Json& j);

// (width, height) of both the input and target image for an instance.
std::pair<int, int> image_size(const core::TaskInstance& instance, const RenderSpec& spec);

// Center pixel of a grid cell.
inline std::pair<int, int> cell_center(core::Cell cell, const RenderSpec& spec) {
  return {cell.c * spec.cell_px + spec.cell_px / 2, cell.r * spec.cell_px + spec.cell_px / 2};
}

// Unit-square TSP coordinate -> canvas pixel.
std::pair<int, int> tsp_point_px(const core::Point2& point, const RenderSpec& spec);

// The uncut source texture a jigsaw instance was built from.
core::RasterImage jigsaw_texture(const core::JigsawPayload& payload, const RenderSpec& spec);

// Problem image x.
core::RasterImage render_instance(const core::TaskInstance& instance, const RenderSpec& spec = {});

// Solution image y: the problem image overlaid with the solution. Throws
// core::RenderRefusedError when the solution is structurally unrenderable
// (illegal walk, non-permutation tour/placement, digits clashing with givens).
core::RasterImage render_solution(const core::TaskInstance& instance,
                                  const core::SymbolicSolution& solution,
                                  const RenderSpec& spec = {});

}  // namespace gridflow::render
