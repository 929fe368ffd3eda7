#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "gridflow/core/manifest.hpp"
#include "gridflow/core/types.hpp"

namespace gridflow::taskgen {

struct GenConfig {
  core::TaskKind kind = core::TaskKind::VspFrozenLake;
  core::DifficultyLevel level;
  int count = 0;
  uint64_t base_seed = 0;
};

using GeneratedInstance = std::pair<core::TaskInstance, core::SymbolicSolution>;

// All generators are pure functions of their arguments; rerunning with the
// same seed reproduces the instance bit-for-bit. Solvability is guaranteed by
// construction or rejection; every output passes oracle::verify as correct.

// Ice grid with ~20% holes, start in the top-left region, BFS-shortest truth.
GeneratedInstance gen_vsp(uint64_t seed, int grid_size);

// Perfect maze via randomized depth-first carving; start/goal at Manhattan
// distance >= grid_size; the unique connecting path is the truth.
GeneratedInstance gen_maze(uint64_t seed, int grid_size);

// Cities uniform in the unit square with pairwise distance >= 0.04, start
// city 0, Held-Karp optimal tour. Instances whose rendered tour would not
// survive the edge-probe parser (grazing chords, occluding cities) are
// rejected and resampled, so the render->parse round trip is exact.
GeneratedInstance gen_tsp(uint64_t seed, int n_cities);

// Full random grid, then clues removed (uniqueness-preserving) down to
// exactly `clues` givens; restarts on dead ends.
GeneratedInstance gen_sudoku(uint64_t seed, int clues);

// Procedural texture cut into rows x cols patches, shuffled by a random
// non-identity permutation; truth is the inverse placement.
GeneratedInstance gen_jigsaw(uint64_t seed, int rows, int cols);

// Dispatch by (kind, level).
GeneratedInstance gen_instance(core::TaskKind kind, core::DifficultyLevel level, uint64_t seed);

// Generates config.count deduplicated instances from sequential seeds starting
// at base_seed (hash collisions consume extra seeds), renders input/target
// PNGs under out_dir/inputs and out_dir/targets, and writes manifest.jsonl.
std::vector<core::ManifestRecord> gen_dataset(const GenConfig& config,
                                              const std::filesystem::path& out_dir,
                                              int jobs = 0);

}  // namespace gridflow::taskgen
