#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gridflow/core/types.hpp"

namespace gridflow::core {

// One dataset sample: a problem/solution image pair plus its symbolic truth.
// PNG paths are stored relative to the manifest's directory.
struct ManifestRecord {
  std::string id;
  TaskKind kind = TaskKind::VspFrozenLake;
  DifficultyLevel level;
  uint64_t seed = 0;
  std::string input_png_path;
  std::string target_png_path;
  SymbolicSolution solution;

  bool operator==(const ManifestRecord&) const = default;
};

// JSON Lines, one record per line, stable key order.
void write_manifest(const std::vector<ManifestRecord>& records, const std::filesystem::path& path);
std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path);

}  // namespace gridflow::core
