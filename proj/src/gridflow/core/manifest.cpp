#include "gridflow/core/manifest.hpp"

#include <fstream>
#include <unordered_set>

#include "gridflow/core/serialize.hpp"

namespace gridflow::core {

namespace {

Json record_to_json(const ManifestRecord& record) {
  Json j;
  j["id"] = record.id;
  j["kind"] = std::string(to_string(record.kind));
  j["level"] = to_string(record.level);
  j["seed"] = record.seed;
  j["input_png_path"] = record.input_png_path;
  j["target_png_path"] = record.target_png_path;
  j["solution"] = solution_to_json(record.solution);
  return j;
}

ManifestRecord record_from_json(const Json& j) {
  ManifestRecord record;
  record.id = j.at("id").get<std::string>();
  record.kind = task_kind_from_string(j.at("kind").get<std::string>());
  record.level = level_from_string(j.at("level").get<std::string>());
  record.seed = j.at("seed").get<uint64_t>();
  record.input_png_path = j.at("input_png_path").get<std::string>();
  record.target_png_path = j.at("target_png_path").get<std::string>();
  record.solution = solution_from_json(record.kind, j.at("solution"));
  return record;
}

}  // namespace

void write_manifest(const std::vector<ManifestRecord>& records, const std::filesystem::path& path) {
  if (records.empty()) {
    throw ManifestError("EmptyManifest: refusing to write a manifest with no records");
  }
  std::unordered_set<std::string> seen;
  for (const ManifestRecord& record : records) {
    if (!seen.insert(record.id).second) {
      throw ManifestError("duplicate manifest id: " + record.id);
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw ManifestError("cannot open manifest for writing: " + path.string());
  }
  for (const ManifestRecord& record : records) {
    out << record_to_json(record).dump() << '\n';
  }
  if (!out) {
    throw ManifestError("write failure: " + path.string());
  }
}

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ManifestError("cannot open manifest: " + path.string());
  }
  std::vector<ManifestRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw ManifestError("manifest parse error at line " + std::to_string(line_no), line_no);
    }
    try {
      records.push_back(record_from_json(j));
    } catch (const std::exception& e) {
      throw ManifestError("manifest record error at line " + std::to_string(line_no) + ": " + e.what(),
                          line_no);
    }
  }
  if (records.empty()) {
    throw ManifestError("EmptyManifest: " + path.string());
  }
  return records;
}

}  // namespace gridflow::core
