#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "gridflow/core/manifest.hpp"
#include "gridflow/flow/train.hpp"
#include "gridflow/sampler/sampler.hpp"

namespace gridflow::eval {

// Produces one candidate solution image per request. Implementations must be
// deterministic in (instance, config.seed) and safe to call concurrently.
class SamplerBackend {
 public:
  virtual ~SamplerBackend() = default;
  virtual core::RasterImage sample(const core::TaskInstance& instance,
                                   const sampler::SampleConfig& config) = 0;
  virtual std::string name() const = 0;
};

// The real model, and the integrity stubs: "oracle" renders the ground truth,
// "blank" renders an empty canvas, "noisy:p" returns the oracle image with
// probability p (per candidate seed) and a blank one otherwise.
std::unique_ptr<SamplerBackend> make_denoiser_backend(const flow::Denoiser& model);
std::unique_ptr<SamplerBackend> make_stub_backend(const std::string& kind);

struct EvalRow {
  core::TaskKind kind = core::TaskKind::VspFrozenLake;
  core::DifficultyLevel level;
  int n = 0;
  double accuracy = 0.0;
  double mean_reward = 0.0;
  double parse_error_rate = 0.0;
  double wall_ms = 0.0;  // mean per sample; excluded from determinism checks
};

struct EvalReport {
  std::vector<EvalRow> rows;
  int steps = 0;
  double cfg_scale = 0.0;
  uint64_t seed = 0;
  std::string sampler_name;
};

// sample -> parse -> verify per manifest record (instances regenerated from
// their seeds), aggregated per (kind, level). Sample k uses seed
// config.seed + k, so reports are deterministic for a fixed config.
EvalReport evaluate(SamplerBackend& backend, const std::vector<core::ManifestRecord>& manifest,
                    const sampler::SampleConfig& config, int jobs = 0);

// CSV: kind,level,n,accuracy,mean_reward,parse_error_rate,wall_ms
void write_report_csv(const EvalReport& report, const std::filesystem::path& path);
std::string format_report(const EvalReport& report);

struct BestOfNResult {
  bool correct = false;
  double reward = 0.0;       // of the returned candidate
  int candidates_used = 0;   // candidates drawn before acceptance (or N)
  bool any_parsed = false;
  std::optional<core::SymbolicSolution> solution;  // best candidate, if any parsed
};

// Draw candidates with seeds config.seed .. config.seed+n-1; accept the first
// one verify reports correct, else keep the highest-partial-reward parse.
BestOfNResult best_of_n(SamplerBackend& backend, const core::TaskInstance& instance,
                        const core::SymbolicSolution& truth, int n,
                        const sampler::SampleConfig& config);

struct StepsAblationRow {
  int steps = 0;
  double accuracy = 0.0;
  double mean_reward = 0.0;
  double wall_ms_total = 0.0;
};

std::vector<StepsAblationRow> ablate_steps(SamplerBackend& backend,
                                           const std::vector<core::ManifestRecord>& manifest,
                                           const sampler::SampleConfig& base,
                                           const std::vector<int>& steps_list, int jobs = 0);

struct CfgAblationRow {
  double cfg_scale = 0.0;
  double accuracy = 0.0;
  double mean_reward = 0.0;
};

// Accuracy per guidance weight plus, per w, a montage of first-step clean-
// sample projections for the leading manifest instances
// (montage_dir/cfg_w<w>.png).
std::vector<CfgAblationRow> ablate_cfg(const flow::Denoiser& model,
                                       const std::vector<core::ManifestRecord>& manifest,
                                       const sampler::SampleConfig& base,
                                       const std::vector<double>& w_list,
                                       const std::filesystem::path& montage_dir, int jobs = 0);

struct DataScaleConfig {
  core::TaskKind kind = core::TaskKind::VspFrozenLake;
  core::DifficultyLevel level;
  std::vector<int> sizes;
  uint64_t train_base_seed = 1000;
  uint64_t test_base_seed = 900000000;  // reserved range, disjoint by construction
  int test_count = 100;
  flow::DenoiserConfig model_config;
  flow::TrainConfig train_config;
  sampler::SampleConfig sample_config;
};

struct DataScaleRow {
  int size = 0;
  double accuracy = 0.0;
  double mean_reward = 0.0;
};

// Generate/train/evaluate per training-set size against one held-out set.
std::vector<DataScaleRow> data_scale_sweep(const DataScaleConfig& config,
                                           const std::filesystem::path& work_dir, int jobs = 0);

void write_steps_csv(const std::vector<StepsAblationRow>& rows, const std::filesystem::path& path);
void write_cfg_csv(const std::vector<CfgAblationRow>& rows, const std::filesystem::path& path);
void write_data_scale_csv(const std::vector<DataScaleRow>& rows, const std::filesystem::path& path);

}  // namespace gridflow::eval
