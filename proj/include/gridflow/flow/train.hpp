#pragma once

#include <filesystem>
#include <vector>

#include "gridflow/core/manifest.hpp"
#include "gridflow/flow/checkpoint.hpp"
#include "gridflow/flow/denoiser.hpp"

namespace gridflow::flow {

struct TrainConfig {
  int batch_size = 8;
  double learning_rate = 1e-4;
  int steps = 1000;
  double p_uncond = 0.1;  // condition-dropout probability
  double mu = 0.0;        // logit-normal timestep location
  double sigma = 1.0;     // logit-normal timestep scale
  double ema_decay = 0.999;
  uint64_t seed = 0;
  int checkpoint_every = 500;

  bool operator==(const TrainConfig&) const = default;
};

nlohmann::ordered_json train_config_to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::ordered_json& j);

struct TrainResult {
  uint64_t steps = 0;
  double final_loss = 0.0;
  double final_ema_loss = 0.0;
  std::filesystem::path checkpoint_path;
};

// Adam on the flow-matching loss with EMA shadow weights. Loads the dataset's
// target PNGs as x0 and input PNGs as conditions, runs config.steps updates on
// a single thread (bit-reproducible for a fixed seed), appends
// `step,loss,ema_loss` lines to log_csv, checkpoints periodically and at the
// end. Throws on an empty manifest, mixed image shapes, or a non-finite loss.
TrainResult train(const TrainConfig& config, const DenoiserConfig& model_config,
                  const std::vector<core::ManifestRecord>& manifest,
                  const std::filesystem::path& dataset_dir,
                  const std::filesystem::path& out_checkpoint,
                  const std::filesystem::path& log_csv);

}  // namespace gridflow::flow
