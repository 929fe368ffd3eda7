#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>

#include "gridflow/flow/denoiser.hpp"

#include "json.hpp"

namespace gridflow::flow {

inline constexpr char kCheckpointMagic[4] = {'D', 'F', 'T', 'K'};
inline constexpr uint32_t kCheckpointVersion = 1;

// Binary layout: magic, version, step, rng digest, config JSON blob, then
// named float32 little-endian arrays with shape headers (raw weights plus
// "ema."-prefixed shadows). load(save(x)) is the identity.
void save_checkpoint(const std::filesystem::path& path, const Denoiser& model,
                     const nlohmann::ordered_json& config, uint64_t step, uint64_t rng_digest);

struct LoadedCheckpoint {
  std::unique_ptr<Denoiser> model;  // raw weights in value, shadows in ema
  nlohmann::ordered_json config;
  uint64_t step = 0;
  uint64_t rng_digest = 0;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

// Copy EMA shadows over the live weights (the usual inference choice).
void use_ema_weights(Denoiser& model);

}  // namespace gridflow::flow
