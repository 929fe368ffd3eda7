#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <string>

#include "gridflow/core/rng.hpp"
#include "gridflow/flow/layers.hpp"
#include "gridflow/flow/tensor.hpp"

#include "json.hpp"

namespace gridflow::flow {

// Architecture hyperparameters. Three resolution levels with widths
// {base, 2*base, 4*base}; images must be divisible by 4 (all render sizes
// are multiples of 16).
struct DenoiserConfig {
  int base_width = 16;
  int time_dim = 128;
  int groups = 8;
  int in_channels = 6;  // noisy latent (3) + condition image (3)
  int out_channels = 3;

  bool operator==(const DenoiserConfig&) const = default;
};

nlohmann::ordered_json denoiser_config_to_json(const DenoiserConfig& config);
DenoiserConfig denoiser_config_from_json(const nlohmann::ordered_json& j);

// Conditional velocity field v_theta(x_t, t, h): convolutional encoder-decoder
// with additive skip connections and time-modulated residual blocks.
class Denoiser {
 public:
  explicit Denoiser(const DenoiserConfig& config, uint64_t init_seed = 0);

  // Velocity prediction; deterministic in (parameters, inputs).
  Tensor forward(const Tensor& x_t, double t, const Condition& condition) const;

  // Forward that retains activations, then backward accumulating parameter
  // gradients. d_out is dLoss/d(prediction). Single-threaded use only.
  Tensor forward_train(const Tensor& x_t, double t, const Condition& condition);
  void backward(const Tensor& d_out);

  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }
  const DenoiserConfig& config() const { return config_; }

  // Instrumentation: evaluations since the last reset (sampling cost checks).
  uint64_t forward_calls() const { return forward_calls_.load(std::memory_order_relaxed); }
  void reset_forward_calls() const { forward_calls_.store(0, std::memory_order_relaxed); }

 private:
  Denoiser(const DenoiserConfig& config, core::SplitRng init_rng);

  Tensor run(const Tensor& x_t, double t, const Condition& condition, bool keep);

  DenoiserConfig config_;
  ParamStore store_;

  Linear time_fc1_;
  Linear time_fc2_;
  Conv2d conv_in_;
  ResBlock res_down0_;
  Conv2d down1_;
  ResBlock res_down1_;
  Conv2d down2_;
  ResBlock res_mid_;
  Conv2d up_conv1_;
  ResBlock res_up1_;
  Conv2d up_conv0_;
  ResBlock res_up0_;
  GroupNorm out_norm_;
  SiLU out_act_;
  Conv2d conv_out_;

  SiLU time_act_;
  mutable std::atomic<uint64_t> forward_calls_{0};
};

// Per-sample velocity model used by the loss: sample_index lets test oracles
// reconstruct the exact target. Real training binds Denoiser::forward_train.
using VelocityFn =
    std::function<Tensor(size_t sample_index, const Tensor& x_t, double t, const Condition& h)>;

struct FlowSample {
  Tensor x0;
  Condition condition;
};

// Monte Carlo flow-matching loss: per sample draw x1 ~ N(0,I) and a
// logit-normal t, drop the condition with probability p_uncond, and average
// the squared error between the predicted and target velocity over all
// elements and samples.
double fm_loss(const VelocityFn& model, const std::vector<FlowSample>& batch, core::SplitRng& rng,
               double p_uncond, double mu, double sigma);

}  // namespace gridflow::flow
