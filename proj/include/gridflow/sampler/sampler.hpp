#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "gridflow/flow/denoiser.hpp"

namespace gridflow::sampler {

struct SampleConfig {
  int steps = 20;         // Euler steps T
  double cfg_scale = 4.0; // guidance weight w; w=1 is single-pass conditional
  uint64_t seed = 0;
  bool record_trajectory = false;
};

struct TrajectoryFrame {
  double t = 0.0;
  core::RasterImage x0_estimate;
};

struct Trajectory {
  std::vector<TrajectoryFrame> frames;  // one per step, t = k/T increasing
};

// Guided velocity v_uncond + w*(v_cond - v_uncond).
flow::Tensor cfg_velocity(const flow::Tensor& v_cond, const flow::Tensor& v_uncond, double w);

// Clean-sample projection from x_t = t*x0 + (1-t)*x1 and v = x0 - x1.
flow::Tensor estimate_x0(const flow::Tensor& x_t, double t, const flow::Tensor& v);

// Integrate dx/dt = v_theta from noise (t=0) to t=1 with T Euler steps.
// Exactly one model evaluation per step when w == 1, two otherwise. Throws
// core::SampleDivergedError if the state ever turns non-finite.
std::pair<flow::Tensor, std::optional<Trajectory>> euler_sample_latent(
    const flow::Denoiser& model, const flow::Condition& condition, const SampleConfig& config);

// Same, decoded to an image.
std::pair<core::RasterImage, std::optional<Trajectory>> euler_sample(
    const flow::Denoiser& model, const flow::Condition& condition, const SampleConfig& config);

// One PNG per frame named step_<k>_t<t>.png plus montage.png (frames side by
// side, width = T * frame width).
void dump_trajectory(const Trajectory& trajectory, const std::filesystem::path& out_dir);

}  // namespace gridflow::sampler
