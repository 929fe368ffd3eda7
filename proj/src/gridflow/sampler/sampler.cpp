#include "gridflow/sampler/sampler.hpp"

#include <cmath>
#include <cstdio>

#include "gridflow/core/types.hpp"
#include "gridflow/flow/codec.hpp"
#include "gridflow/render/png_io.hpp"

namespace gridflow::sampler {

using flow::Condition;
using flow::Tensor;

Tensor cfg_velocity(const Tensor& v_cond, const Tensor& v_uncond, double w) {
  if (!v_cond.same_shape(v_uncond)) throw core::Error("cfg_velocity: shape mismatch");
  if (w == 1.0) return v_cond;  // bit-exact single-branch path
  Tensor out = v_uncond;
  const float wf = static_cast<float>(w);
  for (size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] += wf * (v_cond.data[i] - v_uncond.data[i]);
  }
  return out;
}

Tensor estimate_x0(const Tensor& x_t, double t, const Tensor& v) {
  if (!x_t.same_shape(v)) throw core::Error("estimate_x0: shape mismatch");
  Tensor out = x_t;
  const float rest = static_cast<float>(1.0 - t);
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += rest * v.data[i];
  return out;
}

std::pair<flow::Tensor, std::optional<Trajectory>> euler_sample_latent(
    const flow::Denoiser& model, const Condition& condition, const SampleConfig& config) {
  if (config.steps < 1) throw core::Error("euler_sample: steps must be >= 1");
  const Tensor& cond_tensor = condition.tensor;

  core::SplitRng noise_rng(config.seed, "sample/noise");
  Tensor x = Tensor::zeros(cond_tensor.channels, cond_tensor.height, cond_tensor.width);
  for (float& v : x.data) v = noise_rng.normal_float();

  const Condition null =
      flow::null_condition(cond_tensor.channels, cond_tensor.height, cond_tensor.width);
  const bool guided = config.cfg_scale != 1.0;
  const double dt = 1.0 / config.steps;

  std::optional<Trajectory> trajectory;
  if (config.record_trajectory) trajectory.emplace();

  for (int k = 0; k < config.steps; ++k) {
    const double t = static_cast<double>(k) / config.steps;
    Tensor v_hat = model.forward(x, t, condition);
    if (guided) {
      const Tensor v_uncond = model.forward(x, t, null);
      v_hat = cfg_velocity(v_hat, v_uncond, config.cfg_scale);
    }
    if (trajectory) {
      trajectory->frames.push_back({t, flow::decode_latent(estimate_x0(x, t, v_hat))});
    }
    for (size_t i = 0; i < x.data.size(); ++i) {
      x.data[i] += static_cast<float>(dt) * v_hat.data[i];
    }
    if (!flow::all_finite(x)) {
      throw core::SampleDivergedError("euler_sample: non-finite state at step " +
                                      std::to_string(k));
    }
  }
  return {std::move(x), std::move(trajectory)};
}

std::pair<core::RasterImage, std::optional<Trajectory>> euler_sample(
    const flow::Denoiser& model, const Condition& condition, const SampleConfig& config) {
  auto [latent, trajectory] = euler_sample_latent(model, condition, config);
  return {flow::decode_latent(latent), std::move(trajectory)};
}

void dump_trajectory(const Trajectory& trajectory, const std::filesystem::path& out_dir) {
  if (trajectory.frames.empty()) throw core::Error("dump_trajectory: empty trajectory");
  std::filesystem::create_directories(out_dir);
  const int frame_w = trajectory.frames.front().x0_estimate.width;
  const int frame_h = trajectory.frames.front().x0_estimate.height;
  core::RasterImage montage = core::RasterImage::filled(
      frame_w * static_cast<int>(trajectory.frames.size()), frame_h, {0, 0, 0});
  for (size_t k = 0; k < trajectory.frames.size(); ++k) {
    const TrajectoryFrame& frame = trajectory.frames[k];
    char name[64];
    std::snprintf(name, sizeof(name), "step_%02zu_t%.2f.png", k, frame.t);
    render::write_png(out_dir / name, frame.x0_estimate);
    for (int y = 0; y < frame_h; ++y) {
      for (int x = 0; x < frame_w; ++x) {
        montage.set(static_cast<int>(k) * frame_w + x, y, frame.x0_estimate.get(x, y));
      }
    }
  }
  render::write_png(out_dir / "montage.png", montage);
}

}  // namespace gridflow::sampler
