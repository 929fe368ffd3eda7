#include "gridflow/flow/denoiser.hpp"

#include <cmath>

#include "gridflow/core/types.hpp"
#include "gridflow/flow/codec.hpp"
#include "gridflow/flow/schedule.hpp"

namespace gridflow::flow {

namespace {

Tensor wrap_vec(const std::vector<float>& v) {
  Tensor t = Tensor::zeros(static_cast<int>(v.size()), 1, 1);
  t.data = v;
  return t;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  Tensor out = Tensor::zeros(a.channels + b.channels, a.height, a.width);
  std::copy(a.data.begin(), a.data.end(), out.data.begin());
  std::copy(b.data.begin(), b.data.end(), out.data.begin() + static_cast<ptrdiff_t>(a.data.size()));
  return out;
}

void add_inplace(Tensor& a, const Tensor& b) {
  for (size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
}

}  // namespace

nlohmann::ordered_json denoiser_config_to_json(const DenoiserConfig& config) {
  return nlohmann::ordered_json{{"base_width", config.base_width},
                                {"time_dim", config.time_dim},
                                {"groups", config.groups},
                                {"in_channels", config.in_channels},
                                {"out_channels", config.out_channels}};
}

DenoiserConfig denoiser_config_from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object()) throw core::Error("model config must be an object");
  static const std::vector<std::string> known = {"base_width", "time_dim", "groups", "in_channels",
                                                "out_channels"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw core::Error("unknown model config key: " + key);
    }
  }
  DenoiserConfig config;
  config.base_width = j.value("base_width", config.base_width);
  config.time_dim = j.value("time_dim", config.time_dim);
  config.groups = j.value("groups", config.groups);
  config.in_channels = j.value("in_channels", config.in_channels);
  config.out_channels = j.value("out_channels", config.out_channels);
  if (config.base_width < config.groups || config.time_dim < 2 || config.groups < 1) {
    throw core::Error("invalid model config values");
  }
  return config;
}

Denoiser::Denoiser(const DenoiserConfig& config, uint64_t init_seed)
    : Denoiser(config, core::SplitRng(init_seed, "init")) {}

Denoiser::Denoiser(const DenoiserConfig& config, core::SplitRng init_rng)
    : config_(config),
      time_fc1_(store_, "time_fc1", config.time_dim, config.time_dim, init_rng),
      time_fc2_(store_, "time_fc2", config.time_dim, config.time_dim, init_rng),
      conv_in_(store_, "conv_in", config.in_channels, config.base_width, 1, false, init_rng),
      res_down0_(store_, "res_down0", config.base_width, config.time_dim, config.groups, init_rng),
      down1_(store_, "down1", config.base_width, 2 * config.base_width, 2, false, init_rng),
      res_down1_(store_, "res_down1", 2 * config.base_width, config.time_dim, config.groups,
                 init_rng),
      down2_(store_, "down2", 2 * config.base_width, 4 * config.base_width, 2, false, init_rng),
      res_mid_(store_, "res_mid", 4 * config.base_width, config.time_dim, config.groups, init_rng),
      up_conv1_(store_, "up_conv1", 4 * config.base_width, 2 * config.base_width, 1, false,
                init_rng),
      res_up1_(store_, "res_up1", 2 * config.base_width, config.time_dim, config.groups, init_rng),
      up_conv0_(store_, "up_conv0", 2 * config.base_width, config.base_width, 1, false, init_rng),
      res_up0_(store_, "res_up0", config.base_width, config.time_dim, config.groups, init_rng),
      out_norm_(store_, "out_norm", config.base_width, config.groups),
      conv_out_(store_, "conv_out", config.base_width, config.out_channels, 1, true, init_rng) {}

Tensor Denoiser::forward(const Tensor& x_t, double t, const Condition& condition) const {
  // keep=false touches no member state besides the call counter.
  return const_cast<Denoiser*>(this)->run(x_t, t, condition, false);
}

Tensor Denoiser::forward_train(const Tensor& x_t, double t, const Condition& condition) {
  return run(x_t, t, condition, true);
}

Tensor Denoiser::run(const Tensor& x_t, double t, const Condition& condition, bool keep) {
  if (x_t.channels != config_.out_channels) throw core::Error("denoiser: latent channel mismatch");
  if (!x_t.same_shape(condition.tensor)) throw core::Error("denoiser: condition shape mismatch");
  if (x_t.height % 4 != 0 || x_t.width % 4 != 0) {
    throw core::Error("denoiser: image sides must be divisible by 4");
  }
  forward_calls_.fetch_add(1, std::memory_order_relaxed);

  std::vector<float> temb = time_fc1_.forward(time_embedding(t, config_.time_dim), keep);
  temb = time_fc2_.forward(time_act_.forward(wrap_vec(temb), keep).data, keep);

  Tensor a0 = res_down0_.forward(conv_in_.forward(concat_channels(x_t, condition.tensor), keep),
                                 temb, keep);
  Tensor a1 = res_down1_.forward(down1_.forward(a0, keep), temb, keep);
  Tensor mid = res_mid_.forward(down2_.forward(a1, keep), temb, keep);

  Tensor u1 = up_conv1_.forward(upsample2(mid), keep);
  add_inplace(u1, a1);
  u1 = res_up1_.forward(u1, temb, keep);

  Tensor u0 = up_conv0_.forward(upsample2(u1), keep);
  add_inplace(u0, a0);
  u0 = res_up0_.forward(u0, temb, keep);

  return conv_out_.forward(out_act_.forward(out_norm_.forward(u0, keep), keep), keep);
}

void Denoiser::backward(const Tensor& d_out) {
  std::vector<float> dtemb(static_cast<size_t>(config_.time_dim), 0.0f);

  Tensor d_u0 = out_norm_.backward(out_act_.backward(conv_out_.backward(d_out)));
  Tensor d_u0_in = res_up0_.backward(d_u0, dtemb);
  Tensor d_a0 = d_u0_in;  // additive skip
  Tensor d_u1 = upsample2_backward(up_conv0_.backward(d_u0_in));

  Tensor d_u1_in = res_up1_.backward(d_u1, dtemb);
  Tensor d_a1 = d_u1_in;  // additive skip
  Tensor d_mid = upsample2_backward(up_conv1_.backward(d_u1_in));

  add_inplace(d_a1, down2_.backward(res_mid_.backward(d_mid, dtemb)));
  add_inplace(d_a0, down1_.backward(res_down1_.backward(d_a1, dtemb)));
  conv_in_.backward(res_down0_.backward(d_a0, dtemb));

  time_fc1_.backward(time_act_.backward(wrap_vec(time_fc2_.backward(dtemb))).data);
}

double fm_loss(const VelocityFn& model, const std::vector<FlowSample>& batch, core::SplitRng& rng,
               double p_uncond, double mu, double sigma) {
  if (batch.empty()) throw core::Error("fm_loss: empty batch");
  double total_sq = 0.0;
  size_t total_count = 0;
  for (size_t i = 0; i < batch.size(); ++i) {
    const FlowSample& sample = batch[i];
    // Fixed per-sample draw order: noise elements, then t, then the dropout coin.
    Tensor x1 = Tensor::zeros(sample.x0.channels, sample.x0.height, sample.x0.width);
    for (float& v : x1.data) v = rng.normal_float();
    const double t = sample_timestep(rng, mu, sigma);
    const bool drop = rng.bernoulli(p_uncond);
    const Condition h = drop ? null_condition(sample.condition.tensor.channels,
                                              sample.condition.tensor.height,
                                              sample.condition.tensor.width)
                             : sample.condition;
    const Tensor x_t = interpolate(sample.x0, x1, t);
    const Tensor v_target = target_velocity(sample.x0, x1);
    const Tensor v_pred = model(i, x_t, t, h);
    if (!v_pred.same_shape(v_target)) throw core::Error("fm_loss: prediction shape mismatch");
    for (size_t k = 0; k < v_pred.data.size(); ++k) {
      const double d = static_cast<double>(v_pred.data[k]) - v_target.data[k];
      total_sq += d * d;
    }
    total_count += v_pred.data.size();
  }
  return total_sq / static_cast<double>(total_count);
}

}  // namespace gridflow::flow
