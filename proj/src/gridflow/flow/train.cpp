#include "gridflow/flow/train.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "gridflow/core/types.hpp"
#include "gridflow/flow/codec.hpp"
#include "gridflow/flow/schedule.hpp"
#include "gridflow/render/png_io.hpp"
#include "gridflow/render/render.hpp"

namespace gridflow::flow {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr double kLossSmoothing = 0.98;  // for the logged ema_loss column

void adam_step(ParamStore& store, double lr, uint64_t step) {
  const double bias1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step));
  const double bias2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step));
  for (const auto& p : store.all()) {
    for (size_t i = 0; i < p->count(); ++i) {
      const double g = p->grad[i];
      const double m = kAdamBeta1 * p->adam_m[i] + (1.0 - kAdamBeta1) * g;
      const double v = kAdamBeta2 * p->adam_v[i] + (1.0 - kAdamBeta2) * g * g;
      p->adam_m[i] = static_cast<float>(m);
      p->adam_v[i] = static_cast<float>(v);
      const double update = lr * (m / bias1) / (std::sqrt(v / bias2) + kAdamEps);
      p->value[i] = static_cast<float>(p->value[i] - update);
    }
  }
}

void ema_step(ParamStore& store, double decay) {
  for (const auto& p : store.all()) {
    for (size_t i = 0; i < p->count(); ++i) {
      p->ema[i] = static_cast<float>(decay * p->ema[i] + (1.0 - decay) * p->value[i]);
    }
  }
}

// Stable digest of the training RNG position, stored so a checkpoint can be
// audited for which stream produced it.
uint64_t rng_digest(uint64_t seed, uint64_t step) {
  return core::SplitRng::mix(core::SplitRng::hash_label(seed, "train") ^ core::SplitRng::mix(step));
}

}  // namespace

nlohmann::ordered_json train_config_to_json(const TrainConfig& config) {
  return nlohmann::ordered_json{{"batch_size", config.batch_size},
                                {"learning_rate", config.learning_rate},
                                {"steps", config.steps},
                                {"p_uncond", config.p_uncond},
                                {"mu", config.mu},
                                {"sigma", config.sigma},
                                {"ema_decay", config.ema_decay},
                                {"seed", config.seed},
                                {"checkpoint_every", config.checkpoint_every}};
}

TrainConfig train_config_from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object()) throw core::Error("train config must be an object");
  TrainConfig config;
  const nlohmann::ordered_json canonical = train_config_to_json(config);
  for (const auto& [key, _] : j.items()) {
    if (!canonical.contains(key)) throw core::Error("unknown train config key: " + key);
  }
  config.batch_size = j.value("batch_size", config.batch_size);
  config.learning_rate = j.value("learning_rate", config.learning_rate);
  config.steps = j.value("steps", config.steps);
  config.p_uncond = j.value("p_uncond", config.p_uncond);
  config.mu = j.value("mu", config.mu);
  config.sigma = j.value("sigma", config.sigma);
  config.ema_decay = j.value("ema_decay", config.ema_decay);
  config.seed = j.value("seed", config.seed);
  config.checkpoint_every = j.value("checkpoint_every", config.checkpoint_every);
  if (config.batch_size < 1 || config.steps < 1 || config.learning_rate <= 0.0 ||
      config.p_uncond < 0.0 || config.p_uncond >= 1.0 || config.sigma <= 0.0 ||
      config.ema_decay < 0.0 || config.ema_decay >= 1.0) {
    throw core::Error("invalid train config values");
  }
  return config;
}

TrainResult train(const TrainConfig& config, const DenoiserConfig& model_config,
                  const std::vector<core::ManifestRecord>& manifest,
                  const std::filesystem::path& dataset_dir,
                  const std::filesystem::path& out_checkpoint,
                  const std::filesystem::path& log_csv) {
  if (manifest.empty()) throw core::Error("train: manifest is empty");
  if (config.batch_size < 1 || config.steps < 1) throw core::Error("train: invalid config");
  if (config.sigma <= 0.0 || config.p_uncond < 0.0 || config.p_uncond >= 1.0) {
    throw core::Error("train: invalid config");
  }

  // Cache the dataset as 8-bit images; samples are normalized per draw.
  std::vector<core::RasterImage> inputs, targets;
  inputs.reserve(manifest.size());
  targets.reserve(manifest.size());
  for (const core::ManifestRecord& record : manifest) {
    inputs.push_back(render::read_png(dataset_dir / record.input_png_path));
    targets.push_back(render::read_png(dataset_dir / record.target_png_path));
    const core::RasterImage& in = inputs.back();
    const core::RasterImage& tgt = targets.back();
    if (in.width != inputs.front().width || in.height != inputs.front().height ||
        tgt.width != in.width || tgt.height != in.height) {
      throw core::Error("train: dataset images have mixed shapes (" + record.id + ")");
    }
    if (record.kind != manifest.front().kind || !(record.level == manifest.front().level)) {
      throw core::Error("train: dataset mixes task kinds or levels");
    }
  }
  const int height = inputs.front().height;
  const int width = inputs.front().width;
  if (height % 4 != 0 || width % 4 != 0) {
    throw core::Error("train: image sides must be divisible by 4");
  }

  Denoiser model(model_config, config.seed);
  for (const auto& p : model.params().all()) p->ema = p->value;

  nlohmann::ordered_json blob;
  blob["model"] = denoiser_config_to_json(model_config);
  blob["render"] = render::render_spec_to_json(render::RenderSpec{});
  blob["train"] = train_config_to_json(config);
  blob["dataset"] = {{"kind", std::string(core::to_string(manifest.front().kind))},
                     {"level", core::to_string(manifest.front().level)},
                     {"count", manifest.size()},
                     {"height", height},
                     {"width", width}};

  const bool fresh_log = !std::filesystem::exists(log_csv) ||
                         std::filesystem::file_size(log_csv) == 0;
  std::ofstream log(log_csv, std::ios::app);
  if (!log) throw core::Error("train: cannot open log " + log_csv.string());
  if (fresh_log) log << "step,loss,ema_loss\n";

  core::SplitRng rng(config.seed, "train");
  const size_t dim = static_cast<size_t>(3) * height * width;
  const double grad_scale = 2.0 / (static_cast<double>(dim) * config.batch_size);

  TrainResult result;
  double ema_loss = 0.0;
  for (int step = 1; step <= config.steps; ++step) {
    std::vector<size_t> batch(static_cast<size_t>(config.batch_size));
    for (size_t& idx : batch) idx = rng.uniform_int(manifest.size());

    model.params().zero_grads();
    double loss_sum = 0.0;
    for (const size_t idx : batch) {
      const Tensor x0 = encode_image(targets[idx]);
      // Same per-sample draw order as fm_loss: noise, then t, then the coin.
      Tensor x1 = Tensor::zeros(x0.channels, x0.height, x0.width);
      for (float& v : x1.data) v = rng.normal_float();
      const double t = sample_timestep(rng, config.mu, config.sigma);
      const bool drop = rng.bernoulli(config.p_uncond);
      const Condition h =
          drop ? null_condition(3, height, width) : encode_condition(inputs[idx]);

      const Tensor x_t = interpolate(x0, x1, t);
      const Tensor v_target = target_velocity(x0, x1);
      const Tensor v_pred = model.forward_train(x_t, t, h);

      Tensor d_out = Tensor::zeros(v_pred.channels, v_pred.height, v_pred.width);
      for (size_t k = 0; k < v_pred.data.size(); ++k) {
        const double diff = static_cast<double>(v_pred.data[k]) - v_target.data[k];
        loss_sum += diff * diff;
        d_out.data[k] = static_cast<float>(grad_scale * diff);
      }
      model.backward(d_out);
    }
    const double loss = loss_sum / (static_cast<double>(dim) * config.batch_size);
    if (!std::isfinite(loss)) {
      std::ostringstream msg;
      msg << "train: non-finite loss at step " << step << " (loss=" << loss
          << ", lr=" << config.learning_rate << ", batch_size=" << config.batch_size << ")";
      throw core::Error(msg.str());
    }

    adam_step(model.params(), config.learning_rate, static_cast<uint64_t>(step));
    ema_step(model.params(), config.ema_decay);
    ema_loss = (step == 1) ? loss : kLossSmoothing * ema_loss + (1.0 - kLossSmoothing) * loss;

    log << step << ',' << loss << ',' << ema_loss << '\n';
    result.steps = static_cast<uint64_t>(step);
    result.final_loss = loss;
    result.final_ema_loss = ema_loss;

    if (config.checkpoint_every > 0 && step % config.checkpoint_every == 0 &&
        step != config.steps) {
      save_checkpoint(out_checkpoint, model, blob, static_cast<uint64_t>(step),
                      rng_digest(config.seed, static_cast<uint64_t>(step)));
    }
  }
  log.flush();

  save_checkpoint(out_checkpoint, model, blob, result.steps,
                  rng_digest(config.seed, result.steps));
  result.checkpoint_path = out_checkpoint;
  return result;
}

}  // namespace gridflow::flow
