#include "gridflow/eval/eval.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "gridflow/core/parallel.hpp"
#include "gridflow/flow/codec.hpp"
#include "gridflow/oracle/oracle.hpp"
#include "gridflow/parse/parse.hpp"
#include "gridflow/render/png_io.hpp"
#include "gridflow/render/render.hpp"
#include "gridflow/taskgen/taskgen.hpp"

namespace gridflow::eval {

namespace {

using Clock = std::chrono::steady_clock;

double ms_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

class DenoiserBackend : public SamplerBackend {
 public:
  explicit DenoiserBackend(const flow::Denoiser& model) : model_(model) {}

  core::RasterImage sample(const core::TaskInstance& instance,
                           const sampler::SampleConfig& config) override {
    const flow::Condition condition = flow::encode_condition(render::render_instance(instance));
    return sampler::euler_sample(model_, condition, config).first;
  }

  std::string name() const override { return "denoiser"; }

 private:
  const flow::Denoiser& model_;
};

class OracleBackend : public SamplerBackend {
 public:
  core::RasterImage sample(const core::TaskInstance& instance,
                           const sampler::SampleConfig&) override {
    return render::render_solution(instance, oracle::oracle_solution(instance));
  }

  std::string name() const override { return "oracle"; }
};

class BlankBackend : public SamplerBackend {
 public:
  core::RasterImage sample(const core::TaskInstance& instance,
                           const sampler::SampleConfig&) override {
    const auto [w, h] = render::image_size(instance, render::RenderSpec{});
    return core::RasterImage::filled(w, h, render::palette::kBackground);
  }

  std::string name() const override { return "blank"; }
};

class NoisyBackend : public SamplerBackend {
 public:
  explicit NoisyBackend(double p) : p_(p) {}

  core::RasterImage sample(const core::TaskInstance& instance,
                           const sampler::SampleConfig& config) override {
    core::SplitRng rng(instance.seed ^ core::SplitRng::mix(config.seed), "stub/noisy");
    if (rng.bernoulli(p_)) return OracleBackend{}.sample(instance, config);
    return BlankBackend{}.sample(instance, config);
  }

  std::string name() const override {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "noisy:%g", p_);
    return buf;
  }

 private:
  double p_;
};

struct SampleOutcome {
  bool parsed = false;
  bool correct = false;
  double reward = 0.0;
  double wall_ms = 0.0;
};

SampleOutcome run_one(SamplerBackend& backend, const core::ManifestRecord& record,
                      const sampler::SampleConfig& config) {
  const auto [instance, truth] = taskgen::gen_instance(record.kind, record.level, record.seed);
  const auto t0 = Clock::now();
  const core::RasterImage image = backend.sample(instance, config);
  const auto t1 = Clock::now();

  SampleOutcome outcome;
  outcome.wall_ms = ms_between(t0, t1);
  const parse::ParseResult parsed = parse::parse(image, instance);
  if (!parsed.ok()) return outcome;
  outcome.parsed = true;
  const oracle::Verdict verdict = oracle::verify_with_truth(instance, *parsed.solution, truth);
  outcome.correct = verdict.correct;
  outcome.reward = verdict.correct ? 1.0 : verdict.partial_reward;
  return outcome;
}

}  // namespace

std::unique_ptr<SamplerBackend> make_denoiser_backend(const flow::Denoiser& model) {
  return std::make_unique<DenoiserBackend>(model);
}

std::unique_ptr<SamplerBackend> make_stub_backend(const std::string& kind) {
  if (kind == "oracle") return std::make_unique<OracleBackend>();
  if (kind == "blank") return std::make_unique<BlankBackend>();
  if (kind.rfind("noisy:", 0) == 0) {
    double p = 0.0;
    try {
      p = std::stod(kind.substr(6));
    } catch (const std::exception&) {
      throw core::Error("bad stub spec: " + kind);
    }
    if (p < 0.0 || p > 1.0) throw core::Error("stub probability out of [0,1]: " + kind);
    return std::make_unique<NoisyBackend>(p);
  }
  throw core::Error("unknown stub backend: " + kind);
}

EvalReport evaluate(SamplerBackend& backend, const std::vector<core::ManifestRecord>& manifest,
                    const sampler::SampleConfig& config, int jobs) {
  if (manifest.empty()) throw core::Error("evaluate: manifest is empty");
  const int workers = jobs > 0 ? jobs : core::default_jobs();

  std::vector<SampleOutcome> outcomes(manifest.size());
  core::parallel_for(manifest.size(), workers, [&](size_t k) {
    sampler::SampleConfig sample_config = config;
    sample_config.seed = config.seed + k;
    outcomes[k] = run_one(backend, manifest[k], sample_config);
  });

  // Aggregate per (kind, level) in first-appearance order.
  std::vector<std::pair<core::TaskKind, core::DifficultyLevel>> groups;
  std::vector<std::vector<size_t>> members;
  for (size_t k = 0; k < manifest.size(); ++k) {
    const std::pair<core::TaskKind, core::DifficultyLevel> key{manifest[k].kind,
                                                               manifest[k].level};
    size_t g = 0;
    while (g < groups.size() && !(groups[g] == key)) ++g;
    if (g == groups.size()) {
      groups.push_back(key);
      members.emplace_back();
    }
    members[g].push_back(k);
  }

  EvalReport report;
  report.steps = config.steps;
  report.cfg_scale = config.cfg_scale;
  report.seed = config.seed;
  report.sampler_name = backend.name();
  for (size_t g = 0; g < groups.size(); ++g) {
    EvalRow row;
    row.kind = groups[g].first;
    row.level = groups[g].second;
    row.n = static_cast<int>(members[g].size());
    for (const size_t k : members[g]) {
      row.accuracy += outcomes[k].correct ? 1.0 : 0.0;
      row.mean_reward += outcomes[k].reward;
      row.parse_error_rate += outcomes[k].parsed ? 0.0 : 1.0;
      row.wall_ms += outcomes[k].wall_ms;
    }
    row.accuracy /= row.n;
    row.mean_reward /= row.n;
    row.parse_error_rate /= row.n;
    row.wall_ms /= row.n;
    report.rows.push_back(row);
  }
  return report;
}

void write_report_csv(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw core::Error("cannot write report: " + path.string());
  out << "kind,level,n,accuracy,mean_reward,parse_error_rate,wall_ms\n";
  for (const EvalRow& row : report.rows) {
    out << core::to_string(row.kind) << ',' << core::to_string(row.level) << ',' << row.n << ','
        << row.accuracy << ',' << row.mean_reward << ',' << row.parse_error_rate << ','
        << row.wall_ms << '\n';
  }
}

std::string format_report(const EvalReport& report) {
  std::ostringstream out;
  out << "sampler=" << report.sampler_name << " steps=" << report.steps
      << " cfg=" << report.cfg_scale << " seed=" << report.seed << '\n';
  char line[160];
  std::snprintf(line, sizeof(line), "%-8s %-6s %6s %10s %12s %12s %10s\n", "kind", "level", "n",
                "accuracy", "mean_reward", "parse_err", "wall_ms");
  out << line;
  for (const EvalRow& row : report.rows) {
    std::snprintf(line, sizeof(line), "%-8s %-6s %6d %10.3f %12.3f %12.3f %10.1f\n",
                  std::string(core::to_string(row.kind)).c_str(),
                  core::to_string(row.level).c_str(), row.n, row.accuracy, row.mean_reward,
                  row.parse_error_rate, row.wall_ms);
    out << line;
  }
  return out.str();
}

BestOfNResult best_of_n(SamplerBackend& backend, const core::TaskInstance& instance,
                        const core::SymbolicSolution& truth, int n,
                        const sampler::SampleConfig& config) {
  if (n < 1) throw core::Error("best_of_n: n must be >= 1");
  BestOfNResult best;
  for (int k = 0; k < n; ++k) {
    sampler::SampleConfig candidate_config = config;
    candidate_config.seed = config.seed + static_cast<uint64_t>(k);
    const core::RasterImage image = backend.sample(instance, candidate_config);
    const parse::ParseResult parsed = parse::parse(image, instance);
    if (!parsed.ok()) continue;
    const oracle::Verdict verdict = oracle::verify_with_truth(instance, *parsed.solution, truth);
    const double reward = verdict.correct ? 1.0 : verdict.partial_reward;
    if (verdict.correct) {
      best.correct = true;
      best.reward = reward;
      best.candidates_used = k + 1;
      best.any_parsed = true;
      best.solution = *parsed.solution;
      return best;
    }
    if (!best.any_parsed || reward > best.reward) {
      best.reward = reward;
      best.solution = *parsed.solution;
    }
    best.any_parsed = true;
  }
  best.candidates_used = n;
  return best;
}

std::vector<StepsAblationRow> ablate_steps(SamplerBackend& backend,
                                           const std::vector<core::ManifestRecord>& manifest,
                                           const sampler::SampleConfig& base,
                                           const std::vector<int>& steps_list, int jobs) {
  std::vector<StepsAblationRow> rows;
  for (const int steps : steps_list) {
    sampler::SampleConfig config = base;
    config.steps = steps;
    const auto t0 = Clock::now();
    const EvalReport report = evaluate(backend, manifest, config, jobs);
    const auto t1 = Clock::now();
    StepsAblationRow row;
    row.steps = steps;
    row.wall_ms_total = ms_between(t0, t1);
    int total = 0;
    for (const EvalRow& r : report.rows) {
      row.accuracy += r.accuracy * r.n;
      row.mean_reward += r.mean_reward * r.n;
      total += r.n;
    }
    row.accuracy /= total;
    row.mean_reward /= total;
    rows.push_back(row);
  }
  return rows;
}

std::vector<CfgAblationRow> ablate_cfg(const flow::Denoiser& model,
                                       const std::vector<core::ManifestRecord>& manifest,
                                       const sampler::SampleConfig& base,
                                       const std::vector<double>& w_list,
                                       const std::filesystem::path& montage_dir, int jobs) {
  if (manifest.empty()) throw core::Error("ablate_cfg: manifest is empty");
  std::filesystem::create_directories(montage_dir);
  auto backend = make_denoiser_backend(model);

  const size_t montage_count = std::min<size_t>(manifest.size(), 8);
  std::vector<CfgAblationRow> rows;
  for (const double w : w_list) {
    sampler::SampleConfig config = base;
    config.cfg_scale = w;
    const EvalReport report = evaluate(*backend, manifest, config, jobs);
    CfgAblationRow row;
    row.cfg_scale = w;
    int total = 0;
    for (const EvalRow& r : report.rows) {
      row.accuracy += r.accuracy * r.n;
      row.mean_reward += r.mean_reward * r.n;
      total += r.n;
    }
    row.accuracy /= total;
    row.mean_reward /= total;
    rows.push_back(row);

    // First-step clean-sample projections, one tile per leading instance.
    std::vector<core::RasterImage> tiles(montage_count);
    core::parallel_for(montage_count, jobs > 0 ? jobs : core::default_jobs(), [&](size_t k) {
      const core::ManifestRecord& record = manifest[k];
      const auto [instance, truth] =
          taskgen::gen_instance(record.kind, record.level, record.seed);
      (void)truth;
      const flow::Condition condition =
          flow::encode_condition(render::render_instance(instance));
      core::SplitRng noise_rng(config.seed + k, "sample/noise");
      flow::Tensor x = flow::Tensor::zeros(condition.tensor.channels, condition.tensor.height,
                                           condition.tensor.width);
      for (float& v : x.data) v = noise_rng.normal_float();
      flow::Tensor v_hat = model.forward(x, 0.0, condition);
      if (w != 1.0) {
        const flow::Condition null = flow::null_condition(
            condition.tensor.channels, condition.tensor.height, condition.tensor.width);
        v_hat = sampler::cfg_velocity(v_hat, model.forward(x, 0.0, null), w);
      }
      tiles[k] = flow::decode_latent(sampler::estimate_x0(x, 0.0, v_hat));
    });

    const int tile_w = tiles.front().width;
    const int tile_h = tiles.front().height;
    core::RasterImage montage = core::RasterImage::filled(
        tile_w * static_cast<int>(montage_count), tile_h, {0, 0, 0});
    for (size_t k = 0; k < montage_count; ++k) {
      for (int y = 0; y < tile_h; ++y) {
        for (int x = 0; x < tile_w; ++x) {
          montage.set(static_cast<int>(k) * tile_w + x, y, tiles[k].get(x, y));
        }
      }
    }
    char name[48];
    std::snprintf(name, sizeof(name), "cfg_w%g.png", w);
    render::write_png(montage_dir / name, montage);
  }
  return rows;
}

std::vector<DataScaleRow> data_scale_sweep(const DataScaleConfig& config,
                                           const std::filesystem::path& work_dir, int jobs) {
  if (config.sizes.empty()) throw core::Error("data_scale_sweep: no sizes given");
  std::filesystem::create_directories(work_dir);

  taskgen::GenConfig test_gen;
  test_gen.kind = config.kind;
  test_gen.level = config.level;
  test_gen.count = config.test_count;
  test_gen.base_seed = config.test_base_seed;
  const std::filesystem::path test_dir = work_dir / "test";
  const std::vector<core::ManifestRecord> test_manifest =
      taskgen::gen_dataset(test_gen, test_dir, jobs);

  std::vector<DataScaleRow> rows;
  for (const int size : config.sizes) {
    taskgen::GenConfig train_gen;
    train_gen.kind = config.kind;
    train_gen.level = config.level;
    train_gen.count = size;
    train_gen.base_seed = config.train_base_seed;
    const std::filesystem::path train_dir = work_dir / ("train_" + std::to_string(size));
    const std::vector<core::ManifestRecord> train_manifest =
        taskgen::gen_dataset(train_gen, train_dir, jobs);

    const std::filesystem::path ckpt = work_dir / ("model_" + std::to_string(size) + ".ckpt");
    const std::filesystem::path log = work_dir / ("train_" + std::to_string(size) + ".csv");
    flow::train(config.train_config, config.model_config, train_manifest, train_dir, ckpt, log);

    flow::LoadedCheckpoint loaded = flow::load_checkpoint(ckpt);
    flow::use_ema_weights(*loaded.model);
    auto backend = make_denoiser_backend(*loaded.model);
    const EvalReport report = evaluate(*backend, test_manifest, config.sample_config, jobs);

    DataScaleRow row;
    row.size = size;
    int total = 0;
    for (const EvalRow& r : report.rows) {
      row.accuracy += r.accuracy * r.n;
      row.mean_reward += r.mean_reward * r.n;
      total += r.n;
    }
    row.accuracy /= total;
    row.mean_reward /= total;
    rows.push_back(row);
  }
  return rows;
}

void write_steps_csv(const std::vector<StepsAblationRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw core::Error("cannot write csv: " + path.string());
  out << "steps,accuracy,mean_reward,wall_ms_total\n";
  for (const StepsAblationRow& row : rows) {
    out << row.steps << ',' << row.accuracy << ',' << row.mean_reward << ',' << row.wall_ms_total
        << '\n';
  }
}

void write_cfg_csv(const std::vector<CfgAblationRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw core::Error("cannot write csv: " + path.string());
  out << "cfg_scale,accuracy,mean_reward\n";
  for (const CfgAblationRow& row : rows) {
    out << row.cfg_scale << ',' << row.accuracy << ',' << row.mean_reward << '\n';
  }
}

void write_data_scale_csv(const std::vector<DataScaleRow>& rows,
                          const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw core::Error("cannot write csv: " + path.string());
  out << "size,accuracy,mean_reward\n";
  for (const DataScaleRow& row : rows) {
    out << row.size << ',' << row.accuracy << ',' << row.mean_reward << '\n';
  }
}

}  // namespace gridflow::eval
