#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gridflow/core/manifest.hpp"
#include "gridflow/core/parallel.hpp"
#include "gridflow/eval/eval.hpp"
#include "gridflow/flow/checkpoint.hpp"
#include "gridflow/flow/codec.hpp"
#include "gridflow/flow/train.hpp"
#include "gridflow/parse/parse.hpp"
#include "gridflow/render/png_io.hpp"
#include "gridflow/render/render.hpp"
#include "gridflow/sampler/sampler.hpp"
#include "gridflow/taskgen/taskgen.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using namespace gridflow;

namespace {

// Bad user input (exit 2), as opposed to runtime failure (exit 1).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Json load_config_file(const std::string& path) {
  if (path.empty()) return Json::object();
  std::ifstream in(path);
  if (!in) throw UsageError("config file not found: " + path);
  Json config = Json::parse(in, nullptr, false);
  if (config.is_discarded()) throw UsageError("config file is not valid JSON: " + path);
  if (!config.is_object()) throw UsageError("config root must be a JSON object");
  for (const auto& [key, _] : config.items()) {
    if (key != "gen" && key != "model" && key != "train" && key != "sample" && key != "eval") {
      throw UsageError("unknown config section: " + key);
    }
  }
  return config;
}

Json section(const Json& config, const char* name) {
  return config.contains(name) ? config.at(name) : Json::object();
}

core::TaskKind parse_kind(const std::string& text) {
  try {
    return core::task_kind_from_string(text);
  } catch (const core::Error& e) {
    throw UsageError(e.what());
  }
}

core::DifficultyLevel parse_level(core::TaskKind kind, const std::string& text) {
  core::DifficultyLevel level;
  try {
    level = core::level_from_string(text);
  } catch (const core::Error& e) {
    throw UsageError(e.what());
  }
  if (!core::level_admissible(kind, level)) {
    throw UsageError("level " + text + " is not admissible for task " +
                     std::string(core::to_string(kind)));
  }
  return level;
}

// Instance ids are "<kind>-<level>-<seed>".
core::TaskInstance instance_from_id(const std::string& id) {
  const size_t first = id.find('-');
  const size_t last = id.rfind('-');
  if (first == std::string::npos || last == first) {
    throw UsageError("instance id must look like vsp-4-17: " + id);
  }
  const std::string kind_text = id.substr(0, first);
  const std::string level_text = id.substr(first + 1, last - first - 1);
  const std::string seed_text = id.substr(last + 1);
  const core::TaskKind kind = parse_kind(kind_text);
  const core::DifficultyLevel level = parse_level(kind, level_text);
  uint64_t seed = 0;
  try {
    seed = std::stoull(seed_text);
  } catch (const std::exception&) {
    throw UsageError("instance id has a non-numeric seed: " + id);
  }
  return taskgen::gen_instance(kind, level, seed).first;
}

flow::DenoiserConfig resolve_model_config(const Json& config) {
  try {
    return flow::denoiser_config_from_json(section(config, "model"));
  } catch (const core::Error& e) {
    throw UsageError(e.what());
  }
}

Json sample_config_to_json(const sampler::SampleConfig& config) {
  return Json{{"steps", config.steps}, {"cfg_scale", config.cfg_scale}, {"seed", config.seed}};
}

sampler::SampleConfig apply_sample_section(const Json& j, sampler::SampleConfig config) {
  if (!j.is_object()) throw UsageError("sample/eval config section must be an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "steps" && key != "cfg_scale" && key != "seed" && key != "stub") {
      throw UsageError("unknown sample config key: " + key);
    }
  }
  config.steps = j.value("steps", config.steps);
  config.cfg_scale = j.value("cfg_scale", config.cfg_scale);
  config.seed = j.value("seed", config.seed);
  if (config.steps < 1) throw UsageError("steps must be >= 1");
  return config;
}

void write_resolved_config(const fs::path& out_dir, const Json& resolved) {
  std::ofstream out(out_dir / "resolved_config.json");
  out << resolved.dump(2) << '\n';
}

flow::LoadedCheckpoint load_model_or_die(const std::string& path, bool use_ema) {
  if (path.empty()) throw UsageError("--checkpoint is required");
  flow::LoadedCheckpoint loaded = flow::load_checkpoint(path);
  if (use_ema) flow::use_ema_weights(*loaded.model);
  return loaded;
}

std::vector<core::ManifestRecord> load_manifest_or_die(const std::string& data_dir) {
  if (data_dir.empty()) throw UsageError("--data is required");
  return core::read_manifest(fs::path(data_dir) / "manifest.jsonl");
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> values;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    try {
      values.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw UsageError("expected a comma-separated integer list, got: " + text);
    }
  }
  if (values.empty()) throw UsageError("empty list: " + text);
  return values;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    try {
      values.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw UsageError("expected a comma-separated number list, got: " + text);
    }
  }
  if (values.empty()) throw UsageError("empty list: " + text);
  return values;
}

struct CommonArgs {
  std::string config_path;
  int jobs = 0;

  int resolved_jobs() const { return jobs > 0 ? jobs : core::default_jobs(); }
};

// --- gen ---------------------------------------------------------------------

struct GenArgs {
  std::string task;
  std::string level;
  int count = 0;
  uint64_t seed = 0;
  std::string out;
  bool task_set = false, level_set = false, count_set = false, seed_set = false;
};

int cmd_gen(const CommonArgs& common, const GenArgs& args) {
  const Json config = load_config_file(common.config_path);
  const Json gen_section = section(config, "gen");
  for (const auto& [key, _] : gen_section.items()) {
    if (key != "task" && key != "level" && key != "count" && key != "base_seed") {
      throw UsageError("unknown gen config key: " + key);
    }
  }

  std::string task_text = gen_section.value("task", std::string{});
  std::string level_text = gen_section.value("level", std::string{});
  taskgen::GenConfig gen;
  gen.count = gen_section.value("count", 0);
  gen.base_seed = gen_section.value("base_seed", uint64_t{0});
  if (args.task_set) task_text = args.task;
  if (args.level_set) level_text = args.level;
  if (args.count_set) gen.count = args.count;
  if (args.seed_set) gen.base_seed = args.seed;

  if (task_text.empty()) throw UsageError("--task is required");
  if (level_text.empty()) throw UsageError("--level is required");
  if (gen.count < 1) throw UsageError("--count must be >= 1");
  if (args.out.empty()) throw UsageError("--out is required");
  gen.kind = parse_kind(task_text);
  gen.level = parse_level(gen.kind, level_text);

  const auto records = taskgen::gen_dataset(gen, args.out, common.resolved_jobs());
  write_resolved_config(args.out, Json{{"gen",
                                        Json{{"task", task_text},
                                             {"level", level_text},
                                             {"count", gen.count},
                                             {"base_seed", gen.base_seed}}}});
  std::cout << "wrote " << records.size() << " instances to " << args.out << '\n';
  return 0;
}

// --- train -------------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string out;
  int steps = 0;
  int batch_size = 0;
  double lr = 0.0;
  uint64_t seed = 0;
  bool steps_set = false, batch_set = false, lr_set = false, seed_set = false;
};

int cmd_train(const CommonArgs& common, const TrainArgs& args) {
  const Json config = load_config_file(common.config_path);
  const flow::DenoiserConfig model_config = resolve_model_config(config);

  flow::TrainConfig train_config;
  try {
    train_config = flow::train_config_from_json(section(config, "train"));
  } catch (const core::Error& e) {
    throw UsageError(e.what());
  }
  if (args.steps_set) train_config.steps = args.steps;
  if (args.batch_set) train_config.batch_size = args.batch_size;
  if (args.lr_set) train_config.learning_rate = args.lr;
  if (args.seed_set) train_config.seed = args.seed;
  if (train_config.steps < 1 || train_config.batch_size < 1 || train_config.learning_rate <= 0) {
    throw UsageError("invalid training settings");
  }
  if (args.out.empty()) throw UsageError("--out is required");

  const auto manifest = load_manifest_or_die(args.data);
  fs::create_directories(args.out);
  const fs::path out_dir(args.out);
  const auto result = flow::train(train_config, model_config, manifest, args.data,
                                  out_dir / "model.dftk", out_dir / "loss.csv");
  write_resolved_config(out_dir, Json{{"model", flow::denoiser_config_to_json(model_config)},
                                      {"train", flow::train_config_to_json(train_config)}});
  std::cout << "trained " << result.steps << " steps, final loss " << result.final_loss
            << ", checkpoint " << result.checkpoint_path.string() << '\n';
  return 0;
}

// --- sample / viz ------------------------------------------------------------

struct SampleArgs {
  std::string checkpoint;
  std::string instance_id;
  std::string out;
  int steps = 0;
  double cfg = 0.0;
  uint64_t seed = 0;
  bool trajectory = false;
  bool raw_weights = false;
  bool steps_set = false, cfg_set = false, seed_set = false;
};

sampler::SampleConfig resolve_sample_config(const Json& config, const SampleArgs& args,
                                            const char* section_name) {
  sampler::SampleConfig sample_config = apply_sample_section(section(config, section_name), {});
  if (args.steps_set) sample_config.steps = args.steps;
  if (args.cfg_set) sample_config.cfg_scale = args.cfg;
  if (args.seed_set) sample_config.seed = args.seed;
  if (sample_config.steps < 1) throw UsageError("--steps must be >= 1");
  return sample_config;
}

int cmd_sample(const CommonArgs& common, const SampleArgs& args, bool always_trajectory) {
  const Json config = load_config_file(common.config_path);
  sampler::SampleConfig sample_config = resolve_sample_config(config, args, "sample");
  sample_config.record_trajectory = args.trajectory || always_trajectory;
  if (args.out.empty()) throw UsageError("--out is required");
  if (args.instance_id.empty()) throw UsageError("--instance is required");

  const core::TaskInstance instance = instance_from_id(args.instance_id);
  const flow::LoadedCheckpoint loaded = load_model_or_die(args.checkpoint, !args.raw_weights);

  const core::RasterImage problem = render::render_instance(instance);
  const flow::Condition condition = flow::encode_condition(problem);
  const auto [image, trajectory] =
      sampler::euler_sample(*loaded.model, condition, sample_config);

  fs::create_directories(args.out);
  const fs::path out_dir(args.out);
  render::write_png(out_dir / (args.instance_id + ".png"), image);
  render::write_png(out_dir / "input.png", problem);
  if (trajectory) sampler::dump_trajectory(*trajectory, out_dir / "trajectory");

  const parse::ParseResult parsed = parse::parse(image, instance);
  std::cout << (parsed.ok() ? "parsed: yes" : "parsed: no (" + parsed.detail + ")") << '\n';

  write_resolved_config(out_dir, Json{{"sample", sample_config_to_json(sample_config)}});
  return 0;
}

// --- eval --------------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  std::string out;
  std::string stub;
  bool raw_weights = false;
  SampleArgs sample;  // steps/cfg/seed + their set flags
};

std::unique_ptr<eval::SamplerBackend> resolve_backend(const EvalArgs& args,
                                                      flow::LoadedCheckpoint& slot) {
  if (!args.stub.empty()) {
    try {
      return eval::make_stub_backend(args.stub);
    } catch (const core::Error& e) {
      throw UsageError(e.what());
    }
  }
  slot = load_model_or_die(args.checkpoint, !args.raw_weights);
  return eval::make_denoiser_backend(*slot.model);
}

int cmd_eval(const CommonArgs& common, const EvalArgs& args) {
  const Json config = load_config_file(common.config_path);
  sampler::SampleConfig sample_config = resolve_sample_config(config, args.sample, "eval");
  if (args.out.empty()) throw UsageError("--out is required");
  const auto manifest = load_manifest_or_die(args.data);

  flow::LoadedCheckpoint slot;
  auto backend = resolve_backend(args, slot);
  const eval::EvalReport report =
      eval::evaluate(*backend, manifest, sample_config, common.resolved_jobs());

  fs::create_directories(args.out);
  const fs::path out_dir(args.out);
  eval::write_report_csv(report, out_dir / "report.csv");
  write_resolved_config(out_dir, Json{{"eval", sample_config_to_json(sample_config)}});
  std::cout << eval::format_report(report);
  return 0;
}

// --- ablate ------------------------------------------------------------------

struct AblateArgs {
  EvalArgs eval;
  std::string steps_list;
  std::string cfg_list;
  std::string data_scale;
  std::string task;
  std::string level;
  int test_count = 100;
};

int cmd_ablate(const CommonArgs& common, const AblateArgs& args) {
  const int modes = (!args.steps_list.empty() ? 1 : 0) + (!args.cfg_list.empty() ? 1 : 0) +
                    (!args.data_scale.empty() ? 1 : 0);
  if (modes != 1) {
    throw UsageError("pick exactly one of --steps-list, --cfg-list, --data-scale");
  }
  const Json config = load_config_file(common.config_path);
  sampler::SampleConfig sample_config = resolve_sample_config(config, args.eval.sample, "eval");
  if (args.eval.out.empty()) throw UsageError("--out is required");
  fs::create_directories(args.eval.out);
  const fs::path out_dir(args.eval.out);

  if (!args.steps_list.empty()) {
    const auto manifest = load_manifest_or_die(args.eval.data);
    flow::LoadedCheckpoint slot;
    auto backend = resolve_backend(args.eval, slot);
    const auto rows = eval::ablate_steps(*backend, manifest, sample_config,
                                         parse_int_list(args.steps_list), common.resolved_jobs());
    eval::write_steps_csv(rows, out_dir / "steps.csv");
    for (const auto& row : rows) {
      std::cout << "steps=" << row.steps << " accuracy=" << row.accuracy
                << " wall_ms=" << row.wall_ms_total << '\n';
    }
  } else if (!args.cfg_list.empty()) {
    const auto manifest = load_manifest_or_die(args.eval.data);
    const flow::LoadedCheckpoint loaded =
        load_model_or_die(args.eval.checkpoint, !args.eval.raw_weights);
    const auto rows =
        eval::ablate_cfg(*loaded.model, manifest, sample_config, parse_double_list(args.cfg_list),
                         out_dir / "cfg_montages", common.resolved_jobs());
    eval::write_cfg_csv(rows, out_dir / "cfg.csv");
    for (const auto& row : rows) {
      std::cout << "cfg=" << row.cfg_scale << " accuracy=" << row.accuracy << '\n';
    }
  } else {
    if (args.task.empty() || args.level.empty()) {
      throw UsageError("--data-scale needs --task and --level");
    }
    eval::DataScaleConfig scale;
    scale.kind = parse_kind(args.task);
    scale.level = parse_level(scale.kind, args.level);
    scale.sizes = parse_int_list(args.data_scale);
    scale.test_count = args.test_count;
    scale.model_config = resolve_model_config(config);
    try {
      scale.train_config = flow::train_config_from_json(section(config, "train"));
    } catch (const core::Error& e) {
      throw UsageError(e.what());
    }
    scale.sample_config = sample_config;
    const auto rows = eval::data_scale_sweep(scale, out_dir / "runs", common.resolved_jobs());
    eval::write_data_scale_csv(rows, out_dir / "data_scale.csv");
    for (const auto& row : rows) {
      std::cout << "size=" << row.size << " accuracy=" << row.accuracy << '\n';
    }
  }
  write_resolved_config(out_dir, Json{{"eval", sample_config_to_json(sample_config)}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gridflow: generative solver lab for procedural visual-reasoning tasks"};
  app.require_subcommand(1);

  CommonArgs common;
  app.add_option("--config", common.config_path,
                 "JSON config file with gen/model/train/sample/eval sections");
  app.add_option("--jobs", common.jobs, "worker threads (default: GRIDFLOW_JOBS, then hardware)");

  GenArgs gen_args;
  CLI::App* gen = app.add_subcommand("gen", "generate a dataset of problem/solution image pairs");
  gen->fallthrough();
  auto* opt_task = gen->add_option("--task", gen_args.task, "vsp|maze|tsp|sudoku|jigsaw");
  auto* opt_level = gen->add_option("--level", gen_args.level, "difficulty (e.g. 8, or 2x2)");
  auto* opt_count = gen->add_option("--count", gen_args.count, "number of instances");
  auto* opt_seed = gen->add_option("--seed", gen_args.seed, "base seed");
  gen->add_option("--out", gen_args.out, "output directory")->required();

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "train the denoiser on a generated dataset");
  train->fallthrough();
  train->add_option("--data", train_args.data, "dataset directory (with manifest.jsonl)")
      ->required();
  train->add_option("--out", train_args.out, "output directory")->required();
  auto* opt_tsteps = train->add_option("--steps", train_args.steps, "training steps");
  auto* opt_batch = train->add_option("--batch-size", train_args.batch_size, "batch size");
  auto* opt_lr = train->add_option("--lr", train_args.lr, "learning rate");
  auto* opt_tseed = train->add_option("--seed", train_args.seed, "training seed");

  SampleArgs sample_args;
  CLI::App* sample = app.add_subcommand("sample", "sample a solution image for one instance");
  sample->fallthrough();
  sample->add_option("--checkpoint", sample_args.checkpoint, "checkpoint file")->required();
  sample->add_option("--instance", sample_args.instance_id, "instance id, e.g. vsp-4-17")
      ->required();
  sample->add_option("--out", sample_args.out, "output directory")->required();
  auto* opt_ssteps = sample->add_option("--steps", sample_args.steps, "Euler steps");
  auto* opt_scfg = sample->add_option("--cfg", sample_args.cfg, "guidance weight");
  auto* opt_sseed = sample->add_option("--seed", sample_args.seed, "noise seed");
  sample->add_flag("--trajectory", sample_args.trajectory, "dump per-step clean-sample frames");
  sample->add_flag("--raw-weights", sample_args.raw_weights, "use raw instead of EMA weights");

  SampleArgs viz_args;
  CLI::App* viz = app.add_subcommand("viz", "visualize per-step clean-sample projections");
  viz->fallthrough();
  viz->add_option("--checkpoint", viz_args.checkpoint, "checkpoint file")->required();
  viz->add_option("--instance", viz_args.instance_id, "instance id")->required();
  viz->add_option("--out", viz_args.out, "output directory")->required();
  auto* opt_vsteps = viz->add_option("--steps", viz_args.steps, "Euler steps");
  auto* opt_vcfg = viz->add_option("--cfg", viz_args.cfg, "guidance weight");
  auto* opt_vseed = viz->add_option("--seed", viz_args.seed, "noise seed");
  viz->add_flag("--raw-weights", viz_args.raw_weights, "use raw instead of EMA weights");

  EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a sampler over a dataset");
  eval_cmd->fallthrough();
  eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "checkpoint file");
  eval_cmd->add_option("--data", eval_args.data, "dataset directory")->required();
  eval_cmd->add_option("--out", eval_args.out, "output directory")->required();
  auto* opt_esteps = eval_cmd->add_option("--steps", eval_args.sample.steps, "Euler steps");
  auto* opt_ecfg = eval_cmd->add_option("--cfg", eval_args.sample.cfg, "guidance weight");
  auto* opt_eseed = eval_cmd->add_option("--seed", eval_args.sample.seed, "evaluation seed");
  eval_cmd->add_flag("--raw-weights", eval_args.raw_weights, "use raw instead of EMA weights");
  eval_cmd->add_option("--stub", eval_args.stub, "oracle|blank|noisy:p integrity sampler")
      ->group("");  // hidden

  AblateArgs ablate_args;
  CLI::App* ablate = app.add_subcommand("ablate", "sweep steps, guidance, or dataset size");
  ablate->fallthrough();
  ablate->add_option("--checkpoint", ablate_args.eval.checkpoint, "checkpoint file");
  ablate->add_option("--data", ablate_args.eval.data, "dataset directory");
  ablate->add_option("--out", ablate_args.eval.out, "output directory")->required();
  ablate->add_option("--steps-list", ablate_args.steps_list, "e.g. 5,10,20");
  ablate->add_option("--cfg-list", ablate_args.cfg_list, "e.g. 1,4,7");
  ablate->add_option("--data-scale", ablate_args.data_scale, "training-set sizes, e.g. 500,2000");
  ablate->add_option("--task", ablate_args.task, "task for --data-scale");
  ablate->add_option("--level", ablate_args.level, "level for --data-scale");
  ablate->add_option("--test-count", ablate_args.test_count, "held-out size for --data-scale");
  auto* opt_asteps = ablate->add_option("--steps", ablate_args.eval.sample.steps, "Euler steps");
  auto* opt_acfg = ablate->add_option("--cfg", ablate_args.eval.sample.cfg, "guidance weight");
  auto* opt_aseed = ablate->add_option("--seed", ablate_args.eval.sample.seed, "evaluation seed");
  ablate->add_flag("--raw-weights", ablate_args.eval.raw_weights,
                   "use raw instead of EMA weights");
  ablate->add_option("--stub", ablate_args.eval.stub, "integrity sampler")->group("");  // hidden

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  gen_args.task_set = opt_task->count() > 0;
  gen_args.level_set = opt_level->count() > 0;
  gen_args.count_set = opt_count->count() > 0;
  gen_args.seed_set = opt_seed->count() > 0;
  train_args.steps_set = opt_tsteps->count() > 0;
  train_args.batch_set = opt_batch->count() > 0;
  train_args.lr_set = opt_lr->count() > 0;
  train_args.seed_set = opt_tseed->count() > 0;
  sample_args.steps_set = opt_ssteps->count() > 0;
  sample_args.cfg_set = opt_scfg->count() > 0;
  sample_args.seed_set = opt_sseed->count() > 0;
  viz_args.steps_set = opt_vsteps->count() > 0;
  viz_args.cfg_set = opt_vcfg->count() > 0;
  viz_args.seed_set = opt_vseed->count() > 0;
  eval_args.sample.steps_set = opt_esteps->count() > 0;
  eval_args.sample.cfg_set = opt_ecfg->count() > 0;
  eval_args.sample.seed_set = opt_eseed->count() > 0;
  ablate_args.eval.sample.steps_set = opt_asteps->count() > 0;
  ablate_args.eval.sample.cfg_set = opt_acfg->count() > 0;
  ablate_args.eval.sample.seed_set = opt_aseed->count() > 0;

  try {
    if (gen->parsed()) return cmd_gen(common, gen_args);
    if (train->parsed()) return cmd_train(common, train_args);
    if (sample->parsed()) return cmd_sample(common, sample_args, false);
    if (viz->parsed()) return cmd_sample(common, viz_args, true);
    if (eval_cmd->parsed()) return cmd_eval(common, eval_args);
    if (ablate->parsed()) return cmd_ablate(common, ablate_args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const core::InvalidLevelError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
