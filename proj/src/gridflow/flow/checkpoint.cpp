#include "gridflow/flow/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "gridflow/core/types.hpp"

namespace gridflow::flow {

namespace {

void write_bytes(std::ofstream& out, const void* data, size_t size) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
}

void write_u32(std::ofstream& out, uint32_t v) { write_bytes(out, &v, sizeof(v)); }
void write_u64(std::ofstream& out, uint64_t v) { write_bytes(out, &v, sizeof(v)); }

void write_string(std::ofstream& out, const std::string& s) {
  write_u32(out, static_cast<uint32_t>(s.size()));
  write_bytes(out, s.data(), s.size());
}

void write_array(std::ofstream& out, const std::string& name, const std::vector<int>& shape,
                 const std::vector<float>& values) {
  write_string(out, name);
  write_u32(out, static_cast<uint32_t>(shape.size()));
  for (const int d : shape) write_u32(out, static_cast<uint32_t>(d));
  write_u64(out, values.size());
  write_bytes(out, values.data(), values.size() * sizeof(float));
}

void read_bytes(std::ifstream& in, void* data, size_t size) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
  if (!in) throw core::CheckpointError("checkpoint truncated");
}

uint32_t read_u32(std::ifstream& in) {
  uint32_t v = 0;
  read_bytes(in, &v, sizeof(v));
  return v;
}

uint64_t read_u64(std::ifstream& in) {
  uint64_t v = 0;
  read_bytes(in, &v, sizeof(v));
  return v;
}

std::string read_string(std::ifstream& in) {
  const uint32_t size = read_u32(in);
  if (size > (1u << 26)) throw core::CheckpointError("checkpoint string length implausible");
  std::string s(size, '\0');
  read_bytes(in, s.data(), size);
  return s;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Denoiser& model,
                     const nlohmann::ordered_json& config, uint64_t step, uint64_t rng_digest) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw core::CheckpointError("cannot open checkpoint for writing: " + path.string());
  write_bytes(out, kCheckpointMagic, sizeof(kCheckpointMagic));
  write_u32(out, kCheckpointVersion);
  write_u64(out, step);
  write_u64(out, rng_digest);
  write_string(out, config.dump());

  const auto& params = model.params().all();
  write_u32(out, static_cast<uint32_t>(2 * params.size()));
  for (const auto& p : params) write_array(out, p->name, p->shape, p->value);
  for (const auto& p : params) write_array(out, "ema." + p->name, p->shape, p->ema);
  out.flush();
  if (!out) throw core::CheckpointError("checkpoint write failed: " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw core::CheckpointError("cannot open checkpoint: " + path.string());
  char magic[4] = {};
  read_bytes(in, magic, sizeof(magic));
  if (std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw core::CheckpointError("bad checkpoint magic");
  }
  const uint32_t version = read_u32(in);
  if (version != kCheckpointVersion) {
    throw core::CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }

  LoadedCheckpoint loaded;
  loaded.step = read_u64(in);
  loaded.rng_digest = read_u64(in);
  const std::string config_text = read_string(in);
  loaded.config = nlohmann::ordered_json::parse(config_text, nullptr, false);
  if (loaded.config.is_discarded()) throw core::CheckpointError("checkpoint config is not JSON");
  if (!loaded.config.contains("model")) {
    throw core::CheckpointError("checkpoint config lacks a model section");
  }

  DenoiserConfig model_config;
  try {
    model_config = denoiser_config_from_json(loaded.config.at("model"));
  } catch (const core::Error& e) {
    throw core::CheckpointError(std::string("checkpoint model config invalid: ") + e.what());
  }
  loaded.model = std::make_unique<Denoiser>(model_config);

  const uint32_t array_count = read_u32(in);
  size_t restored = 0;
  for (uint32_t k = 0; k < array_count; ++k) {
    std::string name = read_string(in);
    const uint32_t ndim = read_u32(in);
    std::vector<int> shape(ndim);
    for (uint32_t d = 0; d < ndim; ++d) shape[d] = static_cast<int>(read_u32(in));
    const uint64_t count = read_u64(in);
    std::vector<float> values(count);
    read_bytes(in, values.data(), count * sizeof(float));

    const bool is_ema = name.rfind("ema.", 0) == 0;
    const std::string base = is_ema ? name.substr(4) : name;
    Param* param = loaded.model->params().find(base);
    if (param == nullptr) throw core::CheckpointError("checkpoint names unknown parameter " + name);
    if (param->shape != shape || param->count() != count) {
      throw core::CheckpointError("checkpoint shape mismatch for " + name);
    }
    (is_ema ? param->ema : param->value) = std::move(values);
    ++restored;
  }
  if (restored != 2 * loaded.model->params().all().size()) {
    throw core::CheckpointError("checkpoint is missing parameter arrays");
  }
  return loaded;
}

void use_ema_weights(Denoiser& model) {
  for (const auto& p : model.params().all()) p->value = p->ema;
}

}  // namespace gridflow::flow
