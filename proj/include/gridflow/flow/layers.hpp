#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "gridflow/core/rng.hpp"
#include "gridflow/flow/tensor.hpp"

namespace gridflow::flow {

// One named parameter array with its gradient, Adam moments, and EMA shadow.
struct Param {
  std::string name;
  std::vector<int> shape;
  std::vector<float> value;
  std::vector<float> grad;
  std::vector<float> ema;
  std::vector<float> adam_m;
  std::vector<float> adam_v;

  size_t count() const { return value.size(); }
};

class ParamStore {
 public:
  Param* create(std::string name, std::vector<int> shape);
  Param* find(std::string_view name);
  const Param* find(std::string_view name) const;
  const std::vector<std::unique_ptr<Param>>& all() const { return params_; }
  void zero_grads();
  size_t total_count() const;

 private:
  std::vector<std::unique_ptr<Param>> params_;
};

// Layers run one sample at a time (no cross-sample coupling anywhere), saving
// what backward needs. Call order per sample: forward, then backward in exact
// reverse; gradients accumulate into the store until zero_grads().

class Conv2d {
 public:
  // 3x3 kernel, padding 1. He-normal init, or zeros for residual/output heads.
  Conv2d(ParamStore& store, const std::string& name, int in_channels, int out_channels, int stride,
         bool zero_init, core::SplitRng& init_rng);
  // keep=false skips saving activations: no member writes, safe to share
  // across threads for inference.
  Tensor forward(const Tensor& x, bool keep);
  Tensor backward(const Tensor& dy);

  int out_channels() const { return out_channels_; }

 private:
  Param* weight_;  // [out, in, 3, 3]
  Param* bias_;    // [out]
  int in_channels_;
  int out_channels_;
  int stride_;
  Tensor saved_x_;
};

class GroupNorm {
 public:
  GroupNorm(ParamStore& store, const std::string& name, int channels, int groups);
  Tensor forward(const Tensor& x, bool keep);
  Tensor backward(const Tensor& dy);

 private:
  Param* gamma_;
  Param* beta_;
  int channels_;
  int groups_;
  Tensor saved_norm_;  // normalized pre-affine activations
  std::vector<float> saved_inv_std_;
};

class SiLU {
 public:
  Tensor forward(const Tensor& x, bool keep);
  Tensor backward(const Tensor& dy);

 private:
  Tensor saved_x_;
};

class Linear {
 public:
  Linear(ParamStore& store, const std::string& name, int in_features, int out_features,
         core::SplitRng& init_rng);
  std::vector<float> forward(const std::vector<float>& x, bool keep);
  std::vector<float> backward(const std::vector<float>& dy);

 private:
  Param* weight_;  // [out, in]
  Param* bias_;    // [out]
  int in_features_;
  int out_features_;
  std::vector<float> saved_x_;
};

// Residual block with per-channel time modulation:
//   h = conv1(silu(gn1(x))); h = h*(1+s) + b with (s,b) = film(temb);
//   h = conv2(silu(gn2(h))); return x + h   (conv2 starts at zero)
class ResBlock {
 public:
  ResBlock(ParamStore& store, const std::string& name, int channels, int time_dim, int groups,
           core::SplitRng& init_rng);
  Tensor forward(const Tensor& x, const std::vector<float>& temb, bool keep);
  // Adds the time-path gradient into dtemb.
  Tensor backward(const Tensor& dy, std::vector<float>& dtemb);

 private:
  int channels_;
  GroupNorm gn1_;
  SiLU act1_;
  Conv2d conv1_;
  Linear film_;
  GroupNorm gn2_;
  SiLU act2_;
  Conv2d conv2_;
  Tensor saved_pre_film_;
  std::vector<float> saved_scale_;
};

// Nearest-neighbor 2x upsampling and its adjoint.
Tensor upsample2(const Tensor& x);
Tensor upsample2_backward(const Tensor& dy);

// Sinusoidal embedding of t in [0,1] (frequencies span ~3 decades).
std::vector<float> time_embedding(double t, int dim);

}  // namespace gridflow::flow
