#include "gridflow/flow/layers.hpp"

#include <cmath>
#include <cstring>

#include <Eigen/Core>

namespace gridflow::flow {

namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

constexpr float kNormEps = 1e-5f;

// 3x3/pad-1 patch matrix: rows = in_c*9, cols = out_h*out_w.
std::vector<float> im2col(const Tensor& x, int stride, int out_h, int out_w) {
  const int k = 3, pad = 1;
  std::vector<float> col(static_cast<size_t>(x.channels) * k * k * out_h * out_w, 0.0f);
  const size_t cols = static_cast<size_t>(out_h) * out_w;
  for (int c = 0; c < x.channels; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        float* row = col.data() + (static_cast<size_t>(c) * k * k + ky * 3 + kx) * cols;
        for (int oy = 0; oy < out_h; ++oy) {
          const int sy = oy * stride + ky - pad;
          if (sy < 0 || sy >= x.height) continue;
          const float* src = x.data.data() + (static_cast<size_t>(c) * x.height + sy) * x.width;
          float* dst = row + static_cast<size_t>(oy) * out_w;
          for (int ox = 0; ox < out_w; ++ox) {
            const int sx = ox * stride + kx - pad;
            if (sx >= 0 && sx < x.width) dst[ox] = src[sx];
          }
        }
      }
    }
  }
  return col;
}

void col2im_add(const std::vector<float>& col, int stride, int out_h, int out_w, Tensor& dx) {
  const int k = 3, pad = 1;
  const size_t cols = static_cast<size_t>(out_h) * out_w;
  for (int c = 0; c < dx.channels; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const float* row = col.data() + (static_cast<size_t>(c) * k * k + ky * 3 + kx) * cols;
        for (int oy = 0; oy < out_h; ++oy) {
          const int sy = oy * stride + ky - pad;
          if (sy < 0 || sy >= dx.height) continue;
          float* dst = dx.data.data() + (static_cast<size_t>(c) * dx.height + sy) * dx.width;
          const float* src = row + static_cast<size_t>(oy) * out_w;
          for (int ox = 0; ox < out_w; ++ox) {
            const int sx = ox * stride + kx - pad;
            if (sx >= 0 && sx < dx.width) dst[sx] += src[ox];
          }
        }
      }
    }
  }
}

float sigmoidf(float x) { return 1.0f / (1.0f + std::exp(-x)); }

}  // namespace

// --- ParamStore --------------------------------------------------------------

Param* ParamStore::create(std::string name, std::vector<int> shape) {
  if (find(name) != nullptr) throw core::Error("duplicate parameter name: " + name);
  size_t count = 1;
  for (const int d : shape) count *= static_cast<size_t>(d);
  auto param = std::make_unique<Param>();
  param->name = std::move(name);
  param->shape = std::move(shape);
  param->value.assign(count, 0.0f);
  param->grad.assign(count, 0.0f);
  param->ema.assign(count, 0.0f);
  param->adam_m.assign(count, 0.0f);
  param->adam_v.assign(count, 0.0f);
  params_.push_back(std::move(param));
  return params_.back().get();
}

Param* ParamStore::find(std::string_view name) {
  for (const auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

const Param* ParamStore::find(std::string_view name) const {
  for (const auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

void ParamStore::zero_grads() {
  for (const auto& p : params_) std::fill(p->grad.begin(), p->grad.end(), 0.0f);
}

size_t ParamStore::total_count() const {
  size_t total = 0;
  for (const auto& p : params_) total += p->count();
  return total;
}

// --- Conv2d ------------------------------------------------------------------

Conv2d::Conv2d(ParamStore& store, const std::string& name, int in_channels, int out_channels,
               int stride, bool zero_init, core::SplitRng& init_rng)
    : in_channels_(in_channels), out_channels_(out_channels), stride_(stride) {
  weight_ = store.create(name + ".weight", {out_channels, in_channels, 3, 3});
  bias_ = store.create(name + ".bias", {out_channels});
  if (!zero_init) {
    const float scale = std::sqrt(2.0f / (static_cast<float>(in_channels) * 9.0f));
    for (float& v : weight_->value) v = scale * init_rng.normal_float();
  }
}

Tensor Conv2d::forward(const Tensor& x, bool keep) {
  if (x.channels != in_channels_) throw core::Error("Conv2d: channel mismatch");
  const int out_h = (x.height + 2 - 3) / stride_ + 1;
  const int out_w = (x.width + 2 - 3) / stride_ + 1;
  const std::vector<float> col = im2col(x, stride_, out_h, out_w);
  Tensor y = Tensor::zeros(out_channels_, out_h, out_w);
  const Eigen::Index K = static_cast<Eigen::Index>(in_channels_) * 9;
  const Eigen::Index P = static_cast<Eigen::Index>(out_h) * out_w;
  MapMat(y.data.data(), out_channels_, P).noalias() =
      ConstMapMat(weight_->value.data(), out_channels_, K) * ConstMapMat(col.data(), K, P);
  for (int oc = 0; oc < out_channels_; ++oc) {
    float* row = y.data.data() + static_cast<size_t>(oc) * P;
    const float b = bias_->value[static_cast<size_t>(oc)];
    for (Eigen::Index i = 0; i < P; ++i) row[i] += b;
  }
  if (keep) saved_x_ = x;
  return y;
}

Tensor Conv2d::backward(const Tensor& dy) {
  const Tensor& x = saved_x_;
  const int out_h = dy.height, out_w = dy.width;
  const Eigen::Index K = static_cast<Eigen::Index>(in_channels_) * 9;
  const Eigen::Index P = static_cast<Eigen::Index>(out_h) * out_w;
  const std::vector<float> col = im2col(x, stride_, out_h, out_w);

  ConstMapMat dy_map(dy.data.data(), out_channels_, P);
  MapMat(weight_->grad.data(), out_channels_, K).noalias() +=
      dy_map * ConstMapMat(col.data(), K, P).transpose();
  // Fixed-order reduction: Eigen's vectorized sum() peels to the buffer's
  // alignment, which varies per allocation and breaks bit reproducibility.
  for (int oc = 0; oc < out_channels_; ++oc) {
    const float* row = dy.data.data() + static_cast<size_t>(oc) * P;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < P; ++i) acc += row[i];
    bias_->grad[static_cast<size_t>(oc)] += static_cast<float>(acc);
  }

  std::vector<float> dcol(static_cast<size_t>(K) * P);
  MapMat(dcol.data(), K, P).noalias() =
      ConstMapMat(weight_->value.data(), out_channels_, K).transpose() * dy_map;
  Tensor dx = Tensor::zeros(x.channels, x.height, x.width);
  col2im_add(dcol, stride_, out_h, out_w, dx);
  return dx;
}

// --- GroupNorm ---------------------------------------------------------------

GroupNorm::GroupNorm(ParamStore& store, const std::string& name, int channels, int groups)
    : channels_(channels), groups_(groups) {
  if (channels % groups != 0) throw core::Error("GroupNorm: channels not divisible by groups");
  gamma_ = store.create(name + ".gamma", {channels});
  beta_ = store.create(name + ".beta", {channels});
  std::fill(gamma_->value.begin(), gamma_->value.end(), 1.0f);
}

Tensor GroupNorm::forward(const Tensor& x, bool keep) {
  const int per_group = channels_ / groups_;
  const size_t plane = static_cast<size_t>(x.height) * x.width;
  Tensor norm = x;
  std::vector<float> inv_std(static_cast<size_t>(groups_));
  for (int g = 0; g < groups_; ++g) {
    const size_t begin = static_cast<size_t>(g) * per_group * plane;
    const size_t count = static_cast<size_t>(per_group) * plane;
    double sum = 0.0, sq = 0.0;
    for (size_t i = begin; i < begin + count; ++i) {
      sum += x.data[i];
      sq += static_cast<double>(x.data[i]) * x.data[i];
    }
    const double mean = sum / static_cast<double>(count);
    const double var = sq / static_cast<double>(count) - mean * mean;
    const float istd = 1.0f / std::sqrt(static_cast<float>(var) + kNormEps);
    inv_std[static_cast<size_t>(g)] = istd;
    for (size_t i = begin; i < begin + count; ++i) {
      norm.data[i] = (x.data[i] - static_cast<float>(mean)) * istd;
    }
  }
  Tensor y = norm;
  for (int c = 0; c < channels_; ++c) {
    const float gm = gamma_->value[static_cast<size_t>(c)];
    const float bt = beta_->value[static_cast<size_t>(c)];
    float* row = y.data.data() + static_cast<size_t>(c) * plane;
    for (size_t i = 0; i < plane; ++i) row[i] = row[i] * gm + bt;
  }
  if (keep) {
    saved_norm_ = std::move(norm);
    saved_inv_std_ = std::move(inv_std);
  }
  return y;
}

Tensor GroupNorm::backward(const Tensor& dy) {
  const int per_group = channels_ / groups_;
  const size_t plane = static_cast<size_t>(dy.height) * dy.width;
  Tensor dx = Tensor::zeros(dy.channels, dy.height, dy.width);
  for (int c = 0; c < channels_; ++c) {
    const float* norm_row = saved_norm_.data.data() + static_cast<size_t>(c) * plane;
    const float* dy_row = dy.data.data() + static_cast<size_t>(c) * plane;
    double dgamma = 0.0, dbeta = 0.0;
    for (size_t i = 0; i < plane; ++i) {
      dgamma += static_cast<double>(dy_row[i]) * norm_row[i];
      dbeta += dy_row[i];
    }
    gamma_->grad[static_cast<size_t>(c)] += static_cast<float>(dgamma);
    beta_->grad[static_cast<size_t>(c)] += static_cast<float>(dbeta);
  }
  // dnorm = dy * gamma; dx = istd * (dnorm - mean(dnorm) - norm * mean(dnorm*norm))
  for (int g = 0; g < groups_; ++g) {
    const size_t begin = static_cast<size_t>(g) * per_group * plane;
    const size_t count = static_cast<size_t>(per_group) * plane;
    double sum_dnorm = 0.0, sum_dnorm_norm = 0.0;
    for (int c = g * per_group; c < (g + 1) * per_group; ++c) {
      const float gm = gamma_->value[static_cast<size_t>(c)];
      const float* dy_row = dy.data.data() + static_cast<size_t>(c) * plane;
      const float* norm_row = saved_norm_.data.data() + static_cast<size_t>(c) * plane;
      for (size_t i = 0; i < plane; ++i) {
        const double dn = static_cast<double>(dy_row[i]) * gm;
        sum_dnorm += dn;
        sum_dnorm_norm += dn * norm_row[i];
      }
    }
    const float mean_dnorm = static_cast<float>(sum_dnorm / static_cast<double>(count));
    const float mean_dnorm_norm = static_cast<float>(sum_dnorm_norm / static_cast<double>(count));
    const float istd = saved_inv_std_[static_cast<size_t>(g)];
    for (int c = g * per_group; c < (g + 1) * per_group; ++c) {
      const float gm = gamma_->value[static_cast<size_t>(c)];
      const float* dy_row = dy.data.data() + static_cast<size_t>(c) * plane;
      const float* norm_row = saved_norm_.data.data() + static_cast<size_t>(c) * plane;
      float* dx_row = dx.data.data() + static_cast<size_t>(c) * plane;
      for (size_t i = 0; i < plane; ++i) {
        dx_row[i] =
            istd * (dy_row[i] * gm - mean_dnorm - norm_row[i] * mean_dnorm_norm);
      }
    }
    (void)begin;
  }
  return dx;
}

// --- SiLU --------------------------------------------------------------------

Tensor SiLU::forward(const Tensor& x, bool keep) {
  Tensor y = x;
  for (float& v : y.data) v = v * sigmoidf(v);
  if (keep) saved_x_ = x;
  return y;
}

Tensor SiLU::backward(const Tensor& dy) {
  Tensor dx = dy;
  for (size_t i = 0; i < dx.data.size(); ++i) {
    const float x = saved_x_.data[i];
    const float s = sigmoidf(x);
    dx.data[i] = dy.data[i] * (s * (1.0f + x * (1.0f - s)));
  }
  return dx;
}

// --- Linear ------------------------------------------------------------------

Linear::Linear(ParamStore& store, const std::string& name, int in_features, int out_features,
               core::SplitRng& init_rng)
    : in_features_(in_features), out_features_(out_features) {
  weight_ = store.create(name + ".weight", {out_features, in_features});
  bias_ = store.create(name + ".bias", {out_features});
  const float scale = std::sqrt(2.0f / static_cast<float>(in_features));
  for (float& v : weight_->value) v = scale * init_rng.normal_float();
}

std::vector<float> Linear::forward(const std::vector<float>& x, bool keep) {
  if (static_cast<int>(x.size()) != in_features_) throw core::Error("Linear: size mismatch");
  std::vector<float> y(static_cast<size_t>(out_features_));
  for (int o = 0; o < out_features_; ++o) {
    const float* row = weight_->value.data() + static_cast<size_t>(o) * in_features_;
    float acc = bias_->value[static_cast<size_t>(o)];
    for (int i = 0; i < in_features_; ++i) acc += row[i] * x[static_cast<size_t>(i)];
    y[static_cast<size_t>(o)] = acc;
  }
  if (keep) saved_x_ = x;
  return y;
}

std::vector<float> Linear::backward(const std::vector<float>& dy) {
  std::vector<float> dx(static_cast<size_t>(in_features_), 0.0f);
  for (int o = 0; o < out_features_; ++o) {
    const float g = dy[static_cast<size_t>(o)];
    bias_->grad[static_cast<size_t>(o)] += g;
    float* wg = weight_->grad.data() + static_cast<size_t>(o) * in_features_;
    const float* w = weight_->value.data() + static_cast<size_t>(o) * in_features_;
    for (int i = 0; i < in_features_; ++i) {
      wg[i] += g * saved_x_[static_cast<size_t>(i)];
      dx[static_cast<size_t>(i)] += g * w[i];
    }
  }
  return dx;
}

// --- ResBlock ----------------------------------------------------------------

ResBlock::ResBlock(ParamStore& store, const std::string& name, int channels, int time_dim,
                   int groups, core::SplitRng& init_rng)
    : channels_(channels),
      gn1_(store, name + ".gn1", channels, groups),
      conv1_(store, name + ".conv1", channels, channels, 1, false, init_rng),
      film_(store, name + ".film", time_dim, 2 * channels, init_rng),
      gn2_(store, name + ".gn2", channels, groups),
      conv2_(store, name + ".conv2", channels, channels, 1, true, init_rng) {}

Tensor ResBlock::forward(const Tensor& x, const std::vector<float>& temb, bool keep) {
  Tensor h = conv1_.forward(act1_.forward(gn1_.forward(x, keep), keep), keep);
  const std::vector<float> film = film_.forward(temb, keep);
  const size_t plane = static_cast<size_t>(h.height) * h.width;
  if (keep) {
    saved_pre_film_ = h;
    saved_scale_.assign(film.begin(), film.begin() + channels_);
  }
  for (int c = 0; c < channels_; ++c) {
    const float s = 1.0f + film[static_cast<size_t>(c)];
    const float b = film[static_cast<size_t>(channels_ + c)];
    float* row = h.data.data() + static_cast<size_t>(c) * plane;
    for (size_t i = 0; i < plane; ++i) row[i] = row[i] * s + b;
  }
  h = conv2_.forward(act2_.forward(gn2_.forward(h, keep), keep), keep);
  for (size_t i = 0; i < h.data.size(); ++i) h.data[i] += x.data[i];
  return h;
}

Tensor ResBlock::backward(const Tensor& dy, std::vector<float>& dtemb) {
  Tensor dh = gn2_.backward(act2_.backward(conv2_.backward(dy)));
  const size_t plane = static_cast<size_t>(dh.height) * dh.width;
  std::vector<float> dfilm(static_cast<size_t>(2 * channels_), 0.0f);
  for (int c = 0; c < channels_; ++c) {
    const float s = 1.0f + saved_scale_[static_cast<size_t>(c)];
    const float* pre = saved_pre_film_.data.data() + static_cast<size_t>(c) * plane;
    float* row = dh.data.data() + static_cast<size_t>(c) * plane;
    double dscale = 0.0, dshift = 0.0;
    for (size_t i = 0; i < plane; ++i) {
      dscale += static_cast<double>(row[i]) * pre[i];
      dshift += row[i];
      row[i] *= s;
    }
    dfilm[static_cast<size_t>(c)] = static_cast<float>(dscale);
    dfilm[static_cast<size_t>(channels_ + c)] = static_cast<float>(dshift);
  }
  const std::vector<float> dtemb_part = film_.backward(dfilm);
  for (size_t i = 0; i < dtemb.size(); ++i) dtemb[i] += dtemb_part[i];
  Tensor dx = gn1_.backward(act1_.backward(conv1_.backward(dh)));
  for (size_t i = 0; i < dx.data.size(); ++i) dx.data[i] += dy.data[i];
  return dx;
}

// --- Spatial resampling ------------------------------------------------------

Tensor upsample2(const Tensor& x) {
  Tensor y = Tensor::zeros(x.channels, x.height * 2, x.width * 2);
  for (int c = 0; c < x.channels; ++c) {
    for (int yy = 0; yy < y.height; ++yy) {
      const float* src = x.data.data() + (static_cast<size_t>(c) * x.height + yy / 2) * x.width;
      float* dst = y.data.data() + (static_cast<size_t>(c) * y.height + yy) * y.width;
      for (int xx = 0; xx < y.width; ++xx) dst[xx] = src[xx / 2];
    }
  }
  return y;
}

Tensor upsample2_backward(const Tensor& dy) {
  Tensor dx = Tensor::zeros(dy.channels, dy.height / 2, dy.width / 2);
  for (int c = 0; c < dy.channels; ++c) {
    for (int yy = 0; yy < dy.height; ++yy) {
      const float* src = dy.data.data() + (static_cast<size_t>(c) * dy.height + yy) * dy.width;
      float* dst = dx.data.data() + (static_cast<size_t>(c) * dx.height + yy / 2) * dx.width;
      for (int xx = 0; xx < dy.width; ++xx) dst[xx / 2] += src[xx];
    }
  }
  return dx;
}

std::vector<float> time_embedding(double t, int dim) {
  const int half = dim / 2;
  std::vector<float> emb(static_cast<size_t>(dim));
  for (int i = 0; i < half; ++i) {
    const double freq = std::pow(1000.0, static_cast<double>(i) / (half - 1));
    emb[static_cast<size_t>(i)] = static_cast<float>(std::sin(t * freq));
    emb[static_cast<size_t>(half + i)] = static_cast<float>(std::cos(t * freq));
  }
  return emb;
}

}  // namespace gridflow::flow
