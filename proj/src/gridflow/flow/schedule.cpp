#include "gridflow/flow/schedule.hpp"

#include <cmath>

namespace gridflow::flow {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* where) {
  if (!a.same_shape(b)) throw core::Error(std::string(where) + ": shape mismatch");
}

}  // namespace

Tensor interpolate(const Tensor& x0, const Tensor& x1, double t) {
  require_same_shape(x0, x1, "interpolate");
  const float tf = static_cast<float>(t);
  Tensor out = x0;
  for (size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = tf * x0.data[i] + (1.0f - tf) * x1.data[i];
  }
  return out;
}

Tensor target_velocity(const Tensor& x0, const Tensor& x1) {
  require_same_shape(x0, x1, "target_velocity");
  Tensor out = x0;
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = x0.data[i] - x1.data[i];
  return out;
}

double sample_timestep(core::SplitRng& rng, double mu, double sigma) {
  if (sigma <= 0.0) throw core::Error("sample_timestep: sigma must be positive");
  const double z = mu + sigma * rng.normal();
  return 1.0 / (1.0 + std::exp(-z));
}

}  // namespace gridflow::flow
