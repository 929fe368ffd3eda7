#pragma once

#include "gridflow/core/rng.hpp"
#include "gridflow/flow/tensor.hpp"

namespace gridflow::flow {

// Straight-line interpolation x_t = t*x0 + (1-t)*x1: t=0 is pure noise x1,
// t=1 is the clean sample x0.
Tensor interpolate(const Tensor& x0, const Tensor& x1, double t);

// The constant velocity x0 - x1 that drives the straight-line flow.
Tensor target_velocity(const Tensor& x0, const Tensor& x1);

// Logit-normal timestep: sigmoid(mu + sigma*z), z standard normal. Always
// strictly inside (0, 1); concentrates training on mid-trajectory times.
double sample_timestep(core::SplitRng& rng, double mu, double sigma);

}  // namespace gridflow::flow
