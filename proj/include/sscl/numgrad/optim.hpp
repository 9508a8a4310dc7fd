#pragma once

#include "sscl/numgrad/tensor.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace sscl::numgrad {

struct AdamWOptions {
  double learning_rate = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
};

// Per-parameter moment accumulators plus the shared step counter.
struct OptimState {
  AdamWOptions options;
  std::vector<Vector> first_moment;
  std::vector<Vector> second_moment;
  std::uint64_t step = 0;
};

OptimState make_optim_state(std::span<Parameter* const> params, AdamWOptions options = {});

// One AdamW update with decoupled weight decay:
//   w <- w - lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * w)
// Uses state.options.learning_rate. Gradients are validated before anything is
// modified; a NaN/Inf gradient throws Error{NonFiniteGradient}.
void adamw_step(std::span<Parameter* const> params, OptimState& state);

// Exponential decay applied once per epoch.
struct LrSchedule {
  double base_lr = 2e-4;
  double gamma = 0.99;
};

double lr_at(const LrSchedule& schedule, std::uint64_t epoch);

}  // namespace sscl::numgrad
