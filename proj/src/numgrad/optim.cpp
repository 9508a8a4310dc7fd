#include "sscl/numgrad/optim.hpp"

#include "sscl/error.hpp"

#include <cmath>

namespace sscl::numgrad {

OptimState make_optim_state(std::span<Parameter* const> params, AdamWOptions options) {
  OptimState state;
  state.options = options;
  state.first_moment.reserve(params.size());
  state.second_moment.reserve(params.size());
  for (const Parameter* p : params) {
    state.first_moment.push_back(Vector::Zero(p->size()));
    state.second_moment.push_back(Vector::Zero(p->size()));
  }
  return state;
}

void adamw_step(std::span<Parameter* const> params, OptimState& state) {
  if (params.size() != state.first_moment.size() || params.size() != state.second_moment.size()) {
    throw Error(ErrorCode::InvalidShape, "optimizer state does not match parameter list");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Parameter& p = *params[i];
    if (p.grad.size() != p.size() || state.first_moment[i].size() != p.size()) {
      throw Error(ErrorCode::InvalidShape, "gradient/moment length mismatch for " + p.name);
    }
    if (!p.grad.allFinite()) throw Error(ErrorCode::NonFiniteGradient, "non-finite gradient in " + p.name);
  }

  const AdamWOptions& o = state.options;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(o.beta1, t);
  const double correction2 = 1.0 - std::pow(o.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    Vector& m = state.first_moment[i];
    Vector& v = state.second_moment[i];
    m = o.beta1 * m + (1.0 - o.beta1) * p.grad;
    v = o.beta2 * v + (1.0 - o.beta2) * p.grad.cwiseAbs2();
    const auto m_hat = m.array() / correction1;
    const auto v_hat = v.array() / correction2;
    Vector& w = p.value.data();
    w.array() -= o.learning_rate * (m_hat / (v_hat.sqrt() + o.epsilon) + o.weight_decay * w.array());
  }
}

double lr_at(const LrSchedule& schedule, std::uint64_t epoch) {
  return schedule.base_lr * std::pow(schedule.gamma, static_cast<double>(epoch));
}

}  // namespace sscl::numgrad
