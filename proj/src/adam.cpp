#include "sig/adam.hpp"

#include <cmath>

#include "sig/error.hpp"

namespace sig::ad {

AdamState make_adam_state(std::span<Parameter* const> params) {
  AdamState s;
  for (const Parameter* p : params) {
    s.first_moment.emplace_back(p->value.shape(), 0.0);
    s.second_moment.emplace_back(p->value.shape(), 0.0);
  }
  return s;
}

void adam_step(std::span<Parameter* const> params, AdamState& state, const AdamConfig& config) {
  if (params.size() != state.first_moment.size() || params.size() != state.second_moment.size()) {
    throw ShapeError("adam_step: " + std::to_string(params.size()) + " parameters but state holds " +
                     std::to_string(state.first_moment.size()));
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    const Parameter& p = *params[k];
    if (p.grad.shape() != p.value.shape() || state.first_moment[k].shape() != p.value.shape()) {
      throw ShapeError("adam_step: shape mismatch for '" + p.name + "': value " + shape_string(p.value.shape()) +
                       ", grad " + shape_string(p.grad.shape()) + ", moment " +
                       shape_string(state.first_moment[k].shape()));
    }
    if (!p.grad.all_finite()) throw NumericalError("adam_step: non-finite gradient for parameter '" + p.name + "'");
  }

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);

  for (std::size_t k = 0; k < params.size(); ++k) {
    auto value = params[k]->value.values();
    const auto grad = params[k]->grad.values();
    auto m = state.first_moment[k].values();
    auto v = state.second_moment[k].values();
    for (std::size_t i = 0; i < value.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * grad[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      value[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

}  // namespace sig::ad
