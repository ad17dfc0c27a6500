#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sig/autodiff.hpp"

namespace sig::ad {

struct AdamConfig {
  double learning_rate = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Moment accumulators for one parameter list, in list order.
struct AdamState {
  std::uint64_t step = 0;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
};

// Zero-initialized state matching the shapes of `params`.
AdamState make_adam_state(std::span<Parameter* const> params);

// One bias-corrected Adam update of every parameter from its `grad` field.
// All gradients are validated before any parameter is touched; a non-finite
// gradient raises NumericalError naming the parameter.
void adam_step(std::span<Parameter* const> params, AdamState& state, const AdamConfig& config);

}  // namespace sig::ad
