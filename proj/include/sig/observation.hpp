#pragma once

#include <span>
#include <string>

#include "sig/autodiff.hpp"
#include "sig/points.hpp"
#include "sig/rng.hpp"

namespace sig::model {

// Explicit conditional p(x | theta): isotropic Gaussian N(theta, sigma^2 I)
// or independent Poisson(theta) per coordinate.
class ObservationModel {
 public:
  enum class Kind { gaussian, poisson };

  static ObservationModel gaussian(double sigma);
  static ObservationModel poisson();

  Kind kind() const { return kind_; }
  double sigma() const { return sigma_; }
  std::string name() const;

  // [N x M] matrix of log p(x_i | theta_j), differentiable in theta.
  ad::Var log_density(ad::Graph& g, ad::Var x, ad::Var theta) const;

  // log p(x | theta) for one pair of rows.
  double log_density(std::span<const double> x, std::span<const double> theta) const;

  // One draw x_j ~ p(x | theta_j) per row of theta.
  Points sample(const Tensor& theta, Rng& rng) const;

  // Throws ConfigError unless every entry of x is a valid observation.
  void validate_x(std::span<const double> x) const;

 private:
  ObservationModel(Kind k, double s) : kind_(k), sigma_(s) {}
  Kind kind_;
  double sigma_;
};

// Forward-only evaluation of the log-density matrix.
Tensor log_obs_density(const ObservationModel& obs, const Tensor& x, const Tensor& theta);

}  // namespace sig::model
