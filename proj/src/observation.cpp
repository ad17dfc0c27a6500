#include "sig/observation.hpp"

#include <cmath>
#include <numbers>

#include "sig/error.hpp"

namespace sig::model {

ObservationModel ObservationModel::gaussian(double sigma) {
  if (!(sigma > 0) || !std::isfinite(sigma)) {
    throw ConfigError("gaussian observation model needs sigma > 0, got " + std::to_string(sigma));
  }
  return ObservationModel(Kind::gaussian, sigma);
}

ObservationModel ObservationModel::poisson() { return ObservationModel(Kind::poisson, 0.0); }

std::string ObservationModel::name() const { return kind_ == Kind::gaussian ? "gaussian" : "poisson"; }

void ObservationModel::validate_x(std::span<const double> x) const {
  if (kind_ != Kind::poisson) return;
  for (double v : x) {
    if (!(v >= 0) || v != std::floor(v)) {
      throw ConfigError("poisson observation model needs nonnegative integer x, got " + std::to_string(v));
    }
  }
}

ad::Var ObservationModel::log_density(ad::Graph& g, ad::Var x, ad::Var theta) const {
  const Tensor& xv = x.value();
  const Tensor& tv = theta.value();
  if (xv.rank() != 2 || tv.rank() != 2 || xv.cols() != tv.cols()) {
    throw ShapeError("log_obs_density: shape mismatch " + shape_string(xv.shape()) + " vs " +
                     shape_string(tv.shape()));
  }
  const double dx = static_cast<double>(xv.cols());
  if (kind_ == Kind::gaussian) {
    const double norm = -0.5 * dx * std::log(2.0 * std::numbers::pi * sigma_ * sigma_);
    return ad::add_scalar(ad::scale(ad::pairwise_sq_dist(x, theta), -0.5 / (sigma_ * sigma_)), norm);
  }
  validate_x(xv.values());
  // sum_d x_id log theta_jd - theta_jd - log Gamma(x_id + 1)
  std::vector<double> lg(xv.rows());
  for (std::size_t i = 0; i < xv.rows(); ++i) {
    double s = 0.0;
    for (std::size_t d = 0; d < xv.cols(); ++d) s += std::lgamma(xv.at(i, d) + 1.0);
    lg[i] = -s;
  }
  ad::Var cross = ad::matmul(x, ad::transpose(ad::log(theta)));
  ad::Var with_rate = ad::add_row(cross, ad::neg(ad::sum(theta, 1)));
  return ad::add_col(with_rate, g.constant(Tensor::vector(std::move(lg))));
}

double ObservationModel::log_density(std::span<const double> x, std::span<const double> theta) const {
  if (x.size() != theta.size()) throw ShapeError("log_density: x and theta differ in dimension");
  if (kind_ == Kind::gaussian) {
    double sq = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) sq += (x[d] - theta[d]) * (x[d] - theta[d]);
    return -0.5 * static_cast<double>(x.size()) * std::log(2.0 * std::numbers::pi * sigma_ * sigma_) -
           sq / (2.0 * sigma_ * sigma_);
  }
  validate_x(x);
  double s = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    if (!(theta[d] > 0)) throw NumericalError("poisson rate must be positive");
    s += x[d] * std::log(theta[d]) - theta[d] - std::lgamma(x[d] + 1.0);
  }
  return s;
}

Points ObservationModel::sample(const Tensor& theta, Rng& rng) const {
  if (theta.rank() != 2) throw ShapeError("sample: theta must be a matrix, got " + shape_string(theta.shape()));
  Points out(theta.cols(), std::vector<double>(theta.size()));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double t = theta[i];
    if (kind_ == Kind::gaussian) {
      out.coords[i] = t + sigma_ * rng.normal();
    } else {
      if (!(t > 0)) throw NumericalError("poisson rate must be positive, got " + std::to_string(t));
      out.coords[i] = static_cast<double>(rng.poisson(t));
    }
  }
  return out;
}

Tensor log_obs_density(const ObservationModel& obs, const Tensor& x, const Tensor& theta) {
  ad::Graph g;
  return obs.log_density(g, g.constant(x), g.constant(theta)).value();
}

}  // namespace sig::model
