#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sig/observation.hpp"
#include "sig/points.hpp"
#include "sig/rng.hpp"

namespace sig::theory {

// ---- cross-entropy bound ordering ---------------------------------------------

// Finite-support mixing distribution: atoms (rows, dimension dx) with
// probabilities summing to 1.
struct AtomicMixing {
  Points atoms;
  std::vector<double> probabilities;
};

inline constexpr std::uint64_t kEnumerationLimit = 1'000'000;

// Exact E over all J^M ordered theta draws of
//   -(1/N) sum_i log (1/M) sum_j p(x_i | theta_j).
// Throws ConfigError when J^M exceeds kEnumerationLimit.
double exact_hm(const Points& x, const AtomicMixing& mixing, const model::ObservationModel& obs, std::size_t m);

// -(1/N) sum_i log sum_a pi_a p(x_i | atom_a): the M -> infinity limit.
double exact_mixture_cross_entropy(const Points& x, const AtomicMixing& mixing, const model::ObservationModel& obs);

// Monte-Carlo version of exact_hm with its standard error.
struct Estimate {
  double mean = 0;
  double standard_error = 0;
};
Estimate monte_carlo_hm(const Points& x, const AtomicMixing& mixing, const model::ObservationModel& obs,
                        std::size_t m, std::size_t trials, Rng& rng);

// ---- optimal assignment on a separated multi-modal space -------------------------

struct AssignmentProblem {
  std::vector<double> n;  // data counts per mode, summing to N
  double total_m = 0;     // M
  double u = 0;           // expected in-mode affinity
  double v = 0;           // expected cross-mode affinity, 0 < v < u
};

// -sum_k n_k log(m_k u + (M - m_k) v).
double assignment_objective(const AssignmentProblem& p, std::span<const double> m);

struct ClosedForm {
  std::vector<double> m;             // unconstrained stationary point
  std::vector<bool> survives;        // n_k > (N/K) / (1 + (u - v)/(K v))
  double threshold = 0;
  bool interior = true;              // every m_k >= 0
  std::vector<double> constrained;   // == m when interior, else numeric optimum
  std::vector<std::int64_t> rounded; // constrained, rounded to integers summing to M
};

// Largest-remainder rounding of nonnegative reals to integers with the given
// total (ties go to the lower index).
std::vector<std::int64_t> round_assignment(std::span<const double> m, std::int64_t total);

ClosedForm assignment_closed_form(const AssignmentProblem& p);

struct NumericOptimum {
  std::vector<double> m;
  double multiplier = 0;  // Lagrange multiplier of sum m = M
  double objective = 0;
  int iterations = 0;
};

// Nonnegative, sum-constrained minimizer found by bisection on the Lagrange
// multiplier (m_k = max(0, n_k / beta - M v / (u - v))). Independent of the
// closed form. Throws NumericalError if the bracket does not close.
NumericOptimum assignment_numeric_opt(const AssignmentProblem& p);

// Largest violation of the KKT conditions at m (stationarity on the support,
// reduced-gradient sign off it, feasibility).
double kkt_residual(const AssignmentProblem& p, std::span<const double> m, double multiplier);

// ---- affinity ratio for Gaussian modes -------------------------------------------

struct RatioCheck {
  double closed_form = 0;
  double monte_carlo = 0;
  double standard_error = 0;
  double u_hat = 0;
  double v_hat = 0;
};

// v / (u - v) = 1 / (e^{c^2/6} - 1) for x, theta ~ N(mu, I) in `dim`
// dimensions with centers 0 (u) or c apart (v); RBF exp(-|x - theta|^2 / 2).
RatioCheck affinity_ratio(double c, std::size_t dim, std::size_t samples, Rng& rng);

// Monte-Carlo E exp(-chi) for chi ~ noncentral chi-squared(dim, lambda),
// against the closed form 3^{-dim/2} e^{-lambda/3}.
RatioCheck chi_square_mgf_check(std::size_t dim, double noncentrality, std::size_t samples, Rng& rng);

}  // namespace sig::theory
