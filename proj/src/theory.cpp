#include "sig/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sig/error.hpp"

namespace sig::theory {
namespace {

void validate_mixing(const Points& x, const AtomicMixing& mixing) {
  if (x.empty()) throw ConfigError("need at least one data point");
  if (mixing.atoms.empty() || mixing.atoms.size() != mixing.probabilities.size()) {
    throw ConfigError("mixing distribution needs one probability per atom");
  }
  if (mixing.atoms.dim != x.dim) throw ShapeError("atoms and data points differ in dimension");
  double total = 0.0;
  for (double p : mixing.probabilities) {
    if (!(p >= 0)) throw ConfigError("mixing probabilities must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("mixing probabilities must sum to 1");
}

// log p(x_i | atom_a), [N x J] row-major.
std::vector<double> log_density_table(const Points& x, const AtomicMixing& mixing,
                                      const model::ObservationModel& obs) {
  const std::size_t n = x.size(), J = mixing.atoms.size();
  std::vector<double> table(n * J);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < J; ++a) table[i * J + a] = obs.log_density(x.row(i), mixing.atoms.row(a));
  return table;
}

double log_mean_exp(std::span<const double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double e : v) s += std::exp(e - m);
  return m + std::log(s / static_cast<double>(v.size()));
}

// -(1/N) sum_i log (1/M) sum_j p(x_i | atom_{draw_j})
double batch_bound(const std::vector<double>& table, std::size_t n, std::size_t J, std::span<const std::size_t> draw,
                   std::vector<double>& scratch) {
  double acc = 0.0;
  scratch.resize(draw.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < draw.size(); ++j) scratch[j] = table[i * J + draw[j]];
    acc += log_mean_exp(scratch);
  }
  return -acc / static_cast<double>(n);
}

void validate_problem(const AssignmentProblem& p) {
  if (p.n.empty()) throw ConfigError("assignment problem needs at least one mode");
  if (!(p.v > 0)) throw ConfigError("cross-mode affinity v must be positive");
  if (!(p.u > p.v)) {
    throw ConfigError("in-mode affinity u must exceed cross-mode affinity v (modes not separated): u=" +
                      std::to_string(p.u) + " v=" + std::to_string(p.v));
  }
  if (!(p.total_m > 0)) throw ConfigError("M must be positive");
  for (double c : p.n) {
    if (!(c >= 0)) throw ConfigError("mode counts must be nonnegative");
  }
}

}  // namespace

double exact_hm(const Points& x, const AtomicMixing& mixing, const model::ObservationModel& obs, std::size_t m) {
  validate_mixing(x, mixing);
  if (m == 0) throw ConfigError("exact_hm: M must be positive");
  const std::size_t J = mixing.atoms.size();
  std::uint64_t combos = 1;
  for (std::size_t k = 0; k < m; ++k) {
    if (combos > kEnumerationLimit / J) {
      throw ConfigError("exact_hm: J^M = " + std::to_string(J) + "^" + std::to_string(m) +
                        " exceeds the enumeration bound of 1e6; use monte_carlo_hm instead");
    }
    combos *= J;
  }
  const auto table = log_density_table(x, mixing, obs);
  std::vector<std::size_t> draw(m, 0);
  std::vector<double> scratch;
  double expectation = 0.0;
  for (std::uint64_t c = 0; c < combos; ++c) {
    double weight = 1.0;
    for (auto a : draw) weight *= mixing.probabilities[a];
    if (weight > 0) expectation += weight * batch_bound(table, x.size(), J, draw, scratch);
    for (std::size_t d = 0; d < m; ++d) {
      if (++draw[d] < J) break;
      draw[d] = 0;
    }
  }
  return expectation;
}

double exact_mixture_cross_entropy(const Points& x, const AtomicMixing& mixing, const model::ObservationModel& obs) {
  validate_mixing(x, mixing);
  const std::size_t J = mixing.atoms.size();
  const auto table = log_density_table(x, mixing, obs);
  double acc = 0.0;
  std::vector<double> terms(J);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < J; ++a) {
      terms[a] = mixing.probabilities[a] > 0 ? std::log(mixing.probabilities[a]) + table[i * J + a]
                                             : -std::numeric_limits<double>::infinity();
      mx = std::max(mx, terms[a]);
    }
    double s = 0.0;
    for (double t : terms) s += std::exp(t - mx);
    acc += mx + std::log(s);
  }
  return -acc / static_cast<double>(x.size());
}

Estimate monte_carlo_hm(const Points& x, const AtomicMixing& mixing, const model::ObservationModel& obs,
                        std::size_t m, std::size_t trials, Rng& rng) {
  validate_mixing(x, mixing);
  if (m == 0 || trials < 2) throw ConfigError("monte_carlo_hm: need M >= 1 and at least two trials");
  const std::size_t J = mixing.atoms.size();
  const auto table = log_density_table(x, mixing, obs);
  std::discrete_distribution<std::size_t> pick(mixing.probabilities.begin(), mixing.probabilities.end());
  std::vector<std::size_t> draw(m);
  std::vector<double> scratch;
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    for (auto& d : draw) d = pick(rng.engine());
    const double v = batch_bound(table, x.size(), J, draw, scratch);
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(trials);
  const double mean = sum / n;
  const double var = std::max(sum_sq / n - mean * mean, 0.0) * n / (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

double assignment_objective(const AssignmentProblem& p, std::span<const double> m) {
  double f = 0.0;
  for (std::size_t k = 0; k < p.n.size(); ++k) {
    if (p.n[k] == 0) continue;
    f -= p.n[k] * std::log(m[k] * p.u + (p.total_m - m[k]) * p.v);
  }
  return f;
}

ClosedForm assignment_closed_form(const AssignmentProblem& p) {
  validate_problem(p);
  const double K = static_cast<double>(p.n.size());
  const double N = std::accumulate(p.n.begin(), p.n.end(), 0.0);
  if (!(N > 0)) throw ConfigError("total data count N must be positive");
  const double bias = K * p.v / (p.u - p.v);
  ClosedForm cf;
  cf.threshold = (N / K) / (1.0 + (p.u - p.v) / (K * p.v));
  for (double nk : p.n) {
    const double share = nk / N + (nk / N - 1.0 / K) * bias;
    cf.m.push_back(p.total_m * share);
    cf.survives.push_back(nk > cf.threshold);
    if (share < 0) cf.interior = false;
  }
  cf.constrained = cf.interior ? cf.m : assignment_numeric_opt(p).m;
  cf.rounded = round_assignment(cf.constrained, std::llround(p.total_m));
  return cf;
}

std::vector<std::int64_t> round_assignment(std::span<const double> m, std::int64_t total) {
  std::vector<std::int64_t> out(m.size());
  std::vector<std::size_t> order(m.size());
  std::int64_t assigned = 0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    out[k] = static_cast<std::int64_t>(std::floor(std::max(0.0, m[k])));
    assigned += out[k];
    order[k] = k;
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return m[a] - std::floor(m[a]) > m[b] - std::floor(m[b]);
  });
  for (std::size_t i = 0; assigned < total && !order.empty(); i = (i + 1) % order.size()) {
    ++out[order[i]];
    ++assigned;
  }
  return out;
}

NumericOptimum assignment_numeric_opt(const AssignmentProblem& p) {
  validate_problem(p);
  const double M = p.total_m;
  const double offset = M * p.v / (p.u - p.v);
  auto allocation = [&](double beta, std::vector<double>& m) {
    double s = 0.0;
    for (std::size_t k = 0; k < p.n.size(); ++k) {
      m[k] = std::max(0.0, p.n[k] / beta - offset);
      s += m[k];
    }
    return s;
  };

  const double n_max = *std::max_element(p.n.begin(), p.n.end());
  if (!(n_max > 0)) throw ConfigError("total data count N must be positive");
  std::vector<double> m(p.n.size());
  // allocation(beta) is nonincreasing; it is zero at beta_hi.
  double hi = n_max / offset;
  double lo = hi;
  int iterations = 0;
  while (allocation(lo, m) < M) {
    lo *= 0.5;
    if (++iterations > 2000) throw NumericalError("assignment_numeric_opt: could not bracket the multiplier");
  }
  for (int it = 0; it < 400 && hi - lo > std::numeric_limits<double>::epsilon() * hi; ++it, ++iterations) {
    const double mid = 0.5 * (lo + hi);
    if (allocation(mid, m) >= M) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double beta = 0.5 * (lo + hi);
  const double total = allocation(beta, m);
  const double residual = std::abs(total - M);
  if (residual > 1e-9 * M) {
    throw NumericalError("assignment_numeric_opt: did not converge, |sum m - M| = " + std::to_string(residual));
  }
  NumericOptimum out;
  out.m = m;
  out.multiplier = beta;
  out.objective = assignment_objective(p, m);
  out.iterations = iterations;
  return out;
}

double kkt_residual(const AssignmentProblem& p, std::span<const double> m, double multiplier) {
  double worst = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < p.n.size(); ++k) {
    total += m[k];
    worst = std::max(worst, -m[k]);
    const double grad = -p.n[k] * (p.u - p.v) / (m[k] * (p.u - p.v) + p.total_m * p.v);
    const double reduced = grad + multiplier;
    if (m[k] > 1e-12 * p.total_m) {
      worst = std::max(worst, std::abs(reduced) / multiplier);
    } else {
      worst = std::max(worst, -reduced / multiplier);
    }
  }
  return std::max(worst, std::abs(total - p.total_m) / p.total_m);
}

RatioCheck affinity_ratio(double c, std::size_t dim, std::size_t samples, Rng& rng) {
  if (!(c > 0)) throw ConfigError("affinity_ratio: c must be positive (u = v at c = 0)");
  if (dim == 0 || samples < 2) throw ConfigError("affinity_ratio: need dim >= 1 and at least two samples");
  RatioCheck r;
  r.closed_form = 1.0 / std::expm1(c * c / 6.0);
  double su = 0, sv = 0, suu = 0, svv = 0, suv = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    double du = 0.0, dv = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double x = rng.normal();
      const double tu = rng.normal();
      const double tv = (d == 0 ? c : 0.0) + rng.normal();
      du += (x - tu) * (x - tu);
      dv += (x - tv) * (x - tv);
    }
    const double ru = std::exp(-0.5 * du);
    const double rv = std::exp(-0.5 * dv);
    su += ru;
    sv += rv;
    suu += ru * ru;
    svv += rv * rv;
    suv += ru * rv;
  }
  const double n = static_cast<double>(samples);
  const double u = su / n, v = sv / n;
  const double var_u = (suu / n - u * u) * n / (n - 1);
  const double var_v = (svv / n - v * v) * n / (n - 1);
  const double cov = (suv / n - u * v) * n / (n - 1);
  r.u_hat = u;
  r.v_hat = v;
  r.monte_carlo = v / (u - v);
  // delta method for g(u, v) = v / (u - v)
  const double gu = -v / ((u - v) * (u - v));
  const double gv = u / ((u - v) * (u - v));
  const double var = (gu * gu * var_u + gv * gv * var_v + 2 * gu * gv * cov) / n;
  r.standard_error = std::sqrt(std::max(var, 0.0));
  return r;
}

RatioCheck chi_square_mgf_check(std::size_t dim, double noncentrality, std::size_t samples, Rng& rng) {
  if (dim == 0 || samples < 2 || !(noncentrality >= 0)) throw ConfigError("chi_square_mgf_check: invalid arguments");
  RatioCheck r;
  r.closed_form = std::pow(3.0, -0.5 * static_cast<double>(dim)) * std::exp(-noncentrality / 3.0);
  const double shift = std::sqrt(noncentrality);
  double s = 0, ss = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    double chi = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double z = (d == 0 ? shift : 0.0) + rng.normal();
      chi += z * z;
    }
    const double e = std::exp(-chi);
    s += e;
    ss += e * e;
  }
  const double n = static_cast<double>(samples);
  r.monte_carlo = s / n;
  r.standard_error = std::sqrt(std::max(ss / n - r.monte_carlo * r.monte_carlo, 0.0) / (n - 1));
  return r;
}

}  // namespace sig::theory
