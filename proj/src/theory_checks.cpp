#include "sig/theory_checks.hpp"

#include <algorithm>
#include <cmath>

#include "sig/error.hpp"
#include "sig/theory.hpp"

namespace sig::theory {
namespace {

constexpr double kOrderingMargin = 1e-10;
constexpr double kAgreementTolerance = 1e-6;
constexpr double kVanishTolerance = 1e-9;
constexpr double kKktTolerance = 1e-6;
constexpr double kStandardErrors = 3.0;
constexpr double kSumTolerance = 1e-12;

Points uniform_points(Rng& rng, std::size_t count, std::size_t dim, double lo, double hi) {
  Points p(dim, std::vector<double>(count * dim));
  for (double& v : p.coords) v = lo + (hi - lo) * rng.uniform();
  return p;
}

AssignmentProblem random_problem(Rng& rng) {
  AssignmentProblem p;
  const std::size_t k = 2 + rng.index(9);
  p.u = 0.5 + 0.5 * rng.uniform();
  p.v = p.u * (0.01 + 0.5 * rng.uniform());
  p.total_m = static_cast<double>(10 + rng.index(991));
  p.n.resize(k);
  for (double& n : p.n) n = static_cast<double>(1 + rng.index(200));
  return p;
}

}  // namespace

nlohmann::json to_json(const CheckResult& r) {
  return {{"check", r.name}, {"passed", r.passed}, {"details", r.details}};
}

CheckResult check_bound_ordering(std::uint64_t seed) {
  CheckResult out{"bound-ordering", true, nlohmann::json::array()};
  Rng rng = Rng(seed).derive("bound-ordering");
  const auto obs = model::ObservationModel::gaussian(1.0);
  for (int inst = 0; inst < 5; ++inst) {
    const Points x = uniform_points(rng, 6, 2, -2.0, 2.0);
    AtomicMixing mix{uniform_points(rng, 3, 2, -2.0, 2.0), {}};
    double total = 0;
    for (int a = 0; a < 3; ++a) mix.probabilities.push_back(0.2 + rng.uniform());
    for (double& p : mix.probabilities) total += p;
    for (double& p : mix.probabilities) p /= total;

    std::vector<double> h;
    for (std::size_t m = 1; m <= 4; ++m) h.push_back(exact_hm(x, mix, obs, m));
    const double limit = exact_mixture_cross_entropy(x, mix, obs);
    double min_gap = INFINITY;
    for (std::size_t m = 0; m + 1 < h.size(); ++m) min_gap = std::min(min_gap, h[m] - h[m + 1]);
    const bool ok = min_gap > kOrderingMargin && h.back() >= limit;
    out.passed = out.passed && ok;
    out.details.push_back({{"instance", inst}, {"h_m", h}, {"mixture_cross_entropy", limit},
                           {"min_gap", min_gap}, {"margin", kOrderingMargin}, {"passed", ok}});
  }
  return out;
}

CheckResult check_optimal_assignment(std::uint64_t seed) {
  CheckResult out{"optimal-assignment", true, nlohmann::json::object()};
  Rng rng = Rng(seed).derive("optimal-assignment");

  std::size_t interior = 0, boundary = 0, draws = 0;
  double worst_agreement = 0, worst_kkt = 0, worst_sum = 0;
  std::size_t threshold_violations = 0;
  while ((interior < 100 || boundary < 20) && draws < 100000) {
    ++draws;
    AssignmentProblem p = random_problem(rng);
    // Push some draws toward the boundary by shrinking a few counts.
    if (rng.coin()) {
      for (double& n : p.n) {
        if (rng.uniform() < 0.3) n = static_cast<double>(1 + rng.index(5));
      }
    }
    const ClosedForm cf = assignment_closed_form(p);
    const NumericOptimum opt = assignment_numeric_opt(p);
    double sum = 0;
    for (double m : cf.m) sum += m;
    if (cf.interior && interior < 100) {
      ++interior;
      worst_sum = std::max(worst_sum, std::abs(sum - p.total_m) / p.total_m);
      for (std::size_t k = 0; k < p.n.size(); ++k) {
        worst_agreement = std::max(worst_agreement, std::abs(cf.m[k] - opt.m[k]));
      }
    } else if (!cf.interior && boundary < 20) {
      ++boundary;
      for (std::size_t k = 0; k < p.n.size(); ++k) {
        if (!cf.survives[k] && opt.m[k] > kVanishTolerance) ++threshold_violations;
      }
      worst_kkt = std::max(worst_kkt, kkt_residual(p, opt.m, opt.multiplier) /
                                          std::max(1.0, std::abs(opt.multiplier)));
    }
  }
  out.passed = interior == 100 && boundary == 20 && worst_agreement < kAgreementTolerance &&
               threshold_violations == 0 && worst_kkt < kKktTolerance && worst_sum < kSumTolerance;
  out.details = {{"interior_instances", interior},
                 {"boundary_instances", boundary},
                 {"max_abs_difference", worst_agreement},
                 {"tolerance", kAgreementTolerance},
                 {"max_relative_sum_error", worst_sum},
                 {"threshold_violations", threshold_violations},
                 {"max_relative_kkt_residual", worst_kkt},
                 {"kkt_tolerance", kKktTolerance}};
  return out;
}

CheckResult check_affinity_ratio(std::uint64_t seed, std::size_t samples) {
  CheckResult out{"affinity-ratio", true, nlohmann::json::array()};
  const Rng root = Rng(seed).derive("affinity-ratio");
  for (int c = 1; c <= 3; ++c) {
    Rng rng = root.derive(static_cast<std::uint64_t>(c));
    const RatioCheck r = affinity_ratio(c, 2, samples, rng);
    const double z = std::abs(r.monte_carlo - r.closed_form) / r.standard_error;
    const bool ok = z < kStandardErrors;
    out.passed = out.passed && ok;
    out.details.push_back({{"c", c}, {"closed_form", r.closed_form}, {"monte_carlo", r.monte_carlo},
                           {"standard_error", r.standard_error}, {"z", z}, {"passed", ok}});
  }
  Rng rng = root.derive("mgf");
  const RatioCheck mgf = chi_square_mgf_check(2, 0.0, samples, rng);
  const double z = std::abs(mgf.monte_carlo - mgf.closed_form) / mgf.standard_error;
  const bool ok = z < kStandardErrors;
  out.passed = out.passed && ok;
  out.details.push_back({{"mgf_dim", 2}, {"noncentrality", 0}, {"closed_form", mgf.closed_form},
                         {"monte_carlo", mgf.monte_carlo}, {"standard_error", mgf.standard_error}, {"z", z},
                         {"passed", ok}});
  return out;
}

std::vector<CheckResult> run_theory_checks(const std::string& which, std::uint64_t seed) {
  if (which == "ordering" || which == "lemma1") return {check_bound_ordering(seed)};
  if (which == "assignment" || which == "theorem1") return {check_optimal_assignment(seed)};
  if (which == "ratio" || which == "corollary1") return {check_affinity_ratio(seed)};
  if (which == "all") return {check_bound_ordering(seed), check_optimal_assignment(seed), check_affinity_ratio(seed)};
  throw ConfigError("unknown theory check '" + which + "' (expected ordering, assignment, ratio or all)");
}

}  // namespace sig::theory
