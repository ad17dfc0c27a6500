#include "sig/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "sig/error.hpp"

namespace sig::metrics {
namespace {

void require_centers(const data::DatasetSpec& spec) {
  if (!spec.has_centers()) {
    throw ConfigError("dataset '" + data::to_string(spec.kind) + "' has no mode centers to classify against");
  }
  if (!(spec.sigma_data > 0)) throw ConfigError("dataset spec needs sigma_data > 0");
}

void require_2d(const Points& samples) {
  if (!samples.empty() && samples.dim != 2) {
    throw ShapeError("mode metrics need 2-D samples, got dimension " + std::to_string(samples.dim));
  }
}

double kl(std::span<const double> p, std::span<const double> q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = std::max(p[i], kKlFloor);
    s += pi * std::log(pi / q[i]);
  }
  return std::max(s, 0.0);
}

// Standard-normal CDF.
double phi(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace

std::vector<int> classify_samples(const Points& samples, const data::DatasetSpec& spec) {
  require_centers(spec);
  require_2d(samples);
  const double radius = 3.0 * spec.sigma_data;
  std::vector<int> labels(samples.size(), kReject);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int best_k = kReject;
    for (std::size_t k = 0; k < spec.centers.size(); ++k) {
      const double d = std::hypot(samples(i, 0) - spec.centers[k][0], samples(i, 1) - spec.centers[k][1]);
      if (d < best) {
        best = d;
        best_k = static_cast<int>(k);
      }
    }
    if (best <= radius) labels[i] = best_k;
  }
  return labels;
}

ReferenceBins reference_bins(const data::DatasetSpec& spec) {
  require_centers(spec);
  // Mass of component j inside the disc of radius R around center k: 1-D
  // quadrature over the x offset with the exact normal CDF in y.
  const double s = spec.sigma_data;
  const double radius = 3.0 * s;
  const std::size_t K = spec.centers.size();
  auto disc_mass = [&](std::size_t j, std::size_t k) {
    const double dx = spec.centers[k][0] - spec.centers[j][0];
    const double dy = spec.centers[k][1] - spec.centers[j][1];
    if (j == k) return -std::expm1(-radius * radius / (2.0 * s * s));
    if (std::hypot(dx, dy) - radius > 12.0 * s) return 0.0;
    constexpr int steps = 2000;
    const double h = 2.0 * radius / steps;
    double acc = 0.0;
    for (int i = 0; i <= steps; ++i) {
      const double u = -radius + h * i;
      const double half = std::sqrt(std::max(radius * radius - u * u, 0.0));
      const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      const double density = std::exp(-0.5 * std::pow((dx + u) / s, 2)) / (s * std::sqrt(2.0 * std::numbers::pi));
      acc += w * density * (phi((dy + half) / s) - phi((dy - half) / s));
    }
    return acc * h / 3.0;
  };
  ReferenceBins bins;
  bins.mode_mass.assign(K, 0.0);
  double inside = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t j = 0; j < K; ++j) bins.mode_mass[k] += spec.weights[j] * disc_mass(j, k);
    inside += bins.mode_mass[k];
  }
  bins.reject_mass = std::max(1.0 - inside, 0.0);
  return bins;
}

std::vector<double> posterior_probabilities(const Points& samples, const data::DatasetSpec& spec) {
  require_centers(spec);
  require_2d(samples);
  const std::size_t K = spec.centers.size();
  const double inv = 1.0 / (2.0 * spec.sigma_data * spec.sigma_data);
  std::vector<double> out(samples.size() * K);
  std::vector<double> logits(K);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < K; ++k) {
      const double dx = samples(i, 0) - spec.centers[k][0];
      const double dy = samples(i, 1) - spec.centers[k][1];
      logits[k] = std::log(spec.weights[k]) - (dx * dx + dy * dy) * inv;
      m = std::max(m, logits[k]);
    }
    double z = 0.0;
    for (std::size_t k = 0; k < K; ++k) z += std::exp(logits[k] - m);
    for (std::size_t k = 0; k < K; ++k) out[i * K + k] = std::exp(logits[k] - m) / z;
  }
  return out;
}

double classifier_score(std::span<const double> probs, std::size_t labels) {
  if (labels == 0 || probs.size() % labels != 0) throw ShapeError("classifier_score: probability matrix is ragged");
  const std::size_t n = probs.size() / labels;
  if (n == 0) throw ConfigError("classifier_score: no samples");
  std::vector<double> marginal(labels, 0.0);
  double conditional_entropy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    double h = 0.0;
    for (std::size_t k = 0; k < labels; ++k) {
      const double p = probs[i * labels + k];
      if (!(p >= 0) || !std::isfinite(p)) {
        throw ConfigError("classifier_score: row " + std::to_string(i) + " is not a probability vector");
      }
      total += p;
      if (p > 0) h -= p * std::log(p);
      marginal[k] += p;
    }
    if (std::abs(total - 1.0) > 1e-6) {
      throw ConfigError("classifier_score: row " + std::to_string(i) + " sums to " + std::to_string(total));
    }
    conditional_entropy += h;
  }
  conditional_entropy /= static_cast<double>(n);
  double marginal_entropy = 0.0;
  for (double& p : marginal) {
    p /= static_cast<double>(n);
    if (p > 0) marginal_entropy -= p * std::log(p);
  }
  return std::exp(std::max(marginal_entropy - conditional_entropy, 0.0));
}

ModeReport mode_report(const Points& samples, const data::DatasetSpec& spec) {
  const auto labels = classify_samples(samples, spec);
  const std::size_t K = spec.centers.size();
  ModeReport r;
  r.sample_count = samples.size();
  r.mode_counts.assign(K, 0);
  for (int l : labels) {
    if (l == kReject) {
      ++r.low_quality;
    } else {
      ++r.mode_counts[static_cast<std::size_t>(l)];
    }
  }
  r.capture_threshold = kReferenceModeThreshold * static_cast<double>(r.sample_count) /
                        static_cast<double>(kReferenceSampleCount);
  for (auto c : r.mode_counts) {
    if (static_cast<double>(c) > r.capture_threshold) ++r.modes_captured;
  }
  if (r.sample_count == 0) return r;

  const double S = static_cast<double>(r.sample_count);
  const std::size_t high = r.sample_count - r.low_quality;
  r.high_quality_proportion = static_cast<double>(high) / S;

  const ReferenceBins ref = reference_bins(spec);
  std::vector<double> pg(K + 1), pd(K + 1);
  for (std::size_t k = 0; k < K; ++k) {
    pg[k] = static_cast<double>(r.mode_counts[k]) / S;
    pd[k] = ref.mode_mass[k];
  }
  pg[K] = static_cast<double>(r.low_quality) / S;
  pd[K] = ref.reject_mass;
  r.kl_to_data = kl(pg, pd);

  if (high > 0) {
    double inside = 0.0;
    for (double m : ref.mode_mass) inside += m;
    std::vector<double> pg_modes(K), pd_modes(K);
    for (std::size_t k = 0; k < K; ++k) {
      pg_modes[k] = static_cast<double>(r.mode_counts[k]) / static_cast<double>(high);
      pd_modes[k] = ref.mode_mass[k] / inside;
    }
    r.kl_mode_bins = kl(pg_modes, pd_modes);
  } else {
    r.kl_mode_bins = std::numeric_limits<double>::infinity();
  }

  r.classifier_score = classifier_score(posterior_probabilities(samples, spec), K);
  return r;
}

nlohmann::json to_json(const ModeReport& r) {
  nlohmann::json j;
  j["mode_counts"] = r.mode_counts;
  j["low_quality"] = r.low_quality;
  j["sample_count"] = r.sample_count;
  j["modes_captured"] = r.modes_captured;
  j["capture_threshold"] = r.capture_threshold;
  j["high_quality_proportion"] = r.high_quality_proportion;
  j["kl_to_data"] = r.kl_to_data;
  j["kl_mode_bins"] = std::isfinite(r.kl_mode_bins) ? nlohmann::json(r.kl_mode_bins) : nlohmann::json(nullptr);
  j["classifier_score"] = r.classifier_score;
  j["kl_convention"] =
      "KL(P_g||P_data); P_data bins = true mixture mass inside each 3-sigma ball plus the remaining mass; "
      "P_g bins floored at 1e-12";
  return j;
}

ModeReport mode_report_from_json(const nlohmann::json& j) {
  ModeReport r;
  r.mode_counts = j.at("mode_counts").get<std::vector<std::size_t>>();
  r.low_quality = j.at("low_quality").get<std::size_t>();
  r.sample_count = j.at("sample_count").get<std::size_t>();
  r.modes_captured = j.at("modes_captured").get<std::size_t>();
  r.capture_threshold = j.at("capture_threshold").get<double>();
  r.high_quality_proportion = j.at("high_quality_proportion").get<double>();
  r.kl_to_data = j.at("kl_to_data").get<double>();
  r.kl_mode_bins = j.at("kl_mode_bins").is_null() ? std::numeric_limits<double>::infinity()
                                                  : j.at("kl_mode_bins").get<double>();
  r.classifier_score = j.at("classifier_score").get<double>();
  return r;
}

std::vector<std::int64_t> to_integers(const Points& samples) {
  if (!samples.empty() && samples.dim != 1) throw ShapeError("discrete samples must be 1-D");
  std::vector<std::int64_t> out;
  out.reserve(samples.size());
  for (double v : samples.coords) {
    if (!(v >= 0) || v != std::floor(v)) throw ConfigError("discrete sample " + std::to_string(v) + " is not a count");
    out.push_back(static_cast<std::int64_t>(v));
  }
  return out;
}

DiscreteFitReport discrete_fit_report(std::span<const std::int64_t> samples, const data::DatasetSpec& spec) {
  if (!spec.discrete()) {
    throw ConfigError("discrete_fit_report: dataset '" + data::to_string(spec.kind) + "' is continuous");
  }
  DiscreteFitReport r;
  r.sample_count = samples.size();
  std::int64_t max_seen = 0;
  for (auto s : samples) {
    if (s < 0) throw ConfigError("discrete_fit_report: negative sample");
    max_seen = std::max(max_seen, s);
  }
  r.max_value = std::max<std::int64_t>(max_seen, 50);
  const auto bins = static_cast<std::size_t>(r.max_value + 1);
  r.empirical.assign(bins, 0.0);
  r.truth.assign(bins, 0.0);
  for (auto s : samples) r.empirical[static_cast<std::size_t>(s)] += 1.0;
  double truth_total = 0.0;
  for (std::size_t k = 0; k < bins; ++k) {
    if (!samples.empty()) r.empirical[k] /= static_cast<double>(samples.size());
    r.truth[k] = spec.true_pmf(static_cast<std::int64_t>(k));
    truth_total += r.truth[k];
  }
  double tv = std::max(1.0 - truth_total, 0.0);
  for (std::size_t k = 0; k < bins; ++k) tv += std::abs(r.empirical[k] - r.truth[k]);
  r.tv_distance = 0.5 * tv;

  const double norm = 1.0 + kPmfSmoothing * static_cast<double>(bins);
  double kl_sum = 0.0;
  for (std::size_t k = 0; k < bins; ++k) {
    const double p = (r.empirical[k] + kPmfSmoothing) / norm;
    const double q = (r.truth[k] / truth_total + kPmfSmoothing) / norm;
    kl_sum += p * std::log(p / q);
  }
  r.kl = std::max(kl_sum, 0.0);
  return r;
}

double total_variation(const DiscreteFitReport& r, std::int64_t lo, std::int64_t hi) {
  double s = 0.0;
  for (std::int64_t k = std::max<std::int64_t>(lo, 0); k <= hi; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const double e = i < r.empirical.size() ? r.empirical[i] : 0.0;
    const double t = i < r.truth.size() ? r.truth[i] : 0.0;
    s += std::abs(e - t);
  }
  return 0.5 * s;
}

nlohmann::json to_json(const DiscreteFitReport& r) {
  nlohmann::json j;
  j["max_value"] = r.max_value;
  j["sample_count"] = r.sample_count;
  j["tv_distance"] = r.tv_distance;
  j["tv_0_20"] = total_variation(r, 0, 20);
  j["kl"] = r.kl;
  j["empirical_pmf"] = r.empirical;
  j["true_pmf"] = r.truth;
  return j;
}

}  // namespace sig::metrics
