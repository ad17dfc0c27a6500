#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "sig/datasets.hpp"
#include "sig/points.hpp"

namespace sig::metrics {

inline constexpr int kReject = -1;
inline constexpr std::size_t kReferenceSampleCount = 50000;
inline constexpr double kReferenceModeThreshold = 1000.0;
inline constexpr double kKlFloor = 1e-12;

// Nearest-center label (lowest index on ties) when within 3 sigma_data of
// that center, else kReject.
std::vector<int> classify_samples(const Points& samples, const data::DatasetSpec& spec);

struct ModeReport {
  std::vector<std::size_t> mode_counts;  // high-quality samples per center
  std::size_t low_quality = 0;
  std::size_t sample_count = 0;
  std::size_t modes_captured = 0;
  double capture_threshold = 0;  // count must exceed this
  double high_quality_proportion = 0;
  // KL(P_g || P_data) over K mode bins + 1 reject bin; P_data's bins are the
  // true mixture mass inside / outside the 3 sigma_data balls.
  double kl_to_data = 0;
  // KL over the K mode bins only, both sides renormalized.
  double kl_mode_bins = 0;
  double classifier_score = 1;
};

nlohmann::json to_json(const ModeReport& r);
ModeReport mode_report_from_json(const nlohmann::json& j);

// Mode-capture threshold is 1000 * S / 50000.
ModeReport mode_report(const Points& samples, const data::DatasetSpec& spec);

// exp(H(mean_x p(y|x)) - mean_x H(p(y|x))) over rows of `probs` ([S x L],
// row-major). Rows must sum to 1 within 1e-6.
double classifier_score(std::span<const double> probs, std::size_t labels);

// Exact mixture posterior p(k | x) for every sample, [S x K] row-major.
std::vector<double> posterior_probabilities(const Points& samples, const data::DatasetSpec& spec);

// Mass the true mixture places inside each center's 3 sigma_data ball (cross
// contributions from other components included), plus the remaining mass.
struct ReferenceBins {
  std::vector<double> mode_mass;
  double reject_mass = 0;
};
ReferenceBins reference_bins(const data::DatasetSpec& spec);

struct DiscreteFitReport {
  std::int64_t max_value = 0;
  std::vector<double> empirical;  // index k -> empirical pmf
  std::vector<double> truth;
  double tv_distance = 0;  // includes the true tail beyond max_value
  double kl = 0;           // smoothed KL(empirical || truth)
  std::size_t sample_count = 0;
};

inline constexpr double kPmfSmoothing = 1e-10;

DiscreteFitReport discrete_fit_report(std::span<const std::int64_t> samples, const data::DatasetSpec& spec);
// 0.5 * sum_{k=lo..hi} |empirical(k) - truth(k)|.
double total_variation(const DiscreteFitReport& r, std::int64_t lo, std::int64_t hi);
nlohmann::json to_json(const DiscreteFitReport& r);

std::vector<std::int64_t> to_integers(const Points& samples);

}  // namespace sig::metrics
