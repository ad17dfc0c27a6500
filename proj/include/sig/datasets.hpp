#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "sig/points.hpp"
#include "sig/rng.hpp"
#include "sig/tensor.hpp"

namespace sig::data {

enum class DatasetKind { negbin, pois_negbin_mix, ring_noise, gmm_grid, gmm_ring };

std::string to_string(DatasetKind kind);
DatasetKind parse_dataset_kind(const std::string& name);

using Point2 = std::array<double, 2>;

// Ground truth for one synthetic data source.
//
// Negative binomial NB(r, p) here is the Poisson-Gamma mixture with
// theta ~ Gamma(shape r, rate p / (1 - p)); pmf(k) = C(k + r - 1, k) p^r (1 - p)^k.
struct DatasetSpec {
  DatasetKind kind = DatasetKind::gmm_grid;

  // Continuous kinds.
  std::vector<Point2> centers;
  std::vector<double> weights;
  double sigma_data = 0.05;
  double radius = 2.0;
  double grid_spacing = 2.0;

  // Discrete kinds.
  double nb_r = 2.0;
  double nb_p = 0.5;
  double poisson_mean = 10.0;
  double mix_nb_r = 0.2;
  double mix_nb_p = 0.9;

  bool discrete() const { return kind == DatasetKind::negbin || kind == DatasetKind::pois_negbin_mix; }
  bool has_centers() const { return !centers.empty(); }
  std::size_t dim() const { return discrete() ? 1 : 2; }
  std::size_t mode_count() const { return centers.size(); }

  // Probability mass at k >= 0; discrete kinds only.
  double true_pmf(std::int64_t k) const;

  friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

// Default geometry: grid {-4,-2,0,2,4}^2 and ring radius 2 with K = 8, both
// sigma_data = 0.05; NB(2, 0.5); 0.5 Poisson(10) + 0.5 NB(0.2, 0.9).
DatasetSpec make_spec(DatasetKind kind);

nlohmann::json to_json(const DatasetSpec& spec);
DatasetSpec spec_from_json(const nlohmann::json& j);

double negbin_pmf(std::int64_t k, double r, double p);
double poisson_pmf(std::int64_t k, double mean);

// Definition of a well-separated multi-modal support: each mode is the
// 3 sigma_data ball around its center, so diameter eps0 = 6 sigma_data and
// inter-mode distance c0 = min center distance - 6 sigma_data.
struct Separation {
  double min_center_distance = 0;
  double c0 = 0;
  double eps0 = 0;
  bool holds = false;
};
Separation separation(const DatasetSpec& spec);

Tensor sample_noise(Rng& rng, std::size_t count, std::size_t dim);

std::vector<std::int64_t> sample_negbin(Rng& rng, double r, double p, std::size_t count);
// `component` (optional) receives 1 for Poisson draws, 0 for NB draws.
std::vector<std::int64_t> sample_pois_negbin_mix(Rng& rng, const DatasetSpec& spec, std::size_t count,
                                                 std::vector<int>* component = nullptr);
Points sample_gmm(Rng& rng, const DatasetSpec& spec, std::size_t count);
Points sample_ring_noise(Rng& rng, const DatasetSpec& spec, std::size_t count);

// Any kind; discrete kinds come back as 1-D integer-valued points.
Points sample_dataset(Rng& rng, const DatasetSpec& spec, std::size_t count);

}  // namespace sig::data
