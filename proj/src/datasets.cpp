#include "sig/datasets.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "sig/error.hpp"

namespace sig::data {

std::string to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::negbin: return "negbin";
    case DatasetKind::pois_negbin_mix: return "pois-negbin-mix";
    case DatasetKind::ring_noise: return "ring-noise";
    case DatasetKind::gmm_grid: return "gmm-grid";
    case DatasetKind::gmm_ring: return "gmm-ring";
  }
  return "unknown";
}

DatasetKind parse_dataset_kind(const std::string& name) {
  for (auto k : {DatasetKind::negbin, DatasetKind::pois_negbin_mix, DatasetKind::ring_noise, DatasetKind::gmm_grid,
                 DatasetKind::gmm_ring}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown dataset kind '" + name +
                    "' (expected negbin, pois-negbin-mix, ring-noise, gmm-grid or gmm-ring)");
}

double negbin_pmf(std::int64_t k, double r, double p) {
  if (k < 0) return 0.0;
  const double kd = static_cast<double>(k);
  return std::exp(std::lgamma(kd + r) - std::lgamma(kd + 1.0) - std::lgamma(r) + r * std::log(p) +
                  kd * std::log1p(-p));
}

double poisson_pmf(std::int64_t k, double mean) {
  if (k < 0) return 0.0;
  const double kd = static_cast<double>(k);
  return std::exp(kd * std::log(mean) - mean - std::lgamma(kd + 1.0));
}

double DatasetSpec::true_pmf(std::int64_t k) const {
  switch (kind) {
    case DatasetKind::negbin: return negbin_pmf(k, nb_r, nb_p);
    case DatasetKind::pois_negbin_mix:
      return 0.5 * poisson_pmf(k, poisson_mean) + 0.5 * negbin_pmf(k, mix_nb_r, mix_nb_p);
    default: throw ConfigError("true_pmf: dataset '" + to_string(kind) + "' is continuous");
  }
}

DatasetSpec make_spec(DatasetKind kind) {
  DatasetSpec s;
  s.kind = kind;
  switch (kind) {
    case DatasetKind::gmm_grid:
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) s.centers.push_back({-4.0 + s.grid_spacing * i, -4.0 + s.grid_spacing * j});
      break;
    case DatasetKind::gmm_ring:
      for (int k = 0; k < 8; ++k) {
        const double a = 2.0 * std::numbers::pi * k / 8.0;
        s.centers.push_back({s.radius * std::cos(a), s.radius * std::sin(a)});
      }
      break;
    default: break;
  }
  if (!s.centers.empty()) s.weights.assign(s.centers.size(), 1.0 / static_cast<double>(s.centers.size()));
  return s;
}

nlohmann::json to_json(const DatasetSpec& spec) {
  nlohmann::json j;
  j["kind"] = to_string(spec.kind);
  if (spec.discrete()) {
    j["nb_r"] = spec.nb_r;
    j["nb_p"] = spec.nb_p;
    j["poisson_mean"] = spec.poisson_mean;
    j["mix_nb_r"] = spec.mix_nb_r;
    j["mix_nb_p"] = spec.mix_nb_p;
  } else {
    j["sigma_data"] = spec.sigma_data;
    j["radius"] = spec.radius;
    j["grid_spacing"] = spec.grid_spacing;
    j["centers"] = nlohmann::json::array();
    for (const auto& c : spec.centers) j["centers"].push_back({c[0], c[1]});
    j["weights"] = spec.weights;
  }
  return j;
}

DatasetSpec spec_from_json(const nlohmann::json& j) {
  try {
    DatasetSpec s = make_spec(parse_dataset_kind(j.at("kind").get<std::string>()));
    s.nb_r = j.value("nb_r", s.nb_r);
    s.nb_p = j.value("nb_p", s.nb_p);
    s.poisson_mean = j.value("poisson_mean", s.poisson_mean);
    s.mix_nb_r = j.value("mix_nb_r", s.mix_nb_r);
    s.mix_nb_p = j.value("mix_nb_p", s.mix_nb_p);
    s.sigma_data = j.value("sigma_data", s.sigma_data);
    s.radius = j.value("radius", s.radius);
    s.grid_spacing = j.value("grid_spacing", s.grid_spacing);
    if (j.contains("centers")) {
      s.centers.clear();
      for (const auto& c : j.at("centers")) s.centers.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
      s.weights.assign(s.centers.size(), s.centers.empty() ? 0.0 : 1.0 / static_cast<double>(s.centers.size()));
    }
    if (j.contains("weights")) s.weights = j.at("weights").get<std::vector<double>>();
    if (s.weights.size() != s.centers.size()) throw ConfigError("dataset spec: weights and centers differ in length");
    if (!s.discrete() && !(s.sigma_data > 0)) throw ConfigError("dataset spec: sigma_data must be positive");
    if (s.nb_r <= 0 || s.nb_p <= 0 || s.nb_p >= 1 || s.mix_nb_r <= 0 || s.mix_nb_p <= 0 || s.mix_nb_p >= 1) {
      throw ConfigError("dataset spec: negative binomial needs r > 0 and 0 < p < 1");
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("dataset spec: ") + e.what());
  }
}

Separation separation(const DatasetSpec& spec) {
  Separation sep;
  if (spec.centers.size() < 2) return sep;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < spec.centers.size(); ++a)
    for (std::size_t b = a + 1; b < spec.centers.size(); ++b)
      best = std::min(best, std::hypot(spec.centers[a][0] - spec.centers[b][0],
                                       spec.centers[a][1] - spec.centers[b][1]));
  sep.min_center_distance = best;
  sep.eps0 = 6.0 * spec.sigma_data;
  sep.c0 = best - sep.eps0;
  sep.holds = sep.c0 > sep.eps0 && sep.eps0 > 0;
  return sep;
}

Tensor sample_noise(Rng& rng, std::size_t count, std::size_t dim) {
  if (count == 0 || dim == 0) throw ConfigError("sample_noise: count and dim must be positive");
  std::vector<double> v(count * dim);
  for (double& x : v) x = rng.normal();
  return Tensor(Shape{count, dim}, std::move(v));
}

std::vector<std::int64_t> sample_negbin(Rng& rng, double r, double p, std::size_t count) {
  if (!(r > 0) || !(p > 0 && p < 1)) throw ConfigError("sample_negbin: need r > 0 and 0 < p < 1");
  const double scale = (1.0 - p) / p;
  std::vector<std::int64_t> out(count);
  for (auto& x : out) x = rng.poisson(rng.gamma(r, scale));
  return out;
}

std::vector<std::int64_t> sample_pois_negbin_mix(Rng& rng, const DatasetSpec& spec, std::size_t count,
                                                 std::vector<int>* component) {
  std::vector<std::int64_t> out(count);
  if (component) component->assign(count, 0);
  const double scale = (1.0 - spec.mix_nb_p) / spec.mix_nb_p;
  for (std::size_t i = 0; i < count; ++i) {
    const bool use_poisson = rng.coin();
    if (component) (*component)[i] = use_poisson ? 1 : 0;
    out[i] = use_poisson ? rng.poisson(spec.poisson_mean) : rng.poisson(rng.gamma(spec.mix_nb_r, scale));
  }
  return out;
}

Points sample_gmm(Rng& rng, const DatasetSpec& spec, std::size_t count) {
  if (spec.centers.empty()) throw ConfigError("sample_gmm: dataset '" + to_string(spec.kind) + "' has no centers");
  std::discrete_distribution<std::size_t> pick(spec.weights.begin(), spec.weights.end());
  Points pts(2, std::vector<double>(2 * count));
  for (std::size_t i = 0; i < count; ++i) {
    const auto& c = spec.centers[pick(rng.engine())];
    pts.coords[2 * i] = c[0] + spec.sigma_data * rng.normal();
    pts.coords[2 * i + 1] = c[1] + spec.sigma_data * rng.normal();
  }
  return pts;
}

Points sample_ring_noise(Rng& rng, const DatasetSpec& spec, std::size_t count) {
  Points pts(2, std::vector<double>(2 * count));
  for (std::size_t i = 0; i < count; ++i) {
    const double a = 2.0 * std::numbers::pi * rng.uniform();
    pts.coords[2 * i] = spec.radius * std::cos(a) + spec.sigma_data * rng.normal();
    pts.coords[2 * i + 1] = spec.radius * std::sin(a) + spec.sigma_data * rng.normal();
  }
  return pts;
}

Points sample_dataset(Rng& rng, const DatasetSpec& spec, std::size_t count) {
  auto as_points = [](const std::vector<std::int64_t>& v) {
    std::vector<double> c(v.begin(), v.end());
    return Points(1, std::move(c));
  };
  switch (spec.kind) {
    case DatasetKind::negbin: return as_points(sample_negbin(rng, spec.nb_r, spec.nb_p, count));
    case DatasetKind::pois_negbin_mix: return as_points(sample_pois_negbin_mix(rng, spec, count));
    case DatasetKind::ring_noise: return sample_ring_noise(rng, spec, count);
    case DatasetKind::gmm_grid:
    case DatasetKind::gmm_ring: return sample_gmm(rng, spec, count);
  }
  throw ConfigError("sample_dataset: unhandled kind");
}

}  // namespace sig::data
