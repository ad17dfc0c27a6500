#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sig/datasets.hpp"
#include "sig/error.hpp"
#include "sig/metrics.hpp"
#include "sig/rng.hpp"

using namespace sig;
using namespace sig::metrics;

namespace {

const data::DatasetSpec& grid() {
  static const data::DatasetSpec spec = data::make_spec(data::DatasetKind::gmm_grid);
  return spec;
}

Points copies_of_centers(const data::DatasetSpec& spec, std::size_t each) {
  Points p(2, {});
  for (const auto& c : spec.centers) {
    for (std::size_t i = 0; i < each; ++i) p.coords.insert(p.coords.end(), {c[0], c[1]});
  }
  return p;
}

}  // namespace

TEST_CASE("classification at centers and the 3 sigma boundary") {
  const auto& spec = grid();
  Points p(2, {});
  for (const auto& c : spec.centers) p.coords.insert(p.coords.end(), {c[0], c[1]});
  const auto labels = classify_samples(p, spec);
  for (std::size_t k = 0; k < labels.size(); ++k) CHECK(labels[k] == static_cast<int>(k));

  const double r = 3 * spec.sigma_data;
  const auto c = spec.centers[12];
  const Points edge(2, {c[0] + r - 1e-9, c[1], c[0] + r + 1e-9, c[1], c[0], c[1] - r - 1e-9});
  const auto e = classify_samples(edge, spec);
  CHECK(e[0] == 12);
  CHECK(e[1] == kReject);
  CHECK(e[2] == kReject);

  data::DatasetSpec none = spec;
  none.centers.clear();
  CHECK_THROWS_AS(classify_samples(p, none), ConfigError);
}

TEST_CASE("true-data reject rate") {
  Rng rng(1);
  const Points x = data::sample_dataset(rng, grid(), 50000);
  const auto labels = classify_samples(x, grid());
  const double rejected = static_cast<double>(std::count(labels.begin(), labels.end(), kReject)) / 50000;
  const double expected = std::exp(-4.5);
  // Binomial standard error at this rate is about 4.7e-4.
  CHECK(std::abs(rejected - expected) < 0.002);
}

TEST_CASE("perfect generator report") {
  const ModeReport r = mode_report(copies_of_centers(grid(), 2000), grid());
  CHECK(r.sample_count == 50000);
  CHECK(r.modes_captured == 25);
  CHECK(r.high_quality_proportion == 1.0);
  CHECK(r.low_quality == 0);
  CHECK(r.kl_mode_bins == doctest::Approx(0.0));
  // Only the reference reject mass separates the two 26-bin distributions.
  const ReferenceBins ref = reference_bins(grid());
  const double inside = std::accumulate(ref.mode_mass.begin(), ref.mode_mass.end(), 0.0);
  CHECK(inside + ref.reject_mass == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ref.reject_mass == doctest::Approx(std::exp(-4.5)).epsilon(1e-6));
  CHECK(r.kl_to_data == doctest::Approx(-std::log(inside)).epsilon(1e-6));
  CHECK(r.capture_threshold == 1000.0);
}

TEST_CASE("single-atom report") {
  const auto c = grid().centers[3];
  Points p(2, {});
  for (int i = 0; i < 50000; ++i) p.coords.insert(p.coords.end(), {c[0], c[1]});
  const ModeReport r = mode_report(p, grid());
  CHECK(r.modes_captured == 1);
  CHECK(r.high_quality_proportion == 1.0);
  CHECK(r.kl_mode_bins == doctest::Approx(std::log(25.0)).epsilon(1e-9));
  CHECK(r.classifier_score == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("mode report invariants") {
  Rng rng(2);
  Points x = data::sample_dataset(rng, grid(), 8000);
  for (std::size_t i = 0; i < 500; ++i) x.coords[i] += rng.normal();
  const ModeReport r = mode_report(x, grid());
  const std::size_t total = std::accumulate(r.mode_counts.begin(), r.mode_counts.end(), std::size_t{0});
  CHECK(total + r.low_quality == r.sample_count);
  CHECK(r.modes_captured <= 25);
  CHECK(r.capture_threshold == doctest::Approx(1000.0 * 8000 / 50000));
  CHECK(r.kl_to_data >= 0);
  CHECK(r.kl_mode_bins >= 0);
  CHECK(r.classifier_score >= 1);
  CHECK(r.classifier_score <= 25);

  const ModeReport back = mode_report_from_json(to_json(r));
  CHECK(back.mode_counts == r.mode_counts);
  CHECK(back.kl_to_data == r.kl_to_data);
}

TEST_CASE("classification is permutation invariant") {
  Rng rng(3);
  const Points x = data::sample_dataset(rng, grid(), 2000);
  const auto labels = classify_samples(x, grid());
  std::vector<std::size_t> order(2000);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng.engine());
  Points y(2, {});
  for (auto i : order) y.coords.insert(y.coords.end(), {x(i, 0), x(i, 1)});
  const auto shuffled = classify_samples(y, grid());
  for (std::size_t i = 0; i < 2000; ++i) CHECK(shuffled[i] == labels[order[i]]);
}

TEST_CASE("relabeling centers permutes counts") {
  Rng rng(4);
  const Points x = data::sample_dataset(rng, grid(), 5000);
  data::DatasetSpec reversed = grid();
  std::reverse(reversed.centers.begin(), reversed.centers.end());
  const auto a = mode_report(x, grid()).mode_counts;
  const auto b = mode_report(x, reversed).mode_counts;
  for (std::size_t k = 0; k < 25; ++k) CHECK(a[k] == b[24 - k]);
}

TEST_CASE("classifier score examples") {
  std::vector<double> certain(25 * 25, 0.0);
  for (std::size_t i = 0; i < 25; ++i) certain[i * 25 + i] = 1.0;
  CHECK(classifier_score(certain, 25) == doctest::Approx(25.0).epsilon(1e-12));

  std::vector<double> collapsed(10 * 25, 0.0);
  for (std::size_t i = 0; i < 10; ++i) collapsed[i * 25 + 7] = 1.0;
  CHECK(classifier_score(collapsed, 25) == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<double> uniform(4 * 5, 0.2);
  CHECK(classifier_score(uniform, 5) == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<double> bad{0.5, 0.4};
  CHECK_THROWS_AS(classifier_score(bad, 2), Error);
  std::vector<double> negative{1.5, -0.5};
  CHECK_THROWS_AS(classifier_score(negative, 2), Error);
}

TEST_CASE("classifier score stays within its range") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t labels = 2 + trial % 7;
    std::vector<double> probs(30 * labels);
    for (std::size_t i = 0; i < 30; ++i) {
      double s = 0;
      for (std::size_t k = 0; k < labels; ++k) s += probs[i * labels + k] = rng.uniform() * rng.uniform();
      for (std::size_t k = 0; k < labels; ++k) probs[i * labels + k] /= s;
    }
    const double score = classifier_score(probs, labels);
    CHECK(score >= 1 - 1e-12);
    CHECK(score <= labels + 1e-12);
  }
}

TEST_CASE("posterior classifier on true data") {
  Rng rng(6);
  const Points x = data::sample_dataset(rng, grid(), 20000);
  const auto post = posterior_probabilities(x, grid());
  REQUIRE(post.size() == 20000 * 25);
  for (std::size_t i = 0; i < 100; ++i) {
    CHECK(std::accumulate(post.begin() + i * 25, post.begin() + (i + 1) * 25, 0.0) == doctest::Approx(1.0));
  }
  const double score = classifier_score(post, 25);
  CHECK(score >= 24);
  CHECK(score <= 25);
}

TEST_CASE("discrete fit report") {
  const auto nb = data::make_spec(data::DatasetKind::negbin);
  SUBCASE("true samples") {
    Rng rng(7);
    const auto draws = data::sample_negbin(rng, nb.nb_r, nb.nb_p, 1000000);
    const DiscreteFitReport r = discrete_fit_report(draws, nb);
    CHECK(r.tv_distance < 0.01);
    CHECK(r.max_value >= 50);
    CHECK(r.truth[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(r.kl >= 0);
    CHECK(total_variation(r, 0, 20) <= r.tv_distance + 1e-12);
  }
  SUBCASE("disjoint support keeps KL finite") {
    const std::vector<std::int64_t> far(100, 400);
    const DiscreteFitReport r = discrete_fit_report(far, nb);
    CHECK(std::isfinite(r.kl));
    CHECK(r.kl > 0);
    CHECK(r.max_value == 400);
    CHECK(r.tv_distance == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("point mass at zero") {
    std::vector<std::int64_t> exact;
    for (int i = 0; i < 4; ++i) exact.push_back(0);
    const DiscreteFitReport r = discrete_fit_report(exact, nb);
    CHECK(r.empirical[0] == 1.0);
    CHECK(total_variation(r, 0, 0) == doctest::Approx(0.5 * 0.75));
    CHECK(r.tv_distance == doctest::Approx(0.75).epsilon(1e-9));
  }
  CHECK_THROWS_AS(discrete_fit_report(std::vector<std::int64_t>{1}, grid()), ConfigError);
}
