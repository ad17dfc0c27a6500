#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sig/error.hpp"
#include "sig/losses.hpp"
#include "sig/observation.hpp"
#include "support/gradcheck.hpp"

using namespace sig;
using namespace sig::loss;
using model::ObservationModel;

namespace {

double naive_sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

double naive_hm(const Tensor& x, const Tensor& theta, double sigma) {
  const std::size_t n = x.rows(), m = theta.rows(), d = x.cols();
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < m; ++j) {
      double q = 0;
      for (std::size_t k = 0; k < d; ++k) q += (x.at(i, k) - theta.at(j, k)) * (x.at(i, k) - theta.at(j, k));
      s += std::exp(-q / (2 * sigma * sigma)) / std::pow(2 * std::numbers::pi * sigma * sigma, d / 2.0);
    }
    total += std::log(s / m);
  }
  return -total / n;
}

}  // namespace

TEST_CASE("H_M examples") {
  const auto unit = ObservationModel::gaussian(1.0);
  SUBCASE("standard normal at its mean") {
    ad::Graph g;
    const LossValue l = sig_loss_hm(unit, g.constant(Tensor::matrix(1, 1, {0})), g.constant(Tensor::matrix(1, 1, {0})));
    CHECK(l.total == doctest::Approx(0.5 * std::log(2 * std::numbers::pi)).epsilon(1e-14));
    CHECK(l.value.item() == l.total);
    CHECK(l.sig_term == l.total);
  }
  SUBCASE("single theta reduces to mean log-likelihood") {
    Rng rng(1);
    const Tensor x = testing::random_tensor(rng, {5, 2});
    const Tensor theta = testing::random_tensor(rng, {1, 2});
    ad::Graph g;
    const double l = sig_loss_hm(unit, g.constant(x), g.constant(theta)).total;
    const Tensor lp = model::log_obs_density(unit, x, theta);
    double s = 0;
    for (double v : lp.values()) s += v;
    CHECK(l == doctest::Approx(-s / 5).epsilon(1e-14));
  }
  SUBCASE("naive double loop") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Rng rng(100 + seed);
      const Tensor x = testing::random_tensor(rng, {3, 2});
      const Tensor theta = testing::random_tensor(rng, {4, 2});
      ad::Graph g;
      const double l = sig_loss_hm(ObservationModel::gaussian(0.8), g.constant(x), g.constant(theta)).total;
      CHECK(l == doctest::Approx(naive_hm(x, theta, 0.8)).epsilon(1e-10));
    }
  }
  SUBCASE("empty batch") {
    ad::Graph g;
    CHECK_THROWS_AS(sig_loss_hm(unit, g.constant(Tensor(Shape{0, 1})), g.constant(Tensor::matrix(1, 1, {0}))), Error);
    CHECK_THROWS_AS(sig_loss_hm(unit, g.constant(Tensor::matrix(1, 1, {0})), g.constant(Tensor(Shape{0, 1}))), Error);
  }
}

TEST_CASE("H_M stays finite far from every theta") {
  ad::Graph g;
  const LossValue l = sig_loss_hm(ObservationModel::gaussian(0.01), g.constant(Tensor::matrix(1, 2, {1e3, 1e3})),
                                  g.constant(Tensor::matrix(2, 2, {0, 0, -1, -1})));
  CHECK(std::isfinite(l.total));
  CHECK(l.total > 1e9);
}

TEST_CASE("GAN discriminator loss") {
  ad::Graph g;
  CHECK(gan_disc_loss(g.constant(Tensor(Shape{3}, 0.0)), g.constant(Tensor(Shape{5}, 0.0))).total ==
        doctest::Approx(2 * std::log(2.0)).epsilon(1e-14));
  double previous = 1e9;
  for (double t : {1.0, 5.0, 10.0, 20.0, 40.0}) {
    const double l = gan_disc_loss(g.constant(Tensor(Shape{2}, t)), g.constant(Tensor(Shape{2}, -t))).total;
    CHECK(l < previous);
    CHECK(l >= 0);
    previous = l;
  }
  CHECK(previous < 1e-15);

  Rng rng(2);
  const Tensor real = testing::random_tensor(rng, {7}, 8.0);
  const Tensor fake = testing::random_tensor(rng, {6}, 8.0);
  double naive = 0;
  for (double t : real.values()) naive -= std::log(naive_sigmoid(t)) / 7;
  for (double t : fake.values()) naive -= std::log(1 - naive_sigmoid(t)) / 6;
  CHECK(gan_disc_loss(g.constant(real), g.constant(fake)).total == doctest::Approx(naive).epsilon(1e-10));
  CHECK_THROWS_AS(gan_disc_loss(g.constant(Tensor(Shape{0})), g.constant(fake)), Error);
}

TEST_CASE("GAN generator loss") {
  ad::Graph g;
  CHECK(gan_gen_loss(g.constant(Tensor(Shape{4}, 0.0))).total == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(gan_gen_loss(g.constant(Tensor(Shape{1}, 20.0))).total == doctest::Approx(std::log1p(std::exp(-20.0))).epsilon(1e-12));
  CHECK(gan_gen_loss(g.constant(Tensor(Shape{1}, 20.0))).total == doctest::Approx(2.06e-9).epsilon(1e-2));

  ad::Parameter logits("logits", Tensor::vector({-2.0, 0.0, 3.0}));
  ad::Graph h;
  h.backward(gan_gen_loss(h.parameter(logits)).value);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(logits.grad[i] == doctest::Approx((naive_sigmoid(logits.value[i]) - 1) / 3).epsilon(1e-12));
  }
}

TEST_CASE("GAN-SI combination") {
  const auto obs = ObservationModel::gaussian(0.5);
  Rng rng(3);
  const Tensor x = testing::random_tensor(rng, {4, 2});
  const Tensor theta = testing::random_tensor(rng, {3, 2});
  const Tensor logits = testing::random_tensor(rng, {3});
  ad::Graph g;
  const LossValue gan = gan_gen_loss(g.constant(logits));
  const LossValue zero = gan_si_gen_loss(g.constant(logits), obs, g.constant(x), g.constant(theta), 0.0);
  CHECK(zero.total == gan.total);

  const LossValue at0 = gan_si_gen_loss(g.constant(Tensor(Shape{3}, 0.0)), obs, g.constant(x), g.constant(theta), 1.0);
  const double hm = sig_loss_hm(obs, g.constant(x), g.constant(theta)).total;
  CHECK(at0.total == doctest::Approx(std::log(2.0) + hm).epsilon(1e-14));

  const LossValue mixed = gan_si_gen_loss(g.constant(logits), obs, g.constant(x), g.constant(theta), 2.5);
  CHECK(std::abs(mixed.total - (mixed.gan_term + mixed.lambda * mixed.sig_term)) < 1e-12);
  CHECK(mixed.lambda == 2.5);

  CHECK_THROWS_AS(gan_si_gen_loss(g.constant(logits), obs, g.constant(x), g.constant(theta), -0.1), ConfigError);
}

TEST_CASE("GAN-SI gradient is the sum of its parts") {
  const auto obs = ObservationModel::gaussian(0.5);
  Rng rng(4);
  const Tensor x = testing::random_tensor(rng, {4, 2});
  ad::Parameter theta("theta", testing::random_tensor(rng, {3, 2}));
  ad::Parameter logits("logits", testing::random_tensor(rng, {3}));
  const double lambda = 0.7;

  auto grads = [&](auto build) {
    ad::Graph g;
    g.backward(build(g));
    return std::pair{theta.grad, logits.grad};
  };
  const auto [tc, lc] = grads([&](ad::Graph& g) {
    return gan_si_gen_loss(g.parameter(logits), obs, g.constant(x), g.parameter(theta), lambda).value;
  });
  // Both parameters are registered each time so the unused one reads zero.
  const auto [tg, lg] = grads([&](ad::Graph& g) {
    g.parameter(theta);
    return gan_gen_loss(g.parameter(logits)).value;
  });
  const auto [ts, ls] = grads([&](ad::Graph& g) {
    g.parameter(logits);
    return sig_loss_hm(obs, g.constant(x), g.parameter(theta)).value;
  });
  for (std::size_t i = 0; i < tc.size(); ++i) CHECK(tc[i] == doctest::Approx(tg[i] + lambda * ts[i]).epsilon(1e-12));
  for (std::size_t i = 0; i < lc.size(); ++i) CHECK(lc[i] == doctest::Approx(lg[i] + lambda * ls[i]).epsilon(1e-12));

  const auto check = testing::check_gradients({&theta, &logits}, [&](ad::Graph& g) {
    return gan_si_gen_loss(g.parameter(logits), obs, g.constant(x), g.parameter(theta), lambda).value;
  });
  CHECK(check.max_relative_error < 1e-4);
}

TEST_CASE("H_M shift stability") {
  // Scaling every coordinate of a Gaussian problem by s shifts each log density
  // by -d log s and the loss by +d log s.
  Rng rng(5);
  const Tensor x = testing::random_tensor(rng, {6, 2});
  const Tensor theta = testing::random_tensor(rng, {5, 2});
  ad::Graph g;
  const double base = sig_loss_hm(ObservationModel::gaussian(0.4), g.constant(x), g.constant(theta)).total;
  for (double s : {0.5, 3.0}) {
    Tensor xs = x, ts = theta;
    for (double& v : xs.values()) v *= s;
    for (double& v : ts.values()) v *= s;
    const double scaled = sig_loss_hm(ObservationModel::gaussian(0.4 * s), g.constant(xs), g.constant(ts)).total;
    CHECK(scaled - base == doctest::Approx(2 * std::log(s)).epsilon(1e-10));
  }
}

TEST_CASE("exp-logit diagnostic loss") {
  ad::Graph g;
  CHECK(exp_logit_gen_loss(g.constant(Tensor(Shape{3}, 0.0))).total == doctest::Approx(0.5));
  CHECK(exp_logit_gen_loss(g.constant(Tensor::vector({0.0, std::log(3.0)}))).total == doctest::Approx(1.0));
}

TEST_CASE("auto lambda") {
  CHECK(auto_lambda(0.7, 0.7) == doctest::Approx(1.0));
  CHECK(auto_lambda(0.7, 7.0) == doctest::Approx(0.1));
  CHECK(auto_lambda(-0.7, 7.0) == doctest::Approx(0.1));
  CHECK(auto_lambda(1e-9, 1.0) == kLambdaMin);
  CHECK(auto_lambda(1e9, 1.0) == kLambdaMax);
  bool zero = false;
  CHECK(auto_lambda(1.0, 0.0, &zero) == kLambdaMax);
  CHECK(zero);
}

TEST_CASE("lambda controller") {
  SUBCASE("EMA converges on a constant series") {
    LambdaController c;
    for (int i = 0; i < 500; ++i) c.update(2.0, 4.0);
    CHECK(std::abs(c.gan_ema() - 2.0) < 0.02);
    CHECK(std::abs(c.sig_ema() - 4.0) < 0.04);
  }
  SUBCASE("refresh only on the interval") {
    LambdaController c(0.0, 10);
    CHECK(c.update(1.0, 2.0) == doctest::Approx(0.5));
    for (int i = 1; i < 10; ++i) CHECK(c.update(9.0, 1.0) == doctest::Approx(0.5));
    CHECK(c.update(9.0, 1.0) == doctest::Approx(9.0));
  }
  SUBCASE("zero SIG term records a warning") {
    LambdaController c(0.0, 1);
    CHECK(c.update(1.0, 0.0) == kLambdaMax);
    REQUIRE(c.warnings().size() == 1);
    CHECK(c.warnings()[0].find("zero") != std::string::npos);
  }
  SUBCASE("state round trip") {
    LambdaController a, b;
    for (int i = 0; i < 150; ++i) a.update(1.0 + i * 0.01, 3.0);
    b.restore(a.state());
    for (int i = 0; i < 120; ++i) CHECK(a.update(0.5, 2.0) == b.update(0.5, 2.0));
  }
  CHECK_THROWS_AS(LambdaController(1.0, 100), ConfigError);
  CHECK_THROWS_AS(LambdaController(0.99, 0), ConfigError);
}
