#include <doctest.h>

#include <cmath>

#include "sig/adam.hpp"
#include "sig/autodiff.hpp"
#include "sig/error.hpp"
#include "support/gradcheck.hpp"

using namespace sig;
using sig::testing::check_gradients;
using sig::testing::random_tensor;

namespace {

// Gradient of sum(w .* f(p)) w.r.t. p with random weights w.
testing::GradCheck unary_check(const std::function<ad::Var(ad::Var)>& f, Tensor start) {
  Rng rng(7);
  ad::Parameter p("p", std::move(start));
  Shape out_shape;
  {
    ad::Graph g;
    out_shape = f(g.constant(p.value)).shape();
  }
  const Tensor w = random_tensor(rng, out_shape);
  return check_gradients({&p}, [&](ad::Graph& g) { return ad::sum_all(ad::mul(f(g.parameter(p)), g.constant(w))); });
}

Tensor positive(Rng& rng, Shape shape) {
  Tensor t(shape);
  for (double& v : t.values()) v = 0.5 + rng.uniform();
  return t;
}

}  // namespace

TEST_CASE("tensor rejects inconsistent shapes") {
  CHECK_THROWS_AS(Tensor(Shape{2, 3}, std::vector<double>(5)), ShapeError);
  CHECK_THROWS_AS(Tensor(Shape{0, 3}), ShapeError);
  CHECK(Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6}).at(1, 2) == 6);
}

TEST_CASE("forward examples") {
  ad::Graph g;
  CHECK(ad::log_sum_exp(g.constant(Tensor::vector({0, 0})), 0).item() == doctest::Approx(std::log(2.0)));
  const Tensor r = ad::relu(g.constant(Tensor::vector({-1, 2}))).value();
  CHECK(r[0] == 0);
  CHECK(r[1] == 2);
  const double big = ad::log_sum_exp(g.constant(Tensor::vector({1000, 1000})), 0).item();
  CHECK(std::isfinite(big));
  CHECK(big - 1000.0 == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("log_sum_exp equals max plus log-sum of shifted exponentials") {
  Rng rng(3);
  const Tensor v = random_tensor(rng, {4, 6}, 30.0);
  ad::Graph g;
  const Tensor out = ad::log_sum_exp(g.constant(v), 1).value();
  for (std::size_t r = 0; r < 4; ++r) {
    double mx = -INFINITY;
    for (std::size_t c = 0; c < 6; ++c) mx = std::max(mx, v.at(r, c));
    double s = 0;
    for (std::size_t c = 0; c < 6; ++c) s += std::exp(v.at(r, c) - mx);
    CHECK(out[r] == mx + std::log(s));
  }
}

TEST_CASE("backward examples") {
  SUBCASE("square") {
    ad::Parameter x("x", Tensor::scalar(3));
    ad::Graph g;
    g.backward(ad::square(g.parameter(x)));
    CHECK(x.grad.item() == doctest::Approx(6));
  }
  SUBCASE("log_sum_exp at equal logits") {
    ad::Parameter x("x", Tensor::vector({0, 0}));
    ad::Graph g;
    g.backward(ad::log_sum_exp(g.parameter(x), 0));
    CHECK(x.grad[0] == doctest::Approx(0.5));
    CHECK(x.grad[1] == doctest::Approx(0.5));
  }
  SUBCASE("reused parameter accumulates") {
    ad::Parameter x("x", Tensor::vector({1, -2}));
    ad::Graph g;
    ad::Var a = g.parameter(x);
    ad::Var b = g.parameter(x);
    g.backward(ad::sum_all(ad::mul(a, b)));
    CHECK(x.grad[0] == doctest::Approx(2));
    CHECK(x.grad[1] == doctest::Approx(-4));
  }
  SUBCASE("unreached parameter gets a zero gradient of its shape") {
    ad::Parameter x("x", Tensor::scalar(1));
    ad::Parameter y("y", Tensor::matrix(2, 2, {1, 2, 3, 4}));
    ad::Graph g;
    ad::Var xv = g.parameter(x);
    g.parameter(y);
    g.backward(ad::square(xv));
    CHECK(y.grad.shape() == y.value.shape());
    CHECK(y.grad == Tensor(Shape{2, 2}, 0.0));
  }
}

TEST_CASE("backward errors") {
  ad::Parameter x("x", Tensor::vector({1, 2}));
  ad::Graph g;
  ad::Var v = g.parameter(x);
  CHECK_THROWS_AS(g.backward(v), ShapeError);
  ad::Var s = ad::sum_all(v);
  g.backward(s);
  CHECK_THROWS_AS(g.backward(s), Error);
}

TEST_CASE("shape and domain errors") {
  ad::Graph g;
  ad::Var a = g.constant(Tensor(Shape{2, 3}, 1.0));
  ad::Var b = g.constant(Tensor(Shape{2, 3}, 1.0));
  CHECK_THROWS_AS(ad::matmul(a, b), ShapeError);
  CHECK_THROWS_AS(ad::add(a, g.constant(Tensor(Shape{3, 2}, 1.0))), ShapeError);
  CHECK_THROWS_AS(ad::log(g.constant(Tensor::vector({1, 0}))), NumericalError);
  CHECK_THROWS_AS(ad::log(g.constant(Tensor::vector({-1}))), NumericalError);
  try {
    ad::matmul(a, b);
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find("[2x3]") != std::string::npos);
  }
}

TEST_CASE("primitive gradients match central differences") {
  Rng rng(11);
  const Tensor m23 = random_tensor(rng, {2, 3});
  const Tensor m34 = random_tensor(rng, {3, 4});
  const Tensor row3 = random_tensor(rng, {3});
  const Tensor col2 = random_tensor(rng, {2});
  const Tensor other = random_tensor(rng, {2, 3});

  auto expect_close = [](const testing::GradCheck& r) {
    INFO(r.worst);
    CHECK(r.compared > 0);
    CHECK(r.max_relative_error < 1e-4);
  };
  expect_close(unary_check([&](ad::Var p) { return ad::matmul(p, p.graph().constant(m34)); }, m23));
  expect_close(unary_check([&](ad::Var p) { return ad::matmul(p.graph().constant(m23), p); }, m34));
  expect_close(unary_check([](ad::Var p) { return ad::transpose(p); }, m23));
  expect_close(unary_check([](ad::Var p) { return ad::reshape(p, {3, 2}); }, m23));
  expect_close(unary_check([&](ad::Var p) { return ad::add(p, p.graph().constant(other)); }, m23));
  expect_close(unary_check([&](ad::Var p) { return ad::sub(p.graph().constant(other), p); }, m23));
  expect_close(unary_check([&](ad::Var p) { return ad::mul(p, p.graph().constant(other)); }, m23));
  expect_close(unary_check([&](ad::Var p) { return ad::add_row(p.graph().constant(m23), p); }, row3));
  expect_close(unary_check([&](ad::Var p) { return ad::add_row(p, p.graph().constant(row3)); }, m23));
  expect_close(unary_check([&](ad::Var p) { return ad::add_col(p.graph().constant(m23), p); }, col2));
  expect_close(unary_check([](ad::Var p) { return ad::scale(p, -2.5); }, m23));
  expect_close(unary_check([](ad::Var p) { return ad::add_scalar(p, 4.0); }, m23));
  expect_close(unary_check([](ad::Var p) { return ad::relu(p); }, m23));
  expect_close(unary_check([](ad::Var p) { return ad::sigmoid(p); }, m23));
  expect_close(unary_check([](ad::Var p) { return ad::softplus(p); }, m23));
  expect_close(unary_check([](ad::Var p) { return ad::exp(p); }, m23));
  expect_close(unary_check([](ad::Var p) { return ad::log(p); }, positive(rng, {2, 3})));
  expect_close(unary_check([](ad::Var p) { return ad::square(p); }, m23));
  expect_close(unary_check([](ad::Var p) { return ad::sum(p, 0); }, m23));
  expect_close(unary_check([](ad::Var p) { return ad::sum(p, 1); }, m23));
  expect_close(unary_check([](ad::Var p) { return ad::mean(p, 0); }, m23));
  expect_close(unary_check([](ad::Var p) { return ad::mean(p, 1); }, m23));
  expect_close(unary_check([](ad::Var p) { return ad::log_sum_exp(p, 0); }, m23));
  expect_close(unary_check([](ad::Var p) { return ad::log_sum_exp(p, 1); }, m23));
  expect_close(unary_check([&](ad::Var p) { return ad::pairwise_sq_dist(p, p.graph().constant(m34.reshaped({4, 3}))); }, m23));
  expect_close(unary_check([&](ad::Var p) { return ad::pairwise_sq_dist(p.graph().constant(m23), p); }, m34.reshaped({4, 3})));
}

TEST_CASE("random MLP and loss compositions match central differences") {
  for (std::uint64_t seed = 1000; seed < 1020; ++seed) {
    const auto r = testing::random_gradient_check(seed);
    INFO(r.description << ": " << r.worst);
    CHECK(r.max_relative_error < 1e-4);
  }
}

TEST_CASE("same inputs give bit-identical losses and gradients") {
  auto run = [] {
    Rng rng(5);
    auto gen = model::make_generator({});
    gen.initialize(rng);
    const Tensor z = random_tensor(rng, {8, 10});
    const Tensor x = random_tensor(rng, {8, 2});
    ad::Graph g;
    auto l = loss::sig_loss_hm(model::ObservationModel::gaussian(0.1), g.constant(x),
                               model::generate_theta(gen, g, g.constant(z)));
    g.backward(l.value);
    std::vector<Tensor> grads{Tensor::scalar(l.total)};
    for (auto* p : gen.parameters()) grads.push_back(p->grad);
    return grads;
  };
  CHECK(run() == run());
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  ad::Parameter p("w", Tensor::vector({1.5, -2}));
  p.grad = Tensor::vector({0, 0});
  std::vector<ad::Parameter*> ps{&p};
  auto st = ad::make_adam_state(ps);
  for (int i = 0; i < 10; ++i) ad::adam_step(ps, st, {});
  CHECK(p.value == Tensor::vector({1.5, -2}));
  CHECK(st.step == 10);
}

TEST_CASE("adam: first step moves by learning rate against the gradient sign") {
  for (double g0 : {3.0, -0.01}) {
    ad::Parameter p("w", Tensor::scalar(0));
  p.grad = Tensor::scalar(g0);
    std::vector<ad::Parameter*> ps{&p};
    auto st = ad::make_adam_state(ps);
    ad::AdamConfig cfg;
    cfg.learning_rate = 0.1;
    ad::adam_step(ps, st, cfg);
    // m_hat = g, v_hat = g^2, so the step is -lr * g / (|g| + eps).
    CHECK(p.value.item() == doctest::Approx(-0.1 * g0 / (std::abs(g0) + 1e-8)).epsilon(1e-12));
  }
}

TEST_CASE("adam: constant unit gradient for 100 steps") {
  ad::Parameter p("w", Tensor::scalar(0));
  p.grad = Tensor::scalar(1);
  std::vector<ad::Parameter*> ps{&p};
  auto st = ad::make_adam_state(ps);
  const ad::AdamConfig cfg;
  for (int i = 0; i < 100; ++i) ad::adam_step(ps, st, cfg);
  CHECK(p.value.item() == doctest::Approx(-100 * cfg.learning_rate).epsilon(1e-6));
}

TEST_CASE("adam: errors name the parameter") {
  ad::Parameter p("layer.weight", Tensor::vector({1, 2}));
  p.grad = Tensor::vector({0, NAN});
  std::vector<ad::Parameter*> ps{&p};
  auto st = ad::make_adam_state(ps);
  try {
    ad::adam_step(ps, st, {});
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("layer.weight") != std::string::npos);
  }
  CHECK(st.step == 0);
  p.grad = Tensor::vector({0, 0, 0});
  CHECK_THROWS_AS(ad::adam_step(ps, st, {}), ShapeError);
}
