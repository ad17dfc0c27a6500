#include "sig/autodiff.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "sig/error.hpp"

namespace sig::ad {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

ConstMap as_matrix(const Tensor& t) {
  return ConstMap(t.values().data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}
MutMap as_matrix(Tensor& t) {
  return MutMap(t.values().data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}

void require_same_graph(Var a, Var b, const char* op) {
  if (&a.graph() != &b.graph()) throw Error(std::string(op) + ": operands belong to different graphs");
}

void require_same_shape(Var a, Var b, const char* op) {
  require_same_graph(a, b, op);
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

void require_rank2(Var a, const char* op) {
  if (a.value().rank() != 2) {
    throw ShapeError(std::string(op) + ": expected a matrix, got " + shape_string(a.shape()));
  }
}

// Elementwise unary op: out = f(a), d out / d a = df(a, out).
template <class F, class DF>
Var unary(const char* op, Var a, F f, DF df) {
  Graph& g = a.graph();
  Tensor out(a.shape(), 0.0);
  const auto in = a.value().values();
  auto o = out.values();
  for (std::size_t i = 0; i < in.size(); ++i) o[i] = f(in[i]);
  const std::size_t ia = a.id();
  return g.record(op, std::move(out), {ia}, [ia, df](Graph& gr, std::size_t self) {
    if (!gr.requires_grad(ia)) return;
    const auto x = gr.value(ia).values();
    const auto y = gr.value(self).values();
    const auto up = gr.grad(self).values();
    auto dst = gr.grad_buffer(ia).values();
    for (std::size_t i = 0; i < x.size(); ++i) dst[i] += up[i] * df(x[i], y[i]);
  });
}

Shape reduced_shape(const Shape& s, std::size_t axis, const char* op) {
  if (s.empty() || s.size() > 2 || axis >= s.size()) {
    throw ShapeError(std::string(op) + ": axis " + std::to_string(axis) + " invalid for " + shape_string(s));
  }
  Shape r = s;
  r.erase(r.begin() + static_cast<std::ptrdiff_t>(axis));
  return r;
}

// Index helpers for reductions over rank 1 / rank 2 operands.
struct ReduceLayout {
  std::size_t outer;  // number of outputs
  std::size_t inner;  // elements reduced per output
  std::size_t out_stride;
  std::size_t in_stride;

  std::size_t index(std::size_t o, std::size_t k) const { return o * out_stride + k * in_stride; }
};

ReduceLayout layout_for(const Shape& s, std::size_t axis) {
  if (s.size() == 1) return {1, s[0], 0, 1};
  const std::size_t rows = s[0], cols = s[1];
  if (axis == 0) return {cols, rows, 1, cols};
  return {rows, cols, cols, 1};
}

}  // namespace

// ---- Var / Graph ------------------------------------------------------------

const Tensor& Var::value() const {
  if (!graph_) throw Error("use of an empty Var");
  return graph_->value(id_);
}

Var Graph::constant(Tensor value) {
  if (!value.all_finite()) throw NumericalError("constant tensor contains non-finite values");
  Node n;
  n.op = "constant";
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Graph::parameter(Parameter& p) {
  if (!p.value.all_finite()) throw NumericalError("parameter '" + p.name + "' contains non-finite values");
  Node n;
  n.op = "parameter";
  n.value = p.value;
  n.requires_grad = true;
  n.param = &p;
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Graph::record(const char* op, Tensor value, std::vector<std::size_t> inputs, BackwardFn fn) {
  if (differentiated_) throw Error(std::string(op) + ": graph already differentiated; build a new graph");
  if (!value.all_finite()) throw NumericalError(std::string(op) + ": produced non-finite values");
  Node n;
  n.op = op;
  n.value = std::move(value);
  for (auto i : inputs) n.requires_grad = n.requires_grad || nodes_[i].requires_grad;
  n.inputs = std::move(inputs);
  if (n.requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

void Graph::accumulate(std::size_t id, const Tensor& delta) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  auto dst = n.grad.values();
  const auto src = delta.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void Graph::backward(Var loss) {
  if (&loss.graph() != this) throw Error("backward: loss belongs to a different graph");
  if (differentiated_) throw Error("backward: graph is stale (already differentiated); run a new forward pass");
  if (!loss.value().is_scalar()) {
    throw ShapeError("backward: loss must be a scalar, got " + shape_string(loss.shape()));
  }
  differentiated_ = true;

  for (auto& n : nodes_) {
    if (n.requires_grad) n.grad = Tensor(n.value.shape(), 0.0);
  }
  if (nodes_[loss.id()].requires_grad) nodes_[loss.id()].grad.values()[0] = 1.0;

  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (n.requires_grad && n.backward) n.backward(*this, id);
  }

  for (auto& n : nodes_) {
    if (n.param) n.param->grad = Tensor(n.param->value.shape(), 0.0);
  }
  for (auto& n : nodes_) {
    if (!n.param) continue;
    auto dst = n.param->grad.values();
    const auto src = n.grad.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
}

// ---- linear algebra -----------------------------------------------------------

Var matmul(Var a, Var b) {
  require_same_graph(a, b, "matmul");
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  if (a.value().cols() != b.value().rows()) {
    throw ShapeError("matmul: shape mismatch " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
  Tensor out(Shape{a.value().rows(), b.value().cols()}, 0.0);
  as_matrix(out).noalias() = as_matrix(a.value()) * as_matrix(b.value());
  const std::size_t ia = a.id(), ib = b.id();
  return a.graph().record("matmul", std::move(out), {ia, ib}, [ia, ib](Graph& g, std::size_t self) {
    const auto up = as_matrix(g.grad(self));
    if (g.requires_grad(ia)) as_matrix(g.grad_buffer(ia)).noalias() += up * as_matrix(g.value(ib)).transpose();
    if (g.requires_grad(ib)) as_matrix(g.grad_buffer(ib)).noalias() += as_matrix(g.value(ia)).transpose() * up;
  });
}

Var transpose(Var a) {
  require_rank2(a, "transpose");
  const auto& v = a.value();
  Tensor out(Shape{v.cols(), v.rows()}, 0.0);
  as_matrix(out) = as_matrix(v).transpose();
  const std::size_t ia = a.id();
  return a.graph().record("transpose", std::move(out), {ia}, [ia](Graph& g, std::size_t self) {
    if (g.requires_grad(ia)) as_matrix(g.grad_buffer(ia)) += as_matrix(g.grad(self)).transpose();
  });
}

Var reshape(Var a, Shape shape) {
  if (shape_size(shape) != a.value().size()) {
    throw ShapeError("reshape: cannot view " + shape_string(a.shape()) + " as " + shape_string(shape));
  }
  const std::size_t ia = a.id();
  return a.graph().record("reshape", a.value().reshaped(std::move(shape)), {ia}, [ia](Graph& g, std::size_t self) {
    if (!g.requires_grad(ia)) return;
    auto dst = g.grad_buffer(ia).values();
    const auto up = g.grad(self).values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += up[i];
  });
}

// ---- elementwise binary ---------------------------------------------------------

Var add(Var a, Var b) {
  require_same_shape(a, b, "add");
  Tensor out = a.value();
  auto o = out.values();
  const auto bv = b.value().values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.graph().record("add", std::move(out), {ia, ib}, [ia, ib](Graph& g, std::size_t self) {
    g.accumulate(ia, g.grad(self));
    g.accumulate(ib, g.grad(self));
  });
}

Var sub(Var a, Var b) {
  require_same_shape(a, b, "sub");
  Tensor out = a.value();
  auto o = out.values();
  const auto bv = b.value().values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.graph().record("sub", std::move(out), {ia, ib}, [ia, ib](Graph& g, std::size_t self) {
    g.accumulate(ia, g.grad(self));
    if (!g.requires_grad(ib)) return;
    auto dst = g.grad_buffer(ib).values();
    const auto up = g.grad(self).values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] -= up[i];
  });
}

Var mul(Var a, Var b) {
  require_same_shape(a, b, "mul");
  Tensor out = a.value();
  auto o = out.values();
  const auto bv = b.value().values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.graph().record("mul", std::move(out), {ia, ib}, [ia, ib](Graph& g, std::size_t self) {
    const auto up = g.grad(self).values();
    if (g.requires_grad(ia)) {
      auto dst = g.grad_buffer(ia).values();
      const auto other = g.value(ib).values();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += up[i] * other[i];
    }
    if (g.requires_grad(ib)) {
      auto dst = g.grad_buffer(ib).values();
      const auto other = g.value(ia).values();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += up[i] * other[i];
    }
  });
}

Var add_row(Var a, Var bias) {
  require_same_graph(a, bias, "add_row");
  require_rank2(a, "add_row");
  if (bias.value().rank() != 1 || bias.value().size() != a.value().cols()) {
    throw ShapeError("add_row: shape mismatch " + shape_string(a.shape()) + " vs " + shape_string(bias.shape()));
  }
  Tensor out = a.value();
  as_matrix(out).rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bias.value().values().data(),
                                                                  static_cast<Eigen::Index>(bias.value().size()));
  const std::size_t ia = a.id(), ib = bias.id();
  return a.graph().record("add_row", std::move(out), {ia, ib}, [ia, ib](Graph& g, std::size_t self) {
    g.accumulate(ia, g.grad(self));
    if (!g.requires_grad(ib)) return;
    auto& gb = g.grad_buffer(ib);
    Eigen::Map<Eigen::RowVectorXd>(gb.values().data(), static_cast<Eigen::Index>(gb.size())) +=
        as_matrix(g.grad(self)).colwise().sum();
  });
}

Var add_col(Var a, Var c) {
  require_same_graph(a, c, "add_col");
  require_rank2(a, "add_col");
  if (c.value().rank() != 1 || c.value().size() != a.value().rows()) {
    throw ShapeError("add_col: shape mismatch " + shape_string(a.shape()) + " vs " + shape_string(c.shape()));
  }
  Tensor out = a.value();
  as_matrix(out).colwise() +=
      Eigen::Map<const Eigen::VectorXd>(c.value().values().data(), static_cast<Eigen::Index>(c.value().size()));
  const std::size_t ia = a.id(), ic = c.id();
  return a.graph().record("add_col", std::move(out), {ia, ic}, [ia, ic](Graph& g, std::size_t self) {
    g.accumulate(ia, g.grad(self));
    if (!g.requires_grad(ic)) return;
    auto& gc = g.grad_buffer(ic);
    Eigen::Map<Eigen::VectorXd>(gc.values().data(), static_cast<Eigen::Index>(gc.size())) +=
        as_matrix(g.grad(self)).rowwise().sum();
  });
}

Var scale(Var a, double k) {
  return unary("scale", a, [k](double x) { return k * x; }, [k](double, double) { return k; });
}

Var add_scalar(Var a, double k) {
  return unary("add_scalar", a, [k](double x) { return x + k; }, [](double, double) { return 1.0; });
}

Var neg(Var a) { return scale(a, -1.0); }

// ---- elementwise nonlinearities -------------------------------------------------

double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

Var relu(Var a) {
  return unary("relu", a, [](double x) { return x > 0 ? x : 0.0; },
               [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

Var sigmoid(Var logits) {
  return unary("sigmoid", logits, [](double x) { return sigmoid(x); },
               [](double, double y) { return y * (1.0 - y); });
}

Var softplus(Var a) {
  return unary("softplus", a, [](double x) { return softplus(x); }, [](double x, double) { return sigmoid(x); });
}

Var exp(Var a) {
  return unary("exp", a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(Var a) {
  for (double v : a.value().values()) {
    if (!(v > 0)) {
      throw NumericalError("log: nonpositive input " + std::to_string(v) +
                           " (route through log_sum_exp or softplus)");
    }
  }
  return unary("log", a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var square(Var a) {
  return unary("square", a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

// ---- reductions -------------------------------------------------------------------

Var sum(Var a, std::size_t axis) {
  const Shape rs = reduced_shape(a.shape(), axis, "sum");
  const ReduceLayout L = layout_for(a.shape(), axis);
  Tensor out(rs, 0.0);
  const auto in = a.value().values();
  for (std::size_t o = 0; o < L.outer; ++o) {
    double s = 0.0;
    for (std::size_t k = 0; k < L.inner; ++k) s += in[L.index(o, k)];
    out[o] = s;
  }
  const std::size_t ia = a.id();
  return a.graph().record("sum", std::move(out), {ia}, [ia, L](Graph& g, std::size_t self) {
    if (!g.requires_grad(ia)) return;
    auto dst = g.grad_buffer(ia).values();
    const auto up = g.grad(self).values();
    for (std::size_t o = 0; o < L.outer; ++o)
      for (std::size_t k = 0; k < L.inner; ++k) dst[L.index(o, k)] += up[o];
  });
}

Var mean(Var a, std::size_t axis) {
  const Shape s = a.shape();
  if (s.empty() || axis >= s.size()) {
    throw ShapeError("mean: axis " + std::to_string(axis) + " invalid for " + shape_string(s));
  }
  return scale(sum(a, axis), 1.0 / static_cast<double>(s[axis]));
}

Var sum_all(Var a) {
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  const std::size_t ia = a.id();
  return a.graph().record("sum_all", Tensor::scalar(s), {ia}, [ia](Graph& g, std::size_t self) {
    if (!g.requires_grad(ia)) return;
    const double up = g.grad(self)[0];
    for (double& d : g.grad_buffer(ia).values()) d += up;
  });
}

Var mean_all(Var a) { return scale(sum_all(a), 1.0 / static_cast<double>(a.value().size())); }

Var log_sum_exp(Var a, std::size_t axis) {
  const Shape rs = reduced_shape(a.shape(), axis, "log_sum_exp");
  const ReduceLayout L = layout_for(a.shape(), axis);
  Tensor out(rs, 0.0);
  const auto in = a.value().values();
  for (std::size_t o = 0; o < L.outer; ++o) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < L.inner; ++k) m = std::max(m, in[L.index(o, k)]);
    double s = 0.0;
    for (std::size_t k = 0; k < L.inner; ++k) s += std::exp(in[L.index(o, k)] - m);
    out[o] = m + std::log(s);
  }
  const std::size_t ia = a.id();
  return a.graph().record("log_sum_exp", std::move(out), {ia}, [ia, L](Graph& g, std::size_t self) {
    if (!g.requires_grad(ia)) return;
    auto dst = g.grad_buffer(ia).values();
    const auto x = g.value(ia).values();
    const auto y = g.value(self).values();
    const auto up = g.grad(self).values();
    for (std::size_t o = 0; o < L.outer; ++o)
      for (std::size_t k = 0; k < L.inner; ++k) {
        const std::size_t i = L.index(o, k);
        dst[i] += up[o] * std::exp(x[i] - y[o]);
      }
  });
}

Var pairwise_sq_dist(Var a, Var b) {
  require_same_graph(a, b, "pairwise_sq_dist");
  require_rank2(a, "pairwise_sq_dist");
  require_rank2(b, "pairwise_sq_dist");
  const std::size_t n = a.value().rows(), m = b.value().rows(), d = a.value().cols();
  if (b.value().cols() != d) {
    throw ShapeError("pairwise_sq_dist: shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
  Tensor out(Shape{n, m}, 0.0);
  const auto av = a.value().values();
  const auto bv = b.value().values();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = av[i * d + k] - bv[j * d + k];
        s += diff * diff;
      }
      out[i * m + j] = s;
    }
  const std::size_t ia = a.id(), ib = b.id();
  return a.graph().record("pairwise_sq_dist", std::move(out), {ia, ib},
                          [ia, ib, n, m, d](Graph& g, std::size_t self) {
                            const auto x = g.value(ia).values();
                            const auto y = g.value(ib).values();
                            const auto up = g.grad(self).values();
                            const bool ga = g.requires_grad(ia), gb = g.requires_grad(ib);
                            std::span<double> da, db;
                            if (ga) da = g.grad_buffer(ia).values();
                            if (gb) db = g.grad_buffer(ib).values();
                            for (std::size_t i = 0; i < n; ++i)
                              for (std::size_t j = 0; j < m; ++j) {
                                const double w = 2.0 * up[i * m + j];
                                for (std::size_t k = 0; k < d; ++k) {
                                  const double diff = x[i * d + k] - y[j * d + k];
                                  if (ga) da[i * d + k] += w * diff;
                                  if (gb) db[j * d + k] -= w * diff;
                                }
                              }
                          });
}

}  // namespace sig::ad
