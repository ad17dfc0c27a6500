#pragma once

// Tape-style reverse-mode differentiation over dense double tensors.
//
// A Graph records every primitive as it is evaluated. Parameters enter the
// graph through Graph::parameter(); after Graph::backward(loss) each
// registered Parameter holds d loss / d value in its `grad` field. A graph is
// single use: build a fresh one for every forward pass.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "sig/tensor.hpp"

namespace sig::ad {

// A named, trainable tensor. `grad` is overwritten by Graph::backward.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value.shape(), 0.0) {}
};

class Graph;

// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
class Var {
 public:
  Var() = default;
  Var(Graph* g, std::size_t id) : graph_(g), id_(id) {}

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  double item() const { return value().item(); }
  Graph& graph() const { return *graph_; }
  std::size_t id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }

 private:
  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

class Graph {
 public:
  // Propagates the gradient of node `self` into its inputs.
  using BackwardFn = std::function<void(Graph&, std::size_t self)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  Var parameter(Parameter& p);

  // Records an operation. Used by the primitives; throws NumericalError if
  // `value` contains a non-finite entry.
  Var record(const char* op, Tensor value, std::vector<std::size_t> inputs, BackwardFn fn);

  // Reverse sweep from a single-element loss. Fills `grad` of every parameter
  // registered with this graph (zero when the loss does not depend on it).
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }
  bool differentiated() const { return differentiated_; }

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  const Tensor& grad(std::size_t id) const { return nodes_[id].grad; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  const std::vector<std::size_t>& inputs(std::size_t id) const { return nodes_[id].inputs; }

  // Adds `delta` into the gradient of node `id` if it requires one.
  void accumulate(std::size_t id, const Tensor& delta);
  // Gradient buffer of `id`, for primitives that scatter in place.
  Tensor& grad_buffer(std::size_t id) { return nodes_[id].grad; }

 private:
  struct Node {
    const char* op = "";
    Tensor value;
    Tensor grad;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    bool requires_grad = false;
    Parameter* param = nullptr;
  };

  std::vector<Node> nodes_;
  bool differentiated_ = false;
};

// ---- primitives -----------------------------------------------------------
// Rank-2 operands are [rows x cols]; reductions take axis 0 or 1 and drop it.

Var matmul(Var a, Var b);
Var transpose(Var a);
Var reshape(Var a, Shape shape);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
// a[N x K] + bias[K] broadcast over rows.
Var add_row(Var a, Var bias);
// a[N x K] + c[N] broadcast over columns.
Var add_col(Var a, Var c);
Var scale(Var a, double k);
Var add_scalar(Var a, double k);
Var neg(Var a);

Var relu(Var a);
Var sigmoid(Var logits);
Var softplus(Var a);
Var exp(Var a);
// Throws NumericalError on any nonpositive entry.
Var log(Var a);
Var square(Var a);

Var sum(Var a, std::size_t axis);
Var mean(Var a, std::size_t axis);
Var sum_all(Var a);
Var mean_all(Var a);
// max-shifted log(sum(exp(a))) along `axis`.
Var log_sum_exp(Var a, std::size_t axis);

// out[i][j] = ||a_i - b_j||^2 for a[N x D], b[M x D].
Var pairwise_sq_dist(Var a, Var b);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator*(double k, Var a) { return scale(a, k); }
inline Var operator-(Var a) { return neg(a); }

// Scalar helpers shared with the losses.
double softplus(double t);
double sigmoid(double t);

}  // namespace sig::ad
