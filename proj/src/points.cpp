#include "sig/points.hpp"

#include "sig/error.hpp"

namespace sig {

Tensor Points::to_tensor() const {
  if (empty()) throw ShapeError("cannot build a tensor from an empty point set");
  return Tensor(Shape{size(), dim}, coords);
}

Points Points::from_tensor(const Tensor& t) {
  if (t.rank() == 2) return Points(t.cols(), t.data());
  if (t.rank() == 1) return Points(1, t.data());
  throw ShapeError("point set needs a rank 1 or 2 tensor, got " + shape_string(t.shape()));
}

}  // namespace sig
