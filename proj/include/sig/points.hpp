#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sig/tensor.hpp"

namespace sig {

// A row-major set of samples. Unlike Tensor it may be empty.
struct Points {
  std::size_t dim = 1;
  std::vector<double> coords;

  Points() = default;
  Points(std::size_t d, std::vector<double> c) : dim(d), coords(std::move(c)) {}

  std::size_t size() const { return dim == 0 ? 0 : coords.size() / dim; }
  bool empty() const { return coords.empty(); }
  double operator()(std::size_t i, std::size_t k) const { return coords[i * dim + k]; }
  std::span<const double> row(std::size_t i) const { return {coords.data() + i * dim, dim}; }

  // Requires at least one row.
  Tensor to_tensor() const;
  static Points from_tensor(const Tensor& t);
};

}  // namespace sig
