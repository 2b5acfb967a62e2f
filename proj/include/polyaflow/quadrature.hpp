#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace polyaflow {

/// Nodes and weights of n-point Gauss-Laguerre quadrature:
///   integral_0^inf g(r) e^{-r} dr ~ sum_k weights[k] g(nodes[k]).
struct GaussLaguerre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLaguerre(std::size_t n);
  double integrate(const std::function<double(double)>& g) const;
};

}  // namespace polyaflow
