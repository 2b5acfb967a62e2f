#include "polyaflow/quadrature.hpp"

#include <cmath>

#include "polyaflow/errors.hpp"

namespace polyaflow {

// Newton iteration on L_n with the usual asymptotic starting guesses.
GaussLaguerre::GaussLaguerre(std::size_t n) : nodes(n), weights(n) {
  if (n == 0) throw ParameterError("GaussLaguerre: need at least one node");
  const double nn = static_cast<double>(n);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ii = static_cast<double>(i);
    if (i == 0) {
      z = 3.0 / (1.0 + 2.4 * nn);
    } else if (i == 1) {
      z += 15.0 / (1.0 + 2.5 * nn);
    } else {
      const double ai = ii - 1.0;
      z += ((1.0 + 2.55 * ai) / (1.9 * ai)) * (z - nodes[i - 2]);
    }
    double dp = 0.0;
    double p2 = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0;
      p2 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        const double jj = static_cast<double>(j);
        p1 = ((2.0 * jj + 1.0 - z) * p2 - jj * p3) / (jj + 1.0);
      }
      dp = nn * (p1 - p2) / z;
      const double z1 = z;
      z = z1 - p1 / dp;
      if (std::abs(z - z1) <= 1e-14 * std::abs(z)) break;
    }
    nodes[i] = z;
    weights[i] = -1.0 / (dp * nn * p2);
  }
}

double GaussLaguerre::integrate(const std::function<double(double)>& g) const {
  double s = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) s += weights[k] * g(nodes[k]);
  return s;
}

}  // namespace polyaflow
