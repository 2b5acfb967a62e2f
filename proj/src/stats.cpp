#include "polyaflow/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "polyaflow/errors.hpp"

namespace polyaflow {

double nb_pmf(double r, double z, Count n) {
  if (r == 0.0 || z == 0.0) return n == 0 ? 1.0 : 0.0;
  const double k = static_cast<double>(n);
  return std::exp(std::lgamma(r + k) - std::lgamma(r) - std::lgamma(k + 1.0) + r * std::log1p(-z) +
                  k * std::log(z));
}

double nb_tail(double r, double z, Count k) {
  if (r == 0.0 || z == 0.0) return 0.0;
  return boost::math::ibeta(static_cast<double>(k) + 1.0, r, z);
}

double poisson_pmf(double mean, Count n) {
  if (mean == 0.0) return n == 0 ? 1.0 : 0.0;
  const double k = static_cast<double>(n);
  return std::exp(k * std::log(mean) - mean - std::lgamma(k + 1.0));
}

double poisson_tail(double mean, Count k) {
  if (mean == 0.0) return 0.0;
  return boost::math::gamma_p(static_cast<double>(k) + 1.0, mean);
}

double binomial_pmf(Count n, double p, Count k) {
  if (k > n) return 0.0;
  if (p == 0.0) return k == 0 ? 1.0 : 0.0;
  if (p == 1.0) return k == n ? 1.0 : 0.0;
  const double nn = static_cast<double>(n);
  const double kk = static_cast<double>(k);
  return std::exp(std::lgamma(nn + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(nn - kk + 1.0) +
                  kk * std::log(p) + (nn - kk) * std::log1p(-p));
}

double gamma_cdf(double shape, double x) {
  if (x <= 0.0) return 0.0;
  if (shape == 0.0) return 1.0;
  return boost::math::gamma_p(shape, x);
}

double chi_square_sf(double statistic, double df) {
  if (df <= 0.0) return 1.0;
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * statistic);
}

double kolmogorov_sf(double distance, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * distance;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw ParameterError("ks_distance: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

MeanEstimate mean_and_se(std::span<const double> values) {
  if (values.empty()) throw ParameterError("mean_and_se: empty sample");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double var = values.size() > 1 ? ss / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

}  // namespace polyaflow
