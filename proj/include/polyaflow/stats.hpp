#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "polyaflow/measures.hpp"

namespace polyaflow {

// Probability mass functions and tails used by the exact oracles and the tests.

double nb_pmf(double r, double z, Count n);
/// P(N > k) for N ~ NB(r, z).
double nb_tail(double r, double z, Count k);
double poisson_pmf(double mean, Count n);
double poisson_tail(double mean, Count k);
double binomial_pmf(Count n, double p, Count k);
double gamma_cdf(double shape, double x);

/// Upper tail of the chi-square distribution with `df` degrees of freedom.
double chi_square_sf(double statistic, double df);
/// Asymptotic Kolmogorov p-value for a one-sample KS distance on n points.
double kolmogorov_sf(double distance, std::size_t n);

/// One-sample KS distance between the sample and a continuous cdf.
double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf);

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};
MeanEstimate mean_and_se(std::span<const double> values);

}  // namespace polyaflow
