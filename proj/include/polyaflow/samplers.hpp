#pragma once

#include "polyaflow/measures.hpp"
#include "polyaflow/rng.hpp"

namespace polyaflow {

// Scalar variates. All are exact samplers (no truncation or approximation).

/// Gamma(shape, rate 1). shape == 0 gives 0.
double sample_gamma(double shape, RngStream& rng);
Count sample_poisson(double mean, RngStream& rng);
Count sample_binomial(Count n, double p, RngStream& rng);
/// Logarithmic series: p(m) = -z^m / (m log(1 - z)), m >= 1.
Count sample_logarithmic(double z, RngStream& rng);
/// p(n) = Gamma(r+n) / (Gamma(r) n!) (1-z)^r z^n. r == 0 gives 0.
Count sample_negative_binomial(double r, double z, RngStream& rng);

/// Parameters of the Polya sum process with Papangelou kernel z(rho + mu).
struct PolyaParams {
  double z;
  CellMeasure rho;

  /// Throws ParameterError unless 0 < z < 1 and rho has positive mass.
  void validate() const;
};

PointConfig sample_poisson_process(const CellMeasure& intensity, RngStream& rng);

/// Compound Poisson-logarithmic construction: per cell, Poisson(-rho_i log(1-z))
/// towers at uniform locations, each carrying a Log(z) multiplicity.
PointConfig sample_polya_sum(const PolyaParams& params, RngStream& rng);

/// Polya sum process with base measure rho + atoms, where `atoms` is an
/// atomic part (e.g. the current state of a flow). Every atom of multiplicity
/// k receives an NB(k, z) number of extra points at its own location.
/// Accepts z in [0, 1); z == 0 gives the empty configuration.
PointConfig sample_polya_sum(double z, const CellMeasure& rho, const PointConfig& atoms,
                             RngStream& rng);

/// Independent thinning: each unit of multiplicity survives with probability q.
PointConfig thin(const PointConfig& c, double q, RngStream& rng);

/// Polya difference process with kernel z(base - mu) for a fixed base
/// configuration; identical in law to thinning base with q = z / (1 + z).
/// z == +infinity returns base.
PointConfig sample_polya_difference(double z, const PointConfig& base, RngStream& rng);

/// Gamma random measure at cell resolution: independent Gamma(rho_i, 1) masses.
CellMeasure sample_gamma_measure(const CellMeasure& rho, RngStream& rng);

}  // namespace polyaflow
