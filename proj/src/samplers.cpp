#include "polyaflow/samplers.hpp"

#include <cmath>
#include <limits>

#include "polyaflow/errors.hpp"

namespace polyaflow {

namespace {

// Above this parameter the logarithmic inversion loop gets long (its expected
// length is the distribution mean), so switch to Kemp's LK rejection.
constexpr double kLogInversionMaxZ = 0.9;
constexpr Count kBinomialInversionMaxN = 64;
constexpr double kPoissonInversionMaxMean = 16.0;

double marsaglia_tsang(double shape, RngStream& rng) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x;
    double v;
    do {
      x = rng.standard_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

Count binomial_inversion(Count n, double p, RngStream& rng) {
  const double q = 1.0 - p;
  const double ratio = p / q;
  double pmf = std::pow(q, static_cast<double>(n));
  double cdf = pmf;
  const double u = rng.uniform();
  Count k = 0;
  while (u > cdf && k < n) {
    pmf *= ratio * static_cast<double>(n - k) / static_cast<double>(k + 1);
    ++k;
    cdf += pmf;
  }
  return k;
}

Count logarithmic_inversion(double z, RngStream& rng) {
  const double u = rng.uniform();
  double pmf = -z / std::log1p(-z);
  double cdf = pmf;
  Count m = 1;
  while (u > cdf) {
    pmf *= z * static_cast<double>(m) / static_cast<double>(m + 1);
    ++m;
    cdf += pmf;
    if (pmf == 0.0) break;  // cdf stalled below u by rounding
  }
  return m;
}

// Kemp (1981), algorithm LK.
Count logarithmic_kemp(double z, RngStream& rng) {
  const double r = std::log1p(-z);
  while (true) {
    const double v = rng.uniform();
    if (v >= z) return 1;
    const double q = -std::expm1(r * rng.uniform());
    if (v <= q * q) {
      const double m = std::floor(1.0 + std::log(v) / std::log(q));
      if (m < 1.0 || !std::isfinite(m)) continue;
      if (m >= static_cast<double>(std::numeric_limits<Count>::max())) continue;
      return static_cast<Count>(m);
    }
    return v >= q ? 1 : 2;
  }
}

double uniform_in(double lo, double hi, RngStream& rng) {
  double x = lo + (hi - lo) * rng.uniform();
  return x < hi ? x : std::nextafter(hi, lo);
}

}  // namespace

double sample_gamma(double shape, RngStream& rng) {
  if (!(shape >= 0.0) || !std::isfinite(shape)) {
    throw ParameterError("sample_gamma: shape must be finite and nonnegative");
  }
  if (shape == 0.0) return 0.0;
  if (shape >= 1.0) return marsaglia_tsang(shape, rng);
  // Gamma(a) = Gamma(a + 1) * U^(1/a); computed in logs so tiny shapes underflow to 0 cleanly.
  const double g = marsaglia_tsang(shape + 1.0, rng);
  return std::exp(std::log(g) + std::log(rng.uniform()) / shape);
}

Count sample_poisson(double mean, RngStream& rng) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw ParameterError("sample_poisson: mean must be finite and nonnegative");
  }
  // Ahrens-Dieter reduction: the m-th arrival time of a unit-rate Poisson
  // process is Gamma(m); arrivals before it are uniform order statistics.
  Count k = 0;
  while (mean > kPoissonInversionMaxMean) {
    const auto m = static_cast<Count>(std::floor(0.875 * mean));
    const double arrival = sample_gamma(static_cast<double>(m), rng);
    if (arrival > mean) return k + sample_binomial(m - 1, mean / arrival, rng);
    k += m;
    mean -= arrival;
  }
  if (mean == 0.0) return k;
  const double u = rng.uniform();
  double pmf = std::exp(-mean);
  double cdf = pmf;
  Count n = 0;
  while (u > cdf) {
    ++n;
    pmf *= mean / static_cast<double>(n);
    cdf += pmf;
    if (pmf == 0.0) break;
  }
  return k + n;
}

Count sample_binomial(Count n, double p, RngStream& rng) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ParameterError("sample_binomial: p must lie in [0, 1]");
  }
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;
  if (p > 0.5) return n - sample_binomial(n, 1.0 - p, rng);
  if (n <= kBinomialInversionMaxN) return binomial_inversion(n, p, rng);
  // Knuth's order-statistic recursion: the a-th smallest of n uniforms is Beta(a, n+1-a).
  const Count a = 1 + n / 2;
  const Count b = n + 1 - a;
  const double ga = sample_gamma(static_cast<double>(a), rng);
  const double gb = sample_gamma(static_cast<double>(b), rng);
  const double x = ga / (ga + gb);
  if (x >= p) return sample_binomial(a - 1, p / x, rng);
  return a + sample_binomial(b - 1, (p - x) / (1.0 - x), rng);
}

Count sample_logarithmic(double z, RngStream& rng) {
  if (!(z > 0.0 && z < 1.0)) {
    throw ParameterError("sample_logarithmic: z must lie in (0, 1)");
  }
  return z <= kLogInversionMaxZ ? logarithmic_inversion(z, rng) : logarithmic_kemp(z, rng);
}

Count sample_negative_binomial(double r, double z, RngStream& rng) {
  if (!(r >= 0.0) || !std::isfinite(r)) {
    throw ParameterError("sample_negative_binomial: r must be finite and nonnegative");
  }
  if (!(z >= 0.0 && z < 1.0)) {
    throw ParameterError("sample_negative_binomial: z must lie in [0, 1)");
  }
  if (r == 0.0 || z == 0.0) return 0;
  return sample_poisson(sample_gamma(r, rng) * z / (1.0 - z), rng);
}

void PolyaParams::validate() const {
  if (!(z > 0.0 && z < 1.0)) throw ParameterError("PolyaParams: z must lie in (0, 1)");
  if (!(rho.total() > 0.0)) throw ParameterError("PolyaParams: rho must have positive mass");
}

PointConfig sample_poisson_process(const CellMeasure& intensity, RngStream& rng) {
  const auto& w = intensity.window();
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < w.cells(); ++i) {
    const Count n = sample_poisson(intensity.mass(i), rng);
    for (Count k = 0; k < n; ++k) atoms.push_back({uniform_in(w.cell_lo(i), w.cell_hi(i), rng), 1});
  }
  return PointConfig::from_unsorted(w, std::move(atoms));
}

PointConfig sample_polya_sum(const PolyaParams& params, RngStream& rng) {
  params.validate();
  return sample_polya_sum(params.z, params.rho, PointConfig(params.rho.window()), rng);
}

PointConfig sample_polya_sum(double z, const CellMeasure& rho, const PointConfig& atoms,
                             RngStream& rng) {
  if (!(z >= 0.0 && z < 1.0)) throw ParameterError("sample_polya_sum: z must lie in [0, 1)");
  if (!(rho.window() == atoms.window())) throw ParameterError("sample_polya_sum: window mismatch");
  const auto& w = rho.window();
  if (z == 0.0) return PointConfig(w);
  const double tower_rate = -std::log1p(-z);
  std::vector<Atom> out;
  for (std::size_t i = 0; i < w.cells(); ++i) {
    const Count towers = sample_poisson(rho.mass(i) * tower_rate, rng);
    for (Count k = 0; k < towers; ++k) {
      const double x = uniform_in(w.cell_lo(i), w.cell_hi(i), rng);
      out.push_back({x, sample_logarithmic(z, rng)});
    }
  }
  for (const auto& a : atoms.atoms()) {
    const Count extra = sample_negative_binomial(static_cast<double>(a.multiplicity), z, rng);
    if (extra > 0) out.push_back({a.location, extra});
  }
  return PointConfig::from_unsorted(w, std::move(out));
}

PointConfig thin(const PointConfig& c, double q, RngStream& rng) {
  if (!(q >= 0.0 && q <= 1.0)) throw ParameterError("thin: q must lie in [0, 1]");
  if (q == 1.0) return c;
  std::vector<Atom> kept;
  if (q > 0.0) {
    for (const auto& a : c.atoms()) {
      const Count m = sample_binomial(a.multiplicity, q, rng);
      if (m > 0) kept.push_back({a.location, m});
    }
  }
  return PointConfig(c.window(), std::move(kept));
}

PointConfig sample_polya_difference(double z, const PointConfig& base, RngStream& rng) {
  if (!(z > 0.0)) throw ParameterError("sample_polya_difference: z must be positive");
  if (std::isinf(z)) return base;
  return thin(base, z / (1.0 + z), rng);
}

CellMeasure sample_gamma_measure(const CellMeasure& rho, RngStream& rng) {
  std::vector<double> masses(rho.window().cells());
  for (std::size_t i = 0; i < masses.size(); ++i) masses[i] = sample_gamma(rho.mass(i), rng);
  return CellMeasure(rho.window(), std::move(masses));
}

}  // namespace polyaflow
