#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "polyaflow/discrete.hpp"
#include "polyaflow/kernels.hpp"
#include "polyaflow/measures.hpp"
#include "polyaflow/stats.hpp"

namespace polyaflow {

/// Outcome of one check. Statistical checks pass when p_value > threshold;
/// numeric checks pass when max_abs_error < threshold.
struct TestReport {
  enum class Kind { statistical, numeric };

  std::string name;
  Kind kind = Kind::numeric;
  double statistic = 0.0;
  /// p-value (statistical) or max_abs_error (numeric).
  double value = 0.0;
  std::size_t n_samples = 0;
  double threshold = 0.0;
  bool passed = false;
  std::uint64_t seed = 0;
  std::string detail;

  static TestReport statistical(std::string name, double statistic, double p_value, std::size_t n,
                                double threshold, std::uint64_t seed, std::string detail = {});
  static TestReport numeric(std::string name, double statistic, double max_abs_error, std::size_t n,
                            double threshold, std::uint64_t seed, std::string detail = {});
};

nlohmann::json to_json(const TestReport& r);
std::string csv_header();
std::string to_csv_row(const TestReport& r);

// Chi-square tests on count vectors. Bins are formed in lexicographic order
// of count vectors and pooled greedily until every expected count is >= 5.

inline constexpr std::size_t kMinChiSquareSamples = 1000;
inline constexpr double kMinExpectedPerBin = 5.0;

struct ChiSquareResult {
  double statistic = 0.0;
  double df = 0.0;
  double p_value = 1.0;
  std::size_t bins = 0;
};

/// Goodness of fit against an exact joint pmf.
ChiSquareResult chi_square_gof(const std::vector<CountVector>& samples, const CountFunction& pmf);
/// Two-sample homogeneity test; both samples share the pooled bins.
ChiSquareResult chi_square_two_sample(const std::vector<CountVector>& a, const std::vector<CountVector>& b);

TestReport chi_square_counts(std::string name, const std::vector<CountVector>& samples,
                             const CountFunction& pmf, double threshold, std::uint64_t seed);
TestReport chi_square_counts(std::string name, const std::vector<CountVector>& a,
                             const std::vector<CountVector>& b, double threshold, std::uint64_t seed);

/// Mean and standard error of exp(-integral f dc) over the sample.
MeanEstimate laplace_mc(std::span<const PointConfig> configs, const StepFunction& f);

/// Test function of a cell index and the cell-count vector.
using CellCountFunction = std::function<double(std::size_t, const CountVector&)>;
/// Test function of a cell index and the cell-mass vector.
using CellMassFunction = std::function<double(std::size_t, std::span<const double>)>;

/// Monte Carlo Campbell/Papangelou identity for Poy(z, rho):
///   E sum_x h(x, mu) mu(dx) = z E sum_i (rho_i + mu_i) h(i, mu + e_i).
/// Paired per sample; passes when |LHS - RHS| < 3 standard errors.
TestReport mecke_check_polya(double z, const CellMeasure& rho, const CellCountFunction& h, std::size_t n,
                             std::uint64_t seed, std::size_t threads);
/// Same identity by enumeration over a truncated box (1-3 cells).
TestReport mecke_exact_polya(double z, const std::vector<double>& rho, const CellCountFunction& h,
                             Count max_count, double tolerance = 1e-10);

/// Campbell identity of the Gamma random measure:
///   E sum_i Q_i h(i, Q) = E sum_i rho_i integral h(i, Q + r e_i) e^{-r} dr,
/// with Gauss-Laguerre in r. Passes when |LHS - RHS| < 3 SE + quadrature error,
/// the latter estimated as the change from nodes/2 to nodes.
TestReport mecke_check_gamma(const CellMeasure& rho, const CellMassFunction& h, std::size_t n,
                             std::size_t quadrature_nodes, std::uint64_t seed, std::size_t threads);

/// Monte Carlo duality of the forward and backward kernels. The backward side
/// draws Y_t then one backward step; the forward side draws Y_s then one
/// forward step. Passes when the sides agree within 3 combined SE, and, if
/// `exact` is given, each side is within 3 SE of it.
TestReport duality_check(const FlowSpec& spec, double s, double t, const CountFunction& phi,
                         const CountFunction& psi, std::size_t n, std::uint64_t seed, std::size_t threads,
                         std::optional<double> exact = std::nullopt);
/// Exact twin of duality_check on a DiscreteModel.
TestReport duality_exact_check(const DiscreteModel& model, double s, double t, const CountFunction& phi,
                               const CountFunction& psi, double tolerance = 1e-9);

}  // namespace polyaflow
