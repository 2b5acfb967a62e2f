#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "polyaflow/measures.hpp"

namespace polyaflow {

using CountFunction = std::function<double(const CountVector&)>;

/// Which flow the model's marginals follow.
///  - polya:        Y_t(i) ~ NB(rho_i, t)          (Polya sum flow, Y_0 = 0)
///  - condensation: Y_t(i) ~ NB(rho_i, 1/(2 - t))  (Gamma-directed Cox flow, Y_t ~ P_{1-t})
///  - poisson:      Y_t(i) ~ Poisson(t rho_i)
enum class ModelClock { polya, condensation, poisson };

/// The box {0..max_count}^cells of count vectors, indexed in mixed radix
/// with cell 0 as the most significant digit (lexicographic order).
struct CountBox {
  std::size_t cells = 1;
  Count max_count = 0;

  std::size_t size() const;
  bool contains(const CountVector& n) const;
  std::size_t index(const CountVector& n) const;
  CountVector at(std::size_t index) const;
};

/// Exact oracle on 1-3 cells with per-cell truncation at max_count.
/// Construction fails with NumericError if any marginal at t_max puts more
/// than 1e-10 mass above max_count.
class DiscreteModel {
 public:
  static constexpr double kTailBudget = 1e-10;

  DiscreteModel(ModelClock clock, std::vector<double> rho, Count max_count, double t_max);

  ModelClock clock() const { return clock_; }
  const std::vector<double>& rho() const { return rho_; }
  const CountBox& box() const { return box_; }
  double t_max() const { return t_max_; }

  double cell_marginal_pmf(std::size_t cell, double t, Count n) const;
  double marginal_pmf(double t, const CountVector& n) const;
  /// pmf of the cell increment Y_t(i) - Y_s(i) given Y_s(i) = base.
  double cell_increment_pmf(std::size_t cell, double s, double t, Count base, Count inc) const;
  /// Retention probability of the backward (thinning) kernel.
  double thinning_ratio(double s, double t) const;
  /// Factor that converts the condensation-clock generator into this clock:
  /// u'(s) / (1 - u(s)) where P_{1-u(s)} is the law of Y_s.
  double clock_rate(double s) const;
  /// Largest per-cell probability of exceeding max_count at time t.
  double marginal_tail(double t) const;
  void check_time(double t) const;

 private:
  double nb_param(double t) const;

  ModelClock clock_;
  std::vector<double> rho_;
  CountBox box_;
  double t_max_;
};

/// Function values on a CountBox plus, per state, the probability mass that
/// truncation dropped while computing them. Evaluating outside the box
/// throws NumericError.
class CountTable {
 public:
  CountTable(CountBox box, std::vector<double> values, std::vector<double> missing);

  const CountBox& box() const { return box_; }
  double operator()(const CountVector& n) const;
  double missing_mass(const CountVector& n) const;
  const std::vector<double>& values() const { return values_; }

 private:
  CountBox box_;
  std::vector<double> values_;
  std::vector<double> missing_;
};

/// The joint law of Y_t on the box.
CountTable marginal_table(const DiscreteModel& model, double t);

/// T_{s,t} phi (nu) = E[phi(nu + increment)], summing increments that stay in the box.
CountTable semigroup_apply(const DiscreteModel& model, double s, double t, const CountFunction& phi);
/// Composition form; missing mass propagates from the inner table.
CountTable semigroup_apply(const DiscreteModel& model, double s, double t, const CountTable& phi);

/// Iterated reduced Palm distribution of a pmf on the box at configuration nu.
/// One unit at cell i maps p to p'(mu) proportional to (mu_i + 1) p(mu + e_i).
/// Throws DomainError if a normalizer vanishes.
CountTable reduced_palm(const CountTable& pmf, const CountVector& nu);
/// Reduced Palm distribution of the model's marginal at time t.
CountTable reduced_palm_enumerate(const DiscreteModel& model, double t, const CountVector& nu);

struct GeneratorValue {
  /// Generator in the model's own clock.
  double value = 0.0;
  /// The condensation-clock formula taken literally in this clock, i.e. with
  /// prefactor 1/((1 - s) P^!(void)). Equals `value` for the condensation clock.
  double verbatim = 0.0;
};

/// Generator from reduced Palm probabilities:
///   A_s phi(nu) = c(s) / P^!(void) * sum_i P^!(e_i) (phi(nu + e_i) - phi(nu)),
/// with c(s) = clock_rate(s). Throws NumericError when P^!(void) is 0.
GeneratorValue generator_apply(const DiscreteModel& model, double s, const CountFunction& phi,
                               const CountVector& nu);

struct DualityValue {
  /// E over Y_t of phi(Y_t) times the backward expectation of psi.
  double backward_side = 0.0;
  /// E over Y_s of psi(Y_s) times the forward expectation of phi.
  double forward_side = 0.0;
};
DualityValue duality_exact(const DiscreteModel& model, double s, double t, const CountFunction& phi,
                           const CountFunction& psi);

}  // namespace polyaflow
