#include "polyaflow/discrete.hpp"

#include <cmath>
#include <sstream>

#include "polyaflow/errors.hpp"
#include "polyaflow/kernels.hpp"
#include "polyaflow/stats.hpp"

namespace polyaflow {

namespace {

// Odometer over the sub-box {0..limit_i} of increments.
bool advance(CountVector& digits, const CountVector& limits) {
  for (std::size_t i = digits.size(); i-- > 0;) {
    if (digits[i] < limits[i]) {
      ++digits[i];
      return true;
    }
    digits[i] = 0;
  }
  return false;
}

}  // namespace

std::size_t CountBox::size() const {
  std::size_t n = 1;
  for (std::size_t i = 0; i < cells; ++i) n *= static_cast<std::size_t>(max_count) + 1;
  return n;
}

bool CountBox::contains(const CountVector& n) const {
  if (n.size() != cells) return false;
  for (Count c : n) {
    if (c > max_count) return false;
  }
  return true;
}

std::size_t CountBox::index(const CountVector& n) const {
  if (!contains(n)) throw NumericError("CountBox: count vector outside the truncation box");
  std::size_t idx = 0;
  for (Count c : n) idx = idx * (static_cast<std::size_t>(max_count) + 1) + static_cast<std::size_t>(c);
  return idx;
}

CountVector CountBox::at(std::size_t index) const {
  CountVector n(cells);
  const std::size_t radix = static_cast<std::size_t>(max_count) + 1;
  for (std::size_t i = cells; i-- > 0;) {
    n[i] = static_cast<Count>(index % radix);
    index /= radix;
  }
  return n;
}

DiscreteModel::DiscreteModel(ModelClock clock, std::vector<double> rho, Count max_count, double t_max)
    : clock_(clock), rho_(std::move(rho)), box_{rho_.size(), max_count}, t_max_(t_max) {
  if (rho_.empty() || rho_.size() > 3) throw ParameterError("DiscreteModel: 1 to 3 cells");
  for (double r : rho_) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw ParameterError("DiscreteModel: rho must be nonnegative");
  }
  if (max_count == 0) throw ParameterError("DiscreteModel: max_count must be positive");
  check_time(t_max);
  const double tail = marginal_tail(t_max);
  if (!(tail < kTailBudget)) {
    std::ostringstream msg;
    msg << "DiscreteModel: truncation at " << max_count << " leaves tail mass " << tail
        << " at t = " << t_max;
    throw NumericError(msg.str());
  }
}

void DiscreteModel::check_time(double t) const {
  if (!(t >= 0.0) || !std::isfinite(t)) throw ParameterError("DiscreteModel: time must be nonnegative");
  if (clock_ != ModelClock::poisson && t > kMaxBoundedTime) {
    throw ParameterError("DiscreteModel: time outside [0, 1)");
  }
}

double DiscreteModel::nb_param(double t) const {
  return clock_ == ModelClock::polya ? t : 1.0 / (2.0 - t);
}

double DiscreteModel::cell_marginal_pmf(std::size_t cell, double t, Count n) const {
  if (clock_ == ModelClock::poisson) return poisson_pmf(t * rho_.at(cell), n);
  return nb_pmf(rho_.at(cell), nb_param(t), n);
}

double DiscreteModel::marginal_pmf(double t, const CountVector& n) const {
  double p = 1.0;
  for (std::size_t i = 0; i < n.size(); ++i) p *= cell_marginal_pmf(i, t, n[i]);
  return p;
}

double DiscreteModel::cell_increment_pmf(std::size_t cell, double s, double t, Count base,
                                         Count inc) const {
  if (clock_ == ModelClock::poisson) return poisson_pmf((t - s) * rho_.at(cell), inc);
  const double a = nb_param(s);
  const double b = nb_param(t);
  return nb_pmf(rho_.at(cell) + static_cast<double>(base), (b - a) / (1.0 - a), inc);
}

double DiscreteModel::thinning_ratio(double s, double t) const {
  if (s == t) return 1.0;
  if (clock_ == ModelClock::poisson) return s / t;
  const double a = nb_param(s);
  const double b = nb_param(t);
  return a * (1.0 - b) / (b * (1.0 - a));
}

double DiscreteModel::clock_rate(double s) const {
  switch (clock_) {
    case ModelClock::condensation: return 1.0 / (1.0 - s);
    case ModelClock::polya: return 1.0 / (s * (1.0 - s));
    case ModelClock::poisson: return 1.0 / s;
  }
  return 0.0;
}

double DiscreteModel::marginal_tail(double t) const {
  double worst = 0.0;
  for (double r : rho_) {
    const double tail = clock_ == ModelClock::poisson ? poisson_tail(t * r, box_.max_count)
                                                      : nb_tail(r, nb_param(t), box_.max_count);
    worst = std::max(worst, tail);
  }
  return worst;
}

CountTable::CountTable(CountBox box, std::vector<double> values, std::vector<double> missing)
    : box_(box), values_(std::move(values)), missing_(std::move(missing)) {
  if (values_.size() != box_.size() || missing_.size() != box_.size()) {
    throw ParameterError("CountTable: size does not match box");
  }
}

double CountTable::operator()(const CountVector& n) const { return values_[box_.index(n)]; }

double CountTable::missing_mass(const CountVector& n) const { return missing_[box_.index(n)]; }

CountTable marginal_table(const DiscreteModel& model, double t) {
  model.check_time(t);
  const auto& box = model.box();
  std::vector<double> p(box.size());
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = model.marginal_pmf(t, box.at(k));
  return CountTable(box, std::move(p), std::vector<double>(box.size(), 0.0));
}

namespace {

// Shared body of the two semigroup_apply overloads. `inner_missing` may be null.
CountTable apply_kernel(const DiscreteModel& model, double s, double t,
                        const std::function<double(const CountVector&)>& phi,
                        const CountTable* inner) {
  model.check_time(s);
  model.check_time(t);
  if (s > t) throw ParameterError("semigroup_apply: need s <= t");
  const auto& box = model.box();
  const std::size_t radix = static_cast<std::size_t>(box.max_count) + 1;

  // kernel[i][b][j] = P(increment j in cell i | base b)
  std::vector<std::vector<std::vector<double>>> kernel(box.cells);
  for (std::size_t i = 0; i < box.cells; ++i) {
    kernel[i].resize(radix);
    for (std::size_t b = 0; b < radix; ++b) {
      kernel[i][b].resize(radix - b);
      for (std::size_t j = 0; j < radix - b; ++j) {
        kernel[i][b][j] = s == t ? (j == 0 ? 1.0 : 0.0)
                                 : model.cell_increment_pmf(i, s, t, b, j);
      }
    }
  }

  std::vector<double> values(box.size());
  std::vector<double> missing(box.size());
  CountVector inc(box.cells);
  CountVector limits(box.cells);
  CountVector target(box.cells);
  for (std::size_t k = 0; k < box.size(); ++k) {
    const CountVector nu = box.at(k);
    for (std::size_t i = 0; i < box.cells; ++i) limits[i] = box.max_count - nu[i];
    std::fill(inc.begin(), inc.end(), 0);
    double acc = 0.0;
    double kept = 0.0;
    do {
      double w = 1.0;
      for (std::size_t i = 0; i < box.cells; ++i) {
        w *= kernel[i][nu[i]][inc[i]];
        target[i] = nu[i] + inc[i];
      }
      if (w == 0.0) continue;
      acc += w * phi(target);
      kept += inner ? w * (1.0 - inner->missing_mass(target)) : w;
    } while (advance(inc, limits));
    values[k] = acc;
    missing[k] = std::max(0.0, 1.0 - kept);
  }
  return CountTable(box, std::move(values), std::move(missing));
}

}  // namespace

CountTable semigroup_apply(const DiscreteModel& model, double s, double t, const CountFunction& phi) {
  return apply_kernel(model, s, t, phi, nullptr);
}

CountTable semigroup_apply(const DiscreteModel& model, double s, double t, const CountTable& phi) {
  if (!(phi.box().cells == model.box().cells && phi.box().max_count == model.box().max_count)) {
    throw ParameterError("semigroup_apply: table box differs from model box");
  }
  return apply_kernel(
      model, s, t, [&phi](const CountVector& n) { return phi(n); }, &phi);
}

CountTable reduced_palm(const CountTable& pmf, const CountVector& nu) {
  const auto& box = pmf.box();
  if (nu.size() != box.cells) throw ParameterError("reduced_palm: nu has wrong number of cells");
  std::vector<double> p = pmf.values();
  CountVector shifted(box.cells);
  for (std::size_t cell = 0; cell < box.cells; ++cell) {
    for (Count unit = 0; unit < nu[cell]; ++unit) {
      std::vector<double> next(p.size(), 0.0);
      double norm = 0.0;
      for (std::size_t k = 0; k < p.size(); ++k) {
        const CountVector mu = box.at(k);
        if (mu[cell] == box.max_count) continue;
        shifted = mu;
        ++shifted[cell];
        next[k] = static_cast<double>(mu[cell] + 1) * p[box.index(shifted)];
        norm += next[k];
      }
      if (!(norm > 0.0)) throw DomainError("reduced_palm: zero normalizer (nu outside the support)");
      for (double& v : next) v /= norm;
      p = std::move(next);
    }
  }
  return CountTable(box, std::move(p), std::vector<double>(box.size(), 0.0));
}

CountTable reduced_palm_enumerate(const DiscreteModel& model, double t, const CountVector& nu) {
  return reduced_palm(marginal_table(model, t), nu);
}

GeneratorValue generator_apply(const DiscreteModel& model, double s, const CountFunction& phi,
                               const CountVector& nu) {
  model.check_time(s);
  if (model.clock() != ModelClock::condensation && !(s > 0.0)) {
    throw ParameterError("generator_apply: this clock needs s > 0");
  }
  const auto palm = reduced_palm_enumerate(model, s, nu);
  const auto& box = model.box();
  const CountVector zero(box.cells, 0);
  const double void_prob = palm(zero);
  if (!(void_prob > 0.0)) throw NumericError("generator_apply: zero void probability");
  const double base = phi(nu);
  double jump = 0.0;
  for (std::size_t i = 0; i < box.cells; ++i) {
    CountVector e = zero;
    e[i] = 1;
    const double mass = palm(e);
    if (mass == 0.0) continue;
    CountVector target = nu;
    ++target[i];
    jump += mass * (phi(target) - base);
  }
  const double ratio = jump / void_prob;
  return {model.clock_rate(s) * ratio, ratio / (1.0 - s)};
}

DualityValue duality_exact(const DiscreteModel& model, double s, double t, const CountFunction& phi,
                           const CountFunction& psi) {
  model.check_time(s);
  model.check_time(t);
  if (s > t) throw ParameterError("duality_exact: need s <= t");
  const auto& box = model.box();
  const double r = model.thinning_ratio(s, t);

  DualityValue out;
  const auto forward = semigroup_apply(model, s, t, phi);
  CountVector kept(box.cells);
  CountVector limits(box.cells);
  for (std::size_t k = 0; k < box.size(); ++k) {
    const CountVector n = box.at(k);
    // forward side: psi(Y_s) E[phi(Y_t) | Y_s]
    out.forward_side += model.marginal_pmf(s, n) * psi(n) * forward.values()[k];
    // backward side: phi(Y_t) E[psi(Y_s) | Y_t] with binomial thinning per cell
    const double pt = model.marginal_pmf(t, n);
    if (pt == 0.0) continue;
    std::fill(kept.begin(), kept.end(), 0);
    limits = n;
    double back = 0.0;
    do {
      double w = 1.0;
      for (std::size_t i = 0; i < box.cells; ++i) w *= binomial_pmf(n[i], r, kept[i]);
      back += w * psi(kept);
    } while (advance(kept, limits));
    out.backward_side += pt * phi(n) * back;
  }
  return out;
}

}  // namespace polyaflow
