#include "polyaflow/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "polyaflow/errors.hpp"
#include "polyaflow/samplers.hpp"

namespace polyaflow {

namespace {

void require_prob(double x, const char* what, bool allow_zero) {
  const bool ok = allow_zero ? (x >= 0.0 && x <= 1.0) : (x > 0.0 && x <= 1.0);
  if (!ok) throw ParameterError(std::string(what) + " out of range");
}

void require_order(const FlowSpec& spec, double s, double t, const char* op) {
  spec.check_time(s);
  spec.check_time(t);
  if (s > t) throw ParameterError(std::string(op) + ": need s <= t");
}

std::size_t pick_component(const std::vector<double>& weights, RngStream& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    acc += weights[k];
    if (u < acc) return k;
  }
  // Rounding can leave acc slightly below 1; fall back to the last positive weight.
  for (std::size_t k = weights.size(); k-- > 0;) {
    if (weights[k] > 0.0) return k;
  }
  return weights.size() - 1;
}

}  // namespace

std::string to_string(FlowVariant v) {
  switch (v) {
    case FlowVariant::polya_sum: return "polya_sum";
    case FlowVariant::poisson: return "poisson";
    case FlowVariant::polya_difference: return "polya_difference";
    case FlowVariant::cox_mixture: return "cox_mixture";
  }
  return "unknown";
}

FlowVariant flow_variant_from_string(const std::string& name) {
  for (auto v : {FlowVariant::polya_sum, FlowVariant::poisson, FlowVariant::polya_difference,
                 FlowVariant::cox_mixture}) {
    if (to_string(v) == name) return v;
  }
  throw ParameterError("unknown flow variant '" + name + "'");
}

std::vector<std::string> FlowSpec::violations() const {
  std::vector<std::string> out;
  switch (variant) {
    case FlowVariant::polya_sum:
    case FlowVariant::poisson:
      if (!(rho.total() > 0.0)) out.push_back("flow.rho: total mass must be positive");
      break;
    case FlowVariant::polya_difference:
      if (!(z > 0.0) || !std::isfinite(z)) out.push_back("flow.z: must be a finite positive real");
      for (double m : rho.masses()) {
        if (m != std::floor(m)) {
          out.push_back("flow.rho: polya_difference needs integer masses (rho is a configuration)");
          break;
        }
      }
      break;
    case FlowVariant::cox_mixture: {
      if (mixture.empty()) {
        if (!(rho.total() > 0.0)) out.push_back("flow.rho: Gamma shape measure must have positive mass");
        break;
      }
      double total = 0.0;
      for (std::size_t k = 0; k < mixture.size(); ++k) {
        const auto& c = mixture[k];
        if (!(c.weight >= 0.0 && c.weight <= 1.0)) {
          out.push_back("flow.mixture[" + std::to_string(k) + "].weight: must lie in [0, 1]");
        }
        if (!(c.intensity.window() == rho.window())) {
          out.push_back("flow.mixture[" + std::to_string(k) + "].intensity: window differs from rho");
        }
        total += c.weight;
      }
      if (std::abs(total - 1.0) > 1e-9) out.push_back("flow.mixture: weights must sum to 1");
      break;
    }
  }
  return out;
}

void FlowSpec::validate() const {
  const auto v = violations();
  if (v.empty()) return;
  std::ostringstream msg;
  msg << "invalid FlowSpec:";
  for (const auto& s : v) msg << "\n  " << s;
  throw ParameterError(msg.str());
}

void FlowSpec::check_time(double t) const {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw ParameterError("time must be finite and nonnegative");
  }
  if (bounded_horizon() && t > kMaxBoundedTime) {
    std::ostringstream msg;
    msg << "time " << t << " outside [0, 1 - 1e-6] for " << to_string(variant);
    throw ParameterError(msg.str());
  }
}

double gamma_param(double z, double q) {
  if (!(z > 0.0 && z < 1.0)) throw ParameterError("gamma_param: z must lie in (0, 1)");
  require_prob(q, "gamma_param: q", false);
  return z * q / (1.0 - z * (1.0 - q));
}

double gamma_param_difference(double z, double q) {
  if (!(z > 0.0) || !std::isfinite(z)) throw ParameterError("gamma_param_difference: z must be positive");
  require_prob(q, "gamma_param_difference: q", false);
  return z * q / (1.0 + z * (1.0 - q));
}

PointConfig forward_increment(const FlowSpec& spec, double s, double t, const PointConfig& state,
                              RngStream& rng) {
  require_order(spec, s, t, "forward_increment");
  const auto& w = spec.rho.window();
  if (s == t) return PointConfig(w);
  switch (spec.variant) {
    case FlowVariant::polya_sum:
      return sample_polya_sum((t - s) / (1.0 - s), spec.rho, state, rng);
    case FlowVariant::poisson:
      return sample_poisson_process(spec.rho.scaled(t - s), rng);
    case FlowVariant::polya_difference: {
      const auto base = spec.difference_base();
      if (!config_leq(state, base)) {
        throw DomainError("forward_increment: polya_difference state exceeds rho");
      }
      return sample_polya_difference((t - s) / (1.0 + s), difference(base, state), rng);
    }
    case FlowVariant::cox_mixture: {
      const double p = (1.0 - t) / (1.0 - s);
      const double q = 1.0 - t;
      return sample_split_increment(spec, split_posterior(spec, p, q, state), p, q, rng);
    }
  }
  throw ParameterError("forward_increment: unknown variant");
}

double backward_thin_ratio(FlowVariant variant, double s, double t) {
  if (!(s >= 0.0) || s > t) throw ParameterError("backward_thin: need 0 <= s <= t");
  if (s == t) return 1.0;
  switch (variant) {
    case FlowVariant::polya_sum: return s * (1.0 - t) / (t * (1.0 - s));
    case FlowVariant::cox_mixture: return (1.0 - t) / (1.0 - s);
    case FlowVariant::poisson: return s / t;
    case FlowVariant::polya_difference: return s * (1.0 + t) / (t * (1.0 + s));
  }
  throw ParameterError("backward_thin: unknown variant");
}

PointConfig backward_thin(const FlowSpec& spec, double s, double t, const PointConfig& state_t,
                          RngStream& rng) {
  require_order(spec, s, t, "backward_thin");
  return thin(state_t, backward_thin_ratio(spec.variant, s, t), rng);
}

CoxPosterior split_posterior(const FlowSpec& spec, double p, double q, const PointConfig& observed) {
  if (spec.variant != FlowVariant::cox_mixture) {
    throw DomainError("split_posterior: only defined for cox_mixture");
  }
  if (!(p > 0.0 && p <= 1.0)) throw ParameterError("split_posterior: p must lie in (0, 1]");
  if (!(q > 0.0 && q <= 1.0)) throw ParameterError("split_posterior: q must lie in (0, 1]");
  const double exposure = p / q;
  const auto counts = cell_counts(observed);

  CoxPosterior post{.observed = observed,
                    .family = CoxPosterior::Family::mixture,
                    .weights = {},
                    .gamma_shape = {},
                    .gamma_rate = 1.0};
  if (spec.gamma_directed()) {
    post.family = CoxPosterior::Family::gamma;
    post.gamma_rate = 1.0 + exposure;
    post.gamma_shape.resize(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
      post.gamma_shape[i] = spec.rho.mass(i) + static_cast<double>(counts[i]);
    }
    return post;
  }

  post.family = CoxPosterior::Family::mixture;
  const double neg_inf = -std::numeric_limits<double>::infinity();
  std::vector<double> log_w(spec.mixture.size(), neg_inf);
  for (std::size_t k = 0; k < spec.mixture.size(); ++k) {
    const auto& c = spec.mixture[k];
    if (c.weight == 0.0) continue;
    double lw = std::log(c.weight);
    for (std::size_t i = 0; i < counts.size() && lw > neg_inf; ++i) {
      const double mean = exposure * c.intensity.mass(i);
      if (mean == 0.0) {
        if (counts[i] > 0) lw = neg_inf;
      } else {
        lw += static_cast<double>(counts[i]) * std::log(mean) - mean;
      }
    }
    log_w[k] = lw;
  }
  const double top = *std::max_element(log_w.begin(), log_w.end());
  if (top == neg_inf) throw DomainError("split_posterior: observation impossible under every component");
  double norm = 0.0;
  post.weights.resize(log_w.size());
  for (std::size_t k = 0; k < log_w.size(); ++k) {
    post.weights[k] = log_w[k] == neg_inf ? 0.0 : std::exp(log_w[k] - top);
    norm += post.weights[k];
  }
  for (double& wk : post.weights) wk /= norm;
  return post;
}

PointConfig sample_split_increment(const FlowSpec& spec, const CoxPosterior& posterior, double p,
                                   double q, RngStream& rng) {
  const double scale = (1.0 - p) / q;
  if (scale == 0.0) return PointConfig(spec.rho.window());
  if (posterior.family == CoxPosterior::Family::gamma) {
    // Cox over (scale/rate) x Gamma(rho + observed) is Polya sum with z = scale/(rate + scale).
    const double z = scale / (posterior.gamma_rate + scale);
    return sample_polya_sum(z, spec.rho, posterior.observed, rng);
  }
  const auto k = pick_component(posterior.weights, rng);
  return sample_poisson_process(spec.mixture[k].intensity.scaled(scale), rng);
}

PointConfig sample_condensation(const FlowSpec& spec, double q, RngStream& rng) {
  if (spec.variant != FlowVariant::cox_mixture) {
    throw DomainError("sample_condensation: only defined for cox_mixture");
  }
  if (!(q > 0.0 && q <= 1.0)) throw ParameterError("sample_condensation: q must lie in (0, 1]");
  if (spec.gamma_directed()) {
    return sample_polya_sum(1.0 / (1.0 + q), spec.rho, PointConfig(spec.rho.window()), rng);
  }
  std::vector<double> weights;
  for (const auto& c : spec.mixture) weights.push_back(c.weight);
  const auto k = pick_component(weights, rng);
  return sample_poisson_process(spec.mixture[k].intensity.scaled(1.0 / q), rng);
}

}  // namespace polyaflow
