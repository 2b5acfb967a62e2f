#pragma once

#include <optional>
#include <string>
#include <vector>

#include "polyaflow/measures.hpp"
#include "polyaflow/rng.hpp"

namespace polyaflow {

// Clocks. polya_sum runs on [0, 1) with Y_t ~ Poy(t, rho) and Y_0 = 0.
// cox_mixture runs on [0, 1) in the condensation clock Y_t ~ P_{1-t}, where
// P_q is the q-condensation of the Cox process (Y_0 ~ the Cox process itself).
// poisson (Y_t ~ Poi(t rho)) and polya_difference (Y_t ~ GP(t, rho)) run on [0, inf).
enum class FlowVariant { polya_sum, poisson, polya_difference, cox_mixture };

std::string to_string(FlowVariant v);
FlowVariant flow_variant_from_string(const std::string& name);

/// Largest time accepted by the [0, 1) variants.
inline constexpr double kMaxBoundedTime = 1.0 - 1e-6;

struct MixtureComponent {
  double weight;
  CellMeasure intensity;
};

struct FlowSpec {
  FlowVariant variant = FlowVariant::polya_sum;
  CellMeasure rho;
  /// Parameter of the reference law GP(z, rho) for polya_difference; unused otherwise.
  double z = 1.0;
  /// cox_mixture directing law: a finite mixture of deterministic intensities.
  /// Empty means the Gamma random measure with shape rho (the conjugate case).
  std::vector<MixtureComponent> mixture;

  /// Every violated constraint, in a stable order. Empty when valid.
  std::vector<std::string> violations() const;
  /// Throws ParameterError listing the violations.
  void validate() const;

  bool bounded_horizon() const {
    return variant == FlowVariant::polya_sum || variant == FlowVariant::cox_mixture;
  }
  bool gamma_directed() const { return variant == FlowVariant::cox_mixture && mixture.empty(); }
  /// rho read as a configuration (polya_difference). See lattice_config.
  PointConfig difference_base() const { return lattice_config(rho); }
  /// Throws ParameterError if t is outside the variant's time domain.
  void check_time(double t) const;
};

/// Conditional law of the directing environment given an observed thinning.
struct CoxPosterior {
  enum class Family { mixture, gamma };
  /// The observed configuration. Its atoms carry their own Gamma mass in the
  /// atomic directing measure, so increments reinforce them.
  PointConfig observed;
  Family family = Family::mixture;
  /// Posterior component weights (mixture family).
  std::vector<double> weights;
  /// Per-cell posterior Gamma shapes rho_i + n_i (gamma family).
  std::vector<double> gamma_shape;
  double gamma_rate = 1.0;
};

/// Parameter of the thinned Polya sum process: Gamma_q(Poy(z)) = Poy(gamma(z, q)).
double gamma_param(double z, double q);
/// Gamma_q(GP(z)) = GP(zq / (1 + z(1 - q))).
double gamma_param_difference(double z, double q);

/// Increment Y_t - Y_s of the forward (condensation) dynamics given Y_s = state.
PointConfig forward_increment(const FlowSpec& spec, double s, double t, const PointConfig& state,
                              RngStream& rng);

/// Retention probability of the backward kernel from time t to time s <= t.
double backward_thin_ratio(FlowVariant variant, double s, double t);
/// Draw of Y_s given Y_t = state_t.
PointConfig backward_thin(const FlowSpec& spec, double s, double t, const PointConfig& state_t,
                          RngStream& rng);

/// Splitting kernel in closed form for cox_mixture. `observed` is the
/// p-thinning of a P_q draw (so its law is P_{q/p}); the result is the law of
/// the directing environment given it.
CoxPosterior split_posterior(const FlowSpec& spec, double p, double q, const PointConfig& observed);

/// Draw of the deleted part: a Cox process with intensity (1 - p)/q times the
/// posterior environment.
PointConfig sample_split_increment(const FlowSpec& spec, const CoxPosterior& posterior, double p,
                                   double q, RngStream& rng);

/// Draw from P_q, the q-condensation of the cox_mixture Cox process (q in (0, 1]).
PointConfig sample_condensation(const FlowSpec& spec, double q, RngStream& rng);

}  // namespace polyaflow
