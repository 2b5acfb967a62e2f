#pragma once

#include <cstddef>
#include <vector>

#include <json.hpp>

#include "polyaflow/kernels.hpp"
#include "polyaflow/measures.hpp"
#include "polyaflow/rng.hpp"

namespace polyaflow {

/// A realization of the flow on a finite time grid.
struct Path {
  FlowVariant variant = FlowVariant::polya_sum;
  std::vector<double> grid;
  std::vector<PointConfig> states;
};

/// Throws ParameterError unless grid is strictly increasing inside the variant's horizon.
void check_grid(const FlowSpec& spec, const std::vector<double>& grid);

/// Forward simulation by superposing forward increments. polya_sum, poisson
/// and polya_difference start from the empty configuration at time 0;
/// cox_mixture starts from a draw of P_{1 - grid[0]}.
Path simulate_path(const FlowSpec& spec, const std::vector<double>& grid, RngStream& rng);

/// Keeps states[pivot..] and redraws the earlier states from the backward kernel,
/// latest to earliest.
Path backward_resample(const FlowSpec& spec, const Path& path, std::size_t pivot, RngStream& rng);

/// Scaled terminal state: (1 - t) Y_t on [0, 1), Y_T / T for poisson, raw Y_T for polya_difference.
CellMeasure exit_limit(const Path& path);

/// The extremal flow conditioned on exit value nu. Terminal state is Poisson
/// with intensity nu scaled by t/(1-t) (polya_sum clock) or 1/(1-t)
/// (cox_mixture clock); earlier states come from backward thinning.
Path sample_extremal_flow(const CellMeasure& nu, const std::vector<double>& grid, RngStream& rng,
                          FlowVariant clock = FlowVariant::polya_sum);

/// Number of adjacent pairs violating states[k] <= states[k+1].
std::size_t count_monotonicity_violations(const Path& path);

nlohmann::json path_to_json(const Path& path);

}  // namespace polyaflow
