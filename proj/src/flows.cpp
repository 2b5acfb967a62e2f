#include "polyaflow/flows.hpp"

#include <sstream>

#include "polyaflow/errors.hpp"
#include "polyaflow/samplers.hpp"

namespace polyaflow {

void check_grid(const FlowSpec& spec, const std::vector<double>& grid) {
  for (std::size_t k = 0; k < grid.size(); ++k) {
    spec.check_time(grid[k]);
    if (k > 0 && !(grid[k - 1] < grid[k])) {
      std::ostringstream msg;
      msg << "grid must be strictly increasing (index " << k << ")";
      throw ParameterError(msg.str());
    }
  }
}

Path simulate_path(const FlowSpec& spec, const std::vector<double>& grid, RngStream& rng) {
  spec.validate();
  check_grid(spec, grid);
  Path path{spec.variant, grid, {}};
  path.states.reserve(grid.size());
  if (grid.empty()) return path;

  const auto& w = spec.rho.window();
  PointConfig state(w);
  double prev = 0.0;
  std::size_t first = 0;
  if (spec.variant == FlowVariant::cox_mixture) {
    state = sample_condensation(spec, 1.0 - grid[0], rng);
    path.states.push_back(state);
    prev = grid[0];
    first = 1;
  }
  for (std::size_t k = first; k < grid.size(); ++k) {
    state = superpose(state, forward_increment(spec, prev, grid[k], state, rng));
    path.states.push_back(state);
    prev = grid[k];
  }
  return path;
}

Path backward_resample(const FlowSpec& spec, const Path& path, std::size_t pivot, RngStream& rng) {
  if (pivot >= path.states.size()) throw ParameterError("backward_resample: pivot index out of range");
  Path out = path;
  for (std::size_t k = pivot; k-- > 0;) {
    out.states[k] = backward_thin(spec, out.grid[k], out.grid[k + 1], out.states[k + 1], rng);
  }
  return out;
}

CellMeasure exit_limit(const Path& path) {
  if (path.states.empty()) throw ParameterError("exit_limit: empty path");
  const auto& last = path.states.back();
  const double t = path.grid.back();
  double scale = 1.0;
  switch (path.variant) {
    case FlowVariant::polya_sum:
    case FlowVariant::cox_mixture: scale = 1.0 - t; break;
    case FlowVariant::poisson:
      if (!(t > 0.0)) throw ParameterError("exit_limit: poisson path needs a positive terminal time");
      scale = 1.0 / t;
      break;
    case FlowVariant::polya_difference: scale = 1.0; break;
  }
  const auto counts = cell_counts(last);
  std::vector<double> masses(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) masses[i] = scale * static_cast<double>(counts[i]);
  return CellMeasure(last.window(), std::move(masses));
}

Path sample_extremal_flow(const CellMeasure& nu, const std::vector<double>& grid, RngStream& rng,
                          FlowVariant clock) {
  if (clock != FlowVariant::polya_sum && clock != FlowVariant::cox_mixture) {
    throw ParameterError("sample_extremal_flow: clock must be polya_sum or cox_mixture");
  }
  const FlowSpec spec{clock, nu, 1.0, {}};
  check_grid(spec, grid);
  Path path{clock, grid, std::vector<PointConfig>(grid.size(), PointConfig(nu.window()))};
  if (grid.empty()) return path;
  const double t = grid.back();
  const double scale = clock == FlowVariant::polya_sum ? t / (1.0 - t) : 1.0 / (1.0 - t);
  path.states.back() = sample_poisson_process(nu.scaled(scale), rng);
  for (std::size_t k = grid.size() - 1; k-- > 0;) {
    path.states[k] = backward_thin(spec, grid[k], grid[k + 1], path.states[k + 1], rng);
  }
  return path;
}

std::size_t count_monotonicity_violations(const Path& path) {
  std::size_t bad = 0;
  for (std::size_t k = 1; k < path.states.size(); ++k) {
    if (!config_leq(path.states[k - 1], path.states[k])) ++bad;
  }
  return bad;
}

nlohmann::json path_to_json(const Path& path) {
  nlohmann::json states = nlohmann::json::array();
  for (const auto& s : path.states) states.push_back(s);
  return nlohmann::json{{"variant", to_string(path.variant)}, {"grid", path.grid}, {"states", std::move(states)}};
}

}  // namespace polyaflow
