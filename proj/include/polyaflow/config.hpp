#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "polyaflow/kernels.hpp"

namespace polyaflow {

/// Experiment description read from a JSON file:
///
///   {
///     "flow": {"variant": "polya_sum", "lo": 0, "hi": 1, "masses": [2.0],
///              "z": 1.0, "mixture": [{"weight": 0.5, "masses": [1.0]}, ...]},
///     "grid": [0.25, 0.5, 0.75],
///     "replicas": 100000,
///     "seed": 20240601,
///     "suites": ["polya-marginals"],
///     "output_dir": "out",
///     "threads": 0,
///     "path_samples": 100
///   }
///
/// Every key is optional except "flow". A missing "replicas" keeps each
/// suite's default; "threads": 0 means available parallelism.
struct ExperimentConfig {
  std::optional<FlowSpec> flow;
  std::vector<double> grid{0.25, 0.5, 0.75};
  std::optional<std::size_t> replicas;
  std::uint64_t seed = 20240601;
  std::vector<std::string> suites;
  std::string output_dir = "polyaflow-out";
  std::size_t threads = 0;
  /// Paths of the configured flow written to paths.jsonl.
  std::size_t path_samples = 100;
};

struct ConfigParse {
  ExperimentConfig config;
  /// Every violated constraint; the config is usable only when empty.
  std::vector<std::string> violations;
};

ConfigParse parse_config(const nlohmann::json& j);
ConfigParse parse_config_text(const std::string& text);
/// Checks that need the assembled config (grid against variant, bounds).
std::vector<std::string> validate_config(const ExperimentConfig& c);

FlowSpec flow_spec_from_json(const nlohmann::json& j, std::vector<std::string>& violations);
nlohmann::json to_json(const FlowSpec& spec);

/// Seed precedence: explicit flag, then the POLYAFLOW_SEED environment
/// value, then the config. Throws ParameterError on a malformed env value.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const char* env_value, std::uint64_t config_seed);

}  // namespace polyaflow
