#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "polyaflow/verify.hpp"

namespace polyaflow {

/// Family-wise significance level of every suite. A suite with k
/// statistical reports uses the per-test threshold kSuiteAlpha / k.
inline constexpr double kSuiteAlpha = 0.01;
inline constexpr std::size_t kDefaultReplicas = 100000;

struct SuiteInfo {
  std::string name;
  std::string description;
  /// The statement the suite verifies, quoted in the result's own notation.
  std::string anchor;
  /// Every parameter the suite uses, with its default value.
  nlohmann::json defaults;
};

struct SuiteContext {
  std::uint64_t seed = 20240601;
  /// Replicas for Monte Carlo checks; nullopt keeps each suite's default.
  std::optional<std::size_t> replicas;
  std::size_t threads = 1;
};

struct SuiteResult {
  std::string name;
  std::vector<TestReport> reports;
  /// Adjacent state pairs checked for config_leq across all simulated paths.
  std::size_t path_steps = 0;
  std::size_t monotonicity_violations = 0;
  double seconds = 0.0;

  bool passed() const;
};

const std::vector<SuiteInfo>& suite_registry();
const SuiteInfo* find_suite(const std::string& name);

/// Runs a registered suite. Exceptions raised by a check become a failed
/// report named "<suite>/error" carrying the message.
SuiteResult run_suite(const std::string& name, const SuiteContext& ctx);

/// Seed of a named suite derived from the base seed.
std::uint64_t suite_seed(std::uint64_t base, const std::string& name);

/// Sets the Bonferroni threshold on every statistical report and refreshes
/// `passed`.
void apply_bonferroni(std::vector<TestReport>& reports, double alpha = kSuiteAlpha);

}  // namespace polyaflow
