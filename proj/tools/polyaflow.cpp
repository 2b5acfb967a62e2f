// Command-line runner: verification suites, path simulation and exit-limit sweeps.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "polyaflow/config.hpp"
#include "polyaflow/errors.hpp"
#include "polyaflow/flows.hpp"
#include "polyaflow/parallel.hpp"
#include "polyaflow/stats.hpp"
#include "polyaflow/suites.hpp"

namespace fs = std::filesystem;
using namespace polyaflow;

namespace {

constexpr int kExitFailed = 1;
constexpr int kExitInvalid = 2;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<long long> replicas;
  std::string out;
  std::optional<std::size_t> threads;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool config_required) {
  auto* opt = cmd->add_option("--config", f.config, "experiment config (JSON)");
  if (config_required) opt->required();
  cmd->add_option("--seed", f.seed, "base seed (overrides POLYAFLOW_SEED and the config)");
  cmd->add_option("--replicas", f.replicas, "replica count (overrides the config)");
  cmd->add_option("--out", f.out, "output location (overrides the config)");
  cmd->add_option("--threads", f.threads, "worker threads (0 = available parallelism)");
}

int report_invalid(const std::vector<std::string>& violations) {
  std::cerr << "invalid configuration:\n";
  for (const auto& v : violations) std::cerr << "  " << v << "\n";
  return kExitInvalid;
}

/// Loads the config (if any) and applies flag overrides. Returns nullopt after
/// printing every violation.
std::optional<ExperimentConfig> load(const CommonFlags& f) {
  ConfigParse parsed;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) {
      std::cerr << "invalid configuration:\n  config: cannot read '" << f.config << "'\n";
      return std::nullopt;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    parsed = parse_config_text(buf.str());
  }
  auto& c = parsed.config;
  auto& out = parsed.violations;
  if (f.replicas) {
    if (*f.replicas < 1) {
      out.push_back("replicas: must be >= 1 (got " + std::to_string(*f.replicas) + ")");
    } else {
      c.replicas = static_cast<std::size_t>(*f.replicas);
    }
  }
  if (!f.out.empty()) c.output_dir = f.out;
  if (f.threads) c.threads = *f.threads;
  try {
    c.seed = resolve_seed(f.seed, std::getenv("POLYAFLOW_SEED"), c.seed);
  } catch (const ParameterError& e) {
    out.push_back(e.what());
  }
  if (!out.empty()) {
    report_invalid(out);
    return std::nullopt;
  }
  if (c.threads == 0) c.threads = default_threads();
  return c;
}

std::vector<Path> simulate_paths(const ExperimentConfig& c, std::size_t count) {
  const auto seed = suite_seed(c.seed, "paths");
  return parallel_map(count, c.threads, [&](std::size_t j) {
    RngStream rng(seed, j);
    return simulate_path(*c.flow, c.grid, rng);
  });
}

int cmd_run(const CommonFlags& f) {
  const auto c = load(f);
  if (!c) return kExitInvalid;
  std::vector<std::string> names = c->suites;
  if (names.empty()) {
    for (const auto& s : suite_registry()) names.push_back(s.name);
  }
  fs::create_directories(c->output_dir);
  const fs::path dir(c->output_dir);

  SuiteContext ctx{c->seed, c->replicas, c->threads};
  nlohmann::json reports = nlohmann::json::array();
  std::ofstream csv(dir / "summary.csv");
  csv << csv_header() << "\n";
  bool all_passed = true;
  for (const auto& name : names) {
    const auto res = run_suite(name, ctx);
    for (const auto& r : res.reports) {
      reports.push_back(to_json(r));
      csv << to_csv_row(r) << "\n";
      std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << "\n";
    }
    all_passed = all_passed && res.passed();
    std::cerr << name << ": " << res.reports.size() << " reports, " << res.path_steps << " path steps, "
              << res.seconds << " s\n";
  }
  std::ofstream(dir / "reports.json") << reports.dump(2) << "\n";

  std::ofstream paths(dir / "paths.jsonl");
  if (c->flow) {
    for (const auto& p : simulate_paths(*c, c->path_samples)) paths << path_to_json(p).dump() << "\n";
  }
  return all_passed ? 0 : kExitFailed;
}

int cmd_list(bool verbose) {
  for (const auto& s : suite_registry()) {
    std::cout << s.name << "\n  " << s.description << "\n  verifies: " << s.anchor << "\n";
    if (verbose) std::cout << "  defaults: " << s.defaults.dump() << "\n";
  }
  if (verbose) {
    std::cout << "\nrun defaults: seed " << ExperimentConfig{}.seed << ", family-wise alpha " << kSuiteAlpha
              << " (Bonferroni per suite), replicas " << kDefaultReplicas << ", threads 0 (available), path_samples "
              << ExperimentConfig{}.path_samples << ", grid [0.25, 0.5, 0.75]\n";
  }
  return 0;
}

int cmd_simulate(const CommonFlags& f) {
  const auto c = load(f);
  if (!c) return kExitInvalid;
  const std::size_t count = c->replicas.value_or(c->path_samples);
  std::ofstream file;
  if (!f.out.empty()) file.open(f.out);
  std::ostream& out = f.out.empty() ? std::cout : file;
  for (const auto& p : simulate_paths(*c, count)) out << path_to_json(p).dump() << "\n";
  return 0;
}

int cmd_exit_limit(const CommonFlags& f, double rho, std::vector<double> times) {
  auto flags = f;
  flags.out.clear();
  const auto c = load(flags);
  if (!c) return kExitInvalid;
  FlowSpec spec{FlowVariant::polya_sum, CellMeasure(Window(0.0, 1.0, 1), {rho}), 1.0, {}};
  if (c->flow) {
    if (!(c->flow->variant == FlowVariant::polya_sum || c->flow->gamma_directed())) {
      return report_invalid({"flow.variant: exit-limit needs polya_sum or a Gamma-directed cox_mixture"});
    }
    spec = FlowSpec{c->flow->variant, CellMeasure(Window(0.0, 1.0, 1), {c->flow->rho.total()}), 1.0, {}};
  }
  std::vector<std::string> bad;
  if (!(spec.rho.total() > 0.0)) bad.push_back("rho: must be positive");
  for (double t : times) {
    if (!(t > 0.0 && t <= kMaxBoundedTime)) bad.push_back("t: " + std::to_string(t) + " outside (0, 1 - 1e-6]");
  }
  if (!bad.empty()) return report_invalid(bad);
  std::sort(times.begin(), times.end());
  const std::size_t n = c->replicas.value_or(kDefaultReplicas);
  const double shape = spec.rho.total();

  std::ofstream file;
  if (!f.out.empty()) file.open(f.out);
  std::ostream& out = f.out.empty() ? std::cout : file;
  out << "t,ks_distance,ks_p_value,replicas\n";
  const auto seed = suite_seed(c->seed, "exit-limit-sweep");
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k];
    const auto values = parallel_map(n, c->threads, [&](std::size_t j) {
      RngStream rng(seed + k, j);
      return exit_limit(simulate_path(spec, {t}, rng)).mass(0);
    });
    const double d = ks_distance(values, [shape](double x) { return gamma_cdf(shape, x); });
    char line[128];
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%zu\n", t, d, kolmogorov_sf(d, n), n);
    out << line;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polya sum flows: simulation and verification suites"};
  app.require_subcommand(1);

  CommonFlags run_flags, sim_flags, exit_flags;
  auto* run = app.add_subcommand("run", "run verification suites; writes reports.json, summary.csv, paths.jsonl");
  add_common(run, run_flags, true);

  bool verbose = false;
  auto* list = app.add_subcommand("list-suites", "list registered suites");
  list->add_flag("--verbose", verbose, "show every default");

  auto* sim = app.add_subcommand("simulate", "write sample paths of the configured flow as JSON lines");
  add_common(sim, sim_flags, true);

  double rho = 2.0;
  std::vector<double> times{0.9, 0.99, 0.999, 0.9999};
  auto* exit = app.add_subcommand("exit-limit", "KS distance of (1-t) Y_t(B) to Gamma(rho(B), 1) as t -> 1 (CSV)");
  add_common(exit, exit_flags, false);
  exit->add_option("--rho", rho, "rho(B) of the one-cell flow (ignored with --config)");
  exit->add_option("--t", times, "times of the sweep");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }
  try {
    if (*run) return cmd_run(run_flags);
    if (*list) return cmd_list(verbose);
    if (*sim) return cmd_simulate(sim_flags);
    if (*exit) return cmd_exit_limit(exit_flags, rho, times);
  } catch (const ParameterError& e) {
    return report_invalid({e.what()});
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailed;
  }
  return 0;
}
