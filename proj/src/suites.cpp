#include "polyaflow/suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>

#include "polyaflow/discrete.hpp"
#include "polyaflow/errors.hpp"
#include "polyaflow/flows.hpp"
#include "polyaflow/kernels.hpp"
#include "polyaflow/parallel.hpp"
#include "polyaflow/quadrature.hpp"
#include "polyaflow/samplers.hpp"
#include "polyaflow/stats.hpp"

namespace polyaflow {

namespace {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

std::string full(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

const Window kOneCell(0.0, 1.0, 1);
const Window kTwoCells(0.0, 2.0, 2);

CellMeasure one_cell(double m) { return CellMeasure(kOneCell, {m}); }
CellMeasure two_cells(double a, double b) { return CellMeasure(kTwoCells, {a, b}); }

CountFunction nb_joint(std::vector<double> shapes, double z) {
  return [shapes = std::move(shapes), z](const CountVector& n) {
    double p = 1.0;
    for (std::size_t i = 0; i < n.size(); ++i) p *= nb_pmf(shapes[i], z, n[i]);
    return p;
  };
}

CountFunction poisson_joint(std::vector<double> means) {
  return [means = std::move(means)](const CountVector& n) {
    double p = 1.0;
    for (std::size_t i = 0; i < n.size(); ++i) p *= poisson_pmf(means[i], n[i]);
    return p;
  };
}

CountFunction binomial_joint(CountVector trials, double p) {
  return [trials = std::move(trials), p](const CountVector& n) {
    double out = 1.0;
    for (std::size_t i = 0; i < n.size(); ++i) out *= binomial_pmf(trials[i], p, n[i]);
    return out;
  };
}

std::vector<double> masses_of(const CellMeasure& m) { return {m.masses().begin(), m.masses().end()}; }

/// Exact joint pmf of P_q for a cox_mixture spec.
CountFunction condensation_pmf(const FlowSpec& spec, double q) {
  if (spec.gamma_directed()) return nb_joint(masses_of(spec.rho), 1.0 / (1.0 + q));
  std::vector<std::pair<double, CountFunction>> parts;
  for (const auto& c : spec.mixture) parts.emplace_back(c.weight, poisson_joint(masses_of(c.intensity.scaled(1.0 / q))));
  return [parts = std::move(parts)](const CountVector& n) {
    double p = 0.0;
    for (const auto& [w, f] : parts) p += w * f(n);
    return p;
  };
}

/// Count projections of one simulated path plus its monotonicity tally.
struct PathCounts {
  std::vector<CountVector> counts;
  std::size_t steps = 0;
  std::size_t violations = 0;
};

PathCounts observe(const Path& path) {
  PathCounts out;
  for (const auto& s : path.states) out.counts.push_back(cell_counts(s));
  out.steps = path.states.empty() ? 0 : path.states.size() - 1;
  out.violations = count_monotonicity_violations(path);
  return out;
}

CountVector minus(const CountVector& b, const CountVector& a) {
  CountVector d(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) d[i] = b[i] - a[i];
  return d;
}

CountVector concat(const CountVector& a, const CountVector& b) {
  CountVector c = a;
  c.insert(c.end(), b.begin(), b.end());
  return c;
}

class Runner {
 public:
  Runner(const SuiteContext& ctx, const std::string& name)
      : ctx_(ctx), base_seed_(suite_seed(ctx.seed, name)) {
    result.name = name;
  }

  std::size_t n() const { return ctx_.replicas.value_or(kDefaultReplicas); }
  /// Reduced replica count for checks specified at a tenth of the main budget.
  std::size_t n_small() const { return std::max<std::size_t>(kMinChiSquareSamples, n() / 10); }
  std::size_t threads() const { return ctx_.threads; }

  /// A fresh seed for the next independent check of this suite.
  std::uint64_t next_seed() { return splitmix64(base_seed_ + ++checks_); }

  template <typename Fn>
  auto map(std::uint64_t seed, std::size_t count, Fn fn) {
    return parallel_map(count, ctx_.threads, [&](std::size_t j) {
      RngStream rng(seed, j);
      return fn(rng);
    });
  }

  /// Simulates `count` paths and keeps their count projections.
  std::vector<PathCounts> paths(std::uint64_t seed, std::size_t count, const std::function<Path(RngStream&)>& sim) {
    auto out = map(seed, count, [&](RngStream& rng) { return observe(sim(rng)); });
    for (const auto& p : out) {
      result.path_steps += p.steps;
      result.monotonicity_violations += p.violations;
    }
    return out;
  }

  void add(TestReport r) {
    r.name = result.name + "/" + r.name;
    result.reports.push_back(std::move(r));
  }

  SuiteResult result;

 private:
  const SuiteContext& ctx_;
  std::uint64_t base_seed_;
  std::uint64_t checks_ = 0;
};

std::vector<CountVector> column(const std::vector<PathCounts>& paths, std::size_t k) {
  std::vector<CountVector> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(p.counts.at(k));
  return out;
}

TestReport numeric_within_se(std::string name, double estimate, double se, double exact, std::size_t n,
                             std::uint64_t seed) {
  const double err = std::abs(estimate - exact);
  auto r = TestReport::numeric(std::move(name), se > 0.0 ? err / se : 0.0, err, n, 3.0 * se, seed,
                               "estimate=" + full(estimate) + " se=" + full(se) + " exact=" + full(exact));
  if (se == 0.0) r.passed = err == 0.0;
  return r;
}

// ---------------------------------------------------------------------------

void sampling_lemma(Runner& run) {
  const auto rho = one_cell(2.0);
  for (auto [z, q] : {std::pair{0.6, 0.5}, std::pair{0.3, 0.8}}) {
    const auto seed = run.next_seed();
    const PolyaParams params{z, rho};
    const auto samples = run.map(seed, run.n(), [&](RngStream& rng) {
      return cell_counts(thin(sample_polya_sum(params, rng), q, rng));
    });
    const double g = gamma_param(z, q);
    auto r = chi_square_counts("z" + num(z) + "-q" + num(q), samples, nb_joint({2.0}, g), kSuiteAlpha, seed);
    r.detail += " gamma=" + full(g);
    run.add(std::move(r));
  }
}

void condensation_lemma(Runner& run) {
  const double gamma = 0.2;
  const double z = 0.6;
  const auto rho = two_cells(1.0, 2.0);
  const auto seed = run.next_seed();
  const auto samples = run.map(seed, run.n(), [&](RngStream& rng) {
    const auto nu = sample_polya_sum(PolyaParams{gamma, rho}, rng);
    const auto inc = sample_polya_sum((z - gamma) / (1.0 - gamma), rho, nu, rng);
    return cell_counts(superpose(nu, inc));
  });
  run.add(chi_square_counts("gamma0.2-z0.6", samples, nb_joint({1.0, 2.0}, z), kSuiteAlpha, seed));
}

void polya_marginals(Runner& run) {
  const FlowSpec spec{FlowVariant::polya_sum, two_cells(1.0, 2.0), 1.0, {}};
  const std::vector<double> grid{0.25, 0.5, 0.75};
  const auto seed = run.next_seed();
  const auto paths = run.paths(seed, run.n(), [&](RngStream& rng) { return simulate_path(spec, grid, rng); });
  for (std::size_t k = 0; k < grid.size(); ++k) {
    run.add(chi_square_counts("t" + num(grid[k]), column(paths, k), nb_joint({1.0, 2.0}, grid[k]),
                              kSuiteAlpha, seed));
  }
}

void backward_consistency(Runner& run) {
  const FlowSpec spec{FlowVariant::polya_sum, one_cell(2.0), 1.0, {}};
  {
    const std::vector<double> grid{0.25, 0.5};
    const auto seed = run.next_seed();
    const auto resampled = run.paths(seed, run.n(), [&](RngStream& rng) {
      const auto path = simulate_path(spec, grid, rng);
      return backward_resample(spec, path, 1, rng);
    });
    const auto direct_seed = run.next_seed();
    const auto direct =
        run.paths(direct_seed, run.n(), [&](RngStream& rng) { return simulate_path(spec, {0.25}, rng); });
    run.add(chi_square_counts("resample-t0.25", column(resampled, 0), column(direct, 0), kSuiteAlpha, seed));
  }
  for (auto [s, t] : {std::pair{0.25, 0.5}, std::pair{0.5, 0.9}}) {
    const auto seed = run.next_seed();
    const auto thinned = run.map(seed, run.n(), [&](RngStream& rng) {
      const auto yt = simulate_path(spec, {t}, rng).states.back();
      return cell_counts(backward_thin(spec, s, t, yt, rng));
    });
    const auto direct_seed = run.next_seed();
    const auto direct =
        run.paths(direct_seed, run.n(), [&](RngStream& rng) { return simulate_path(spec, {s}, rng); });
    run.add(chi_square_counts("thin-s" + num(s) + "-t" + num(t), thinned, column(direct, 0), kSuiteAlpha,
                              seed));
  }
}

void exit_limit_suite(Runner& run) {
  const std::vector<double> grid{0.9, 0.99, 0.999};
  for (double rho : {1.0, 2.0}) {
    const FlowSpec spec{FlowVariant::polya_sum, one_cell(rho), 1.0, {}};
    const auto seed = run.next_seed();
    const auto values = run.map(seed, run.n(), [&](RngStream& rng) {
      const auto path = simulate_path(spec, grid, rng);
      return std::pair{exit_limit(path).mass(0), observe(path)};
    });
    std::vector<double> sample;
    for (const auto& [v, p] : values) {
      sample.push_back(v);
      run.result.path_steps += p.steps;
      run.result.monotonicity_violations += p.violations;
    }
    const double d = ks_distance(sample, [rho](double x) { return gamma_cdf(rho, x); });
    run.add(TestReport::numeric("rho" + num(rho) + "-t0.999", d, d, sample.size(), 0.02, seed,
                                "ks_p_value=" + full(kolmogorov_sf(d, sample.size()))));
  }
}

void mixture_representation(Runner& run) {
  const auto rho = one_cell(2.0);
  const FlowSpec spec{FlowVariant::polya_sum, rho, 1.0, {}};
  const std::vector<double> grid{0.4, 0.8};
  const auto seed = run.next_seed();
  const auto direct = run.paths(seed, run.n(), [&](RngStream& rng) { return simulate_path(spec, grid, rng); });
  const auto mixed_seed = run.next_seed();
  const auto mixed = run.paths(mixed_seed, run.n(), [&](RngStream& rng) {
    const auto q = sample_gamma_measure(rho, rng);
    return sample_extremal_flow(q, grid, rng);
  });
  auto increments = [](const std::vector<PathCounts>& paths) {
    std::vector<CountVector> out;
    for (const auto& p : paths) out.push_back(minus(p.counts[1], p.counts[0]));
    return out;
  };
  auto joint = [](const std::vector<PathCounts>& paths) {
    std::vector<CountVector> out;
    for (const auto& p : paths) out.push_back(concat(p.counts[0], p.counts[1]));
    return out;
  };
  run.add(chi_square_counts("marginal-t0.4", column(direct, 0), column(mixed, 0), kSuiteAlpha, seed));
  run.add(chi_square_counts("marginal-t0.8", column(direct, 1), column(mixed, 1), kSuiteAlpha, seed));
  run.add(chi_square_counts("increment", increments(direct), increments(mixed), kSuiteAlpha, seed));
  run.add(chi_square_counts("joint", joint(direct), joint(mixed), kSuiteAlpha, seed));
}

void duality_suite(Runner& run) {
  const double s = 0.3;
  const double t = 0.6;
  const CountFunction phi = [](const CountVector& n) { return n[0] <= 2 ? 1.0 : 0.0; };
  const CountFunction psi = [](const CountVector& n) { return n[0] == 1 ? 1.0 : 0.0; };

  const DiscreteModel polya(ModelClock::polya, {1.0}, 80, t);
  auto exact = duality_exact_check(polya, s, t, phi, psi);
  exact.name = "polya-exact";
  const double polya_value = duality_exact(polya, s, t, phi, psi).backward_side;
  run.add(std::move(exact));
  const FlowSpec polya_spec{FlowVariant::polya_sum, one_cell(1.0), 1.0, {}};
  auto mc = duality_check(polya_spec, s, t, phi, psi, run.n(), run.next_seed(), run.threads(), polya_value);
  mc.name = "polya-mc";
  run.add(std::move(mc));

  const DiscreteModel cond(ModelClock::condensation, {1.0}, 120, t);
  auto cexact = duality_exact_check(cond, s, t, phi, psi);
  cexact.name = "cox-gamma-exact";
  const double cond_value = duality_exact(cond, s, t, phi, psi).backward_side;
  run.add(std::move(cexact));
  const FlowSpec cox_spec{FlowVariant::cox_mixture, one_cell(1.0), 1.0, {}};
  auto cmc = duality_check(cox_spec, s, t, phi, psi, run.n(), run.next_seed(), run.threads(), cond_value);
  cmc.name = "cox-gamma-mc";
  run.add(std::move(cmc));
}

const char* clock_name(ModelClock c) {
  switch (c) {
    case ModelClock::polya: return "polya";
    case ModelClock::condensation: return "condensation";
    case ModelClock::poisson: return "poisson";
  }
  return "?";
}

void generator_suite(Runner& run) {
  const double s = 0.3;
  const CountVector nu{2};
  const std::vector<std::pair<std::string, CountFunction>> functions{
      {"count", [](const CountVector& n) { return static_cast<double>(n[0]); }},
      {"indicator-le2", [](const CountVector& n) { return n[0] <= 2 ? 1.0 : 0.0; }},
      {"exp-decay", [](const CountVector& n) { return std::exp(-0.5 * static_cast<double>(n[0])); }},
  };
  for (auto clock : {ModelClock::condensation, ModelClock::polya, ModelClock::poisson}) {
    const DiscreteModel model(clock, {1.5}, 120, s + 1e-3);
    for (const auto& [fname, phi] : functions) {
      const auto g = generator_apply(model, s, phi, nu);
      double err[2];
      double fd[2];
      const double hs[2] = {1e-3, 1e-4};
      for (int k = 0; k < 2; ++k) {
        fd[k] = (semigroup_apply(model, s, s + hs[k], phi)(nu) - phi(nu)) / hs[k];
        err[k] = std::abs(g.value - fd[k]) / std::abs(fd[k]);
      }
      std::ostringstream detail;
      detail << "generator=" << full(g.value) << " fd_h1e-3=" << full(fd[0]) << " fd_h1e-4=" << full(fd[1])
             << " rel_err_h1e-3=" << full(err[0]) << " literal_formula=" << full(g.verbatim)
             << " literal_over_fd=" << full(g.verbatim / fd[1]);
      auto r = TestReport::numeric(std::string(clock_name(clock)) + "-" + fname, err[0], err[1], model.box().size(),
                                   1e-2, 0, detail.str());
      // Cancellation in (T phi - phi)/h bounds the attainable relative error
      // from below; at that floor the difference quotient has converged.
      const double floor = 1e3 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(phi(nu))) /
                           (hs[1] * std::abs(fd[1]));
      r.detail += " rounding_floor_h1e-4=" + full(floor);
      r.passed = r.passed && (err[1] < err[0] || err[1] < floor);
      run.add(std::move(r));
    }
  }
}

void mecke_suite(Runner& run) {
  const double z = 0.5;
  const std::vector<std::pair<std::string, CellCountFunction>> hs{
      {"indicator-k2", [](std::size_t, const CountVector& mu) { return mu[0] == 2 ? 1.0 : 0.0; }},
      {"constant", [](std::size_t, const CountVector&) { return 1.0; }},
      {"reciprocal", [](std::size_t i, const CountVector& mu) { return 1.0 / (1.0 + static_cast<double>(mu[i])); }},
  };
  for (const auto& [hname, h] : hs) {
    auto r = mecke_exact_polya(z, {1.0}, h, 120);
    r.name = "polya-exact-" + hname;
    run.add(std::move(r));
  }
  const auto rho2 = two_cells(1.0, 2.0);
  for (const auto& [hname, h] : hs) {
    if (hname == "indicator-k2") continue;
    auto r = mecke_check_polya(z, rho2, h, run.n(), run.next_seed(), run.threads());
    r.name = "polya-mc-" + hname;
    run.add(std::move(r));
  }

  const CellMassFunction constant = [](std::size_t, std::span<const double>) { return 1.0; };
  const CellMassFunction decay = [](std::size_t i, std::span<const double> q) { return std::exp(-q[i]); };
  auto rc = mecke_check_gamma(rho2, constant, run.n(), 64, run.next_seed(), run.threads());
  rc.name = "gamma-mc-constant";
  run.add(std::move(rc));
  const auto decay_seed = run.next_seed();
  auto rd = mecke_check_gamma(rho2, decay, run.n(), 64, decay_seed, run.threads());
  rd.name = "gamma-mc-exp-decay";
  run.add(std::move(rd));

  // Closed form for h(i, Q) = exp(-Q_i): both sides equal sum_i rho_i 2^{-(rho_i + 1)}.
  double closed = 0.0;
  for (double r : rho2.masses()) closed += r * std::pow(2.0, -(r + 1.0));
  const GaussLaguerre gl(64);
  const auto sides = run.map(decay_seed, run.n(), [&](RngStream& rng) {
    const auto q = sample_gamma_measure(rho2, rng);
    double lhs = 0.0;
    double rhs = 0.0;
    for (std::size_t i = 0; i < q.masses().size(); ++i) {
      const double qi = q.mass(i);
      lhs += qi * std::exp(-qi);
      rhs += rho2.mass(i) * gl.integrate([qi](double r) { return std::exp(-(qi + r)); });
    }
    return std::pair{lhs, rhs};
  });
  std::vector<double> lhs, rhs;
  for (const auto& [a, b] : sides) {
    lhs.push_back(a);
    rhs.push_back(b);
  }
  const auto l = mean_and_se(lhs);
  const auto rr = mean_and_se(rhs);
  run.add(numeric_within_se("gamma-closed-form-lhs", l.mean, l.std_error, closed, run.n(), decay_seed));
  run.add(numeric_within_se("gamma-closed-form-rhs", rr.mean, rr.std_error, closed, run.n(), decay_seed));
}

void variant_limits(Runner& run) {
  {
    const FlowSpec spec{FlowVariant::poisson, one_cell(1.0), 1.0, {}};
    const std::vector<double> grid{10.0, 100.0, 1000.0};
    const auto seed = run.next_seed();
    const auto paths = run.paths(seed, run.n_small(), [&](RngStream& rng) { return simulate_path(spec, grid, rng); });
    std::size_t within = 0;
    for (const auto& p : paths) {
      if (std::abs(static_cast<double>(p.counts[2][0]) / 1000.0 - 1.0) < 0.15) ++within;
    }
    const double frac = static_cast<double>(within) / static_cast<double>(paths.size());
    auto r = TestReport::numeric("poisson-T1000-within-0.15", frac, 1.0 - frac, paths.size(), 0.01, seed,
                                 "fraction_within=" + full(frac) + " required>=0.99");
    r.passed = frac >= 0.99;
    run.add(std::move(r));
  }
  {
    const FlowSpec spec{FlowVariant::poisson, one_cell(1.0), 1.0, {}};
    const std::vector<double> grid{1.0, 2.0, 4.0};
    const auto seed = run.next_seed();
    const auto paths = run.paths(seed, run.n(), [&](RngStream& rng) { return simulate_path(spec, grid, rng); });
    for (std::size_t k = 0; k < grid.size(); ++k) {
      run.add(chi_square_counts("poisson-marginal-t" + num(grid[k]), column(paths, k), poisson_joint({grid[k]}),
                                kSuiteAlpha, seed));
    }
  }
  {
    const FlowSpec spec{FlowVariant::polya_difference, two_cells(2.0, 3.0), 1.0, {}};
    const auto base = cell_counts(spec.difference_base());
    const Count size = base[0] + base[1];
    const std::vector<double> grid{10.0, 100.0, 1000.0};
    const auto seed = run.next_seed();
    const auto paths = run.paths(seed, run.n_small(), [&](RngStream& rng) { return simulate_path(spec, grid, rng); });
    std::vector<double> freq;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      std::vector<CountVector> hit;
      for (const auto& p : paths) hit.push_back({p.counts[k] == base ? Count{1} : Count{0}});
      const double p_hit = std::pow(grid[k] / (1.0 + grid[k]), static_cast<double>(size));
      const CountFunction bernoulli = [p_hit](const CountVector& n) { return n[0] == 1 ? p_hit : 1.0 - p_hit; };
      double f = 0.0;
      for (const auto& h : hit) f += static_cast<double>(h[0]);
      freq.push_back(f / static_cast<double>(hit.size()));
      auto r = chi_square_counts("difference-terminal-T" + num(grid[k]), hit, bernoulli, kSuiteAlpha, seed);
      r.detail += " frequency=" + full(freq.back()) + " exact=" + full(p_hit);
      run.add(std::move(r));
    }
    std::size_t decreases = 0;
    std::string detail = "frequencies=";
    for (std::size_t k = 0; k < freq.size(); ++k) {
      detail += (k ? "/" : "") + full(freq[k]);
      if (k > 0 && freq[k] < freq[k - 1]) ++decreases;
    }
    run.add(TestReport::numeric("difference-frequency-monotone", freq.back(), static_cast<double>(decreases),
                                paths.size(), 0.5, seed, detail));
  }
}

FlowSpec cox_gamma_spec() { return FlowSpec{FlowVariant::cox_mixture, two_cells(1.0, 2.0), 1.0, {}}; }

FlowSpec cox_mixture_spec() {
  return FlowSpec{FlowVariant::cox_mixture,
                  two_cells(1.0, 2.0),
                  1.0,
                  {{0.4, two_cells(1.0, 4.0)}, {0.6, two_cells(3.0, 0.5)}}};
}

void cox_thinning(Runner& run) {
  const double q = 0.3;
  const double q_prime = 0.6;
  const double p = q / q_prime;
  for (const auto& [label, spec] : {std::pair{"gamma", cox_gamma_spec()}, std::pair{"mixture", cox_mixture_spec()}}) {
    const auto seed = run.next_seed();
    const auto samples = run.map(seed, run.n(), [&](RngStream& rng) {
      return cell_counts(thin(sample_condensation(spec, q, rng), p, rng));
    });
    run.add(chi_square_counts(std::string(label) + "-q0.3-p0.5", samples, condensation_pmf(spec, q_prime),
                              kSuiteAlpha, seed));
  }
}

void cox_splitting(Runner& run) {
  const double q = 0.4;
  const double p = 0.5;
  for (const auto& [label, spec] : {std::pair{"gamma", cox_gamma_spec()}, std::pair{"mixture", cox_mixture_spec()}}) {
    const auto seed = run.next_seed();
    const auto samples = run.map(seed, run.n(), [&](RngStream& rng) {
      const auto kept = sample_condensation(spec, q / p, rng);
      const auto post = split_posterior(spec, p, q, kept);
      return cell_counts(superpose(kept, sample_split_increment(spec, post, p, q, rng)));
    });
    run.add(chi_square_counts(std::string(label) + "-reconstruct-q0.4", samples, condensation_pmf(spec, q),
                              kSuiteAlpha, seed));

    const std::vector<double> grid{0.2, 0.5, 0.8};
    const auto path_seed = run.next_seed();
    const auto paths = run.paths(path_seed, run.n(), [&](RngStream& rng) { return simulate_path(spec, grid, rng); });
    for (std::size_t k = 0; k < grid.size(); ++k) {
      run.add(chi_square_counts(std::string(label) + "-flow-t" + num(grid[k]), column(paths, k),
                                condensation_pmf(spec, 1.0 - grid[k]), kSuiteAlpha, path_seed));
    }
  }
}

void laplace_functionals(Runner& run) {
  const StepFunction f(kTwoCells, {0.3, 1.2});
  auto check = [&](const std::string& name, double exact, const std::function<PointConfig(RngStream&)>& draw) {
    const auto seed = run.next_seed();
    const auto configs = run.map(seed, run.n(), draw);
    const auto est = laplace_mc(configs, f);
    run.add(numeric_within_se(name, est.mean, est.std_error, exact, configs.size(), seed));
  };
  const auto rho = two_cells(1.0, 2.0);
  {
    double expo = 0.0;
    for (std::size_t i = 0; i < 2; ++i) expo += rho.mass(i) * (1.0 - std::exp(-f.values()[i]));
    check("poisson-process", std::exp(-expo), [&](RngStream& rng) { return sample_poisson_process(rho, rng); });
  }
  {
    const double z = 0.4;
    double exact = 1.0;
    for (std::size_t i = 0; i < 2; ++i) {
      exact *= std::pow((1.0 - z) / (1.0 - z * std::exp(-f.values()[i])), rho.mass(i));
    }
    check("polya-sum-z0.4", exact, [&](RngStream& rng) { return sample_polya_sum(PolyaParams{z, rho}, rng); });
  }
  const auto nu = two_cells(0.7, 1.5);
  const std::vector<double> grid{0.3, 0.6};
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid[k];
    double expo = 0.0;
    for (std::size_t i = 0; i < 2; ++i) expo += nu.mass(i) * (1.0 - std::exp(-f.values()[i]));
    check("extremal-t" + num(t), std::exp(-t / (1.0 - t) * expo),
          [&, k](RngStream& rng) { return sample_extremal_flow(nu, grid, rng).states[k]; });
  }
}

TestReport chapman_kolmogorov(const std::string& name, const DiscreteModel& model, double s, double t, double u,
                              const CountFunction& phi) {
  const auto direct = semigroup_apply(model, s, u, phi);
  const auto composed = semigroup_apply(model, s, t, semigroup_apply(model, t, u, phi));
  const auto& box = model.box();
  double worst = 0.0;
  std::size_t compared = 0;
  for (std::size_t k = 0; k < box.size(); ++k) {
    const auto n = box.at(k);
    if (direct.missing_mass(n) > 1e-12 || composed.missing_mass(n) > 1e-12) continue;
    worst = std::max(worst, std::abs(direct(n) - composed(n)));
    ++compared;
  }
  auto r = TestReport::numeric(name, static_cast<double>(compared), worst, box.size(), 1e-9, 0,
                               "states_compared=" + std::to_string(compared));
  r.passed = r.passed && compared > 0;
  return r;
}

void semigroup_suite(Runner& run) {
  const CountFunction phi2 = [](const CountVector& n) {
    return std::exp(-0.2 * static_cast<double>(n[0]) - 0.1 * static_cast<double>(n[1])) + (n[0] <= 3 ? 1.0 : 0.0);
  };
  const CountFunction phi1 = [](const CountVector& n) {
    return std::exp(-0.3 * static_cast<double>(n[0])) + (n[0] == 2 ? 1.0 : 0.0);
  };
  run.add(chapman_kolmogorov("ck-polya-2cells", DiscreteModel(ModelClock::polya, {1.0, 0.5}, 60, 0.6), 0.1, 0.3,
                             0.6, phi2));
  run.add(chapman_kolmogorov("ck-condensation", DiscreteModel(ModelClock::condensation, {1.5}, 200, 0.6), 0.1,
                             0.3, 0.6, phi1));
  run.add(chapman_kolmogorov("ck-poisson", DiscreteModel(ModelClock::poisson, {2.0}, 60, 2.0), 0.5, 1.0, 2.0,
                             phi1));

  {
    const DiscreteModel model(ModelClock::polya, {1.0}, 80, 0.5);
    const auto mean = semigroup_apply(model, 0.0, 0.5, [](const CountVector& n) { return static_cast<double>(n[0]); });
    const double v = mean(CountVector{0});
    run.add(TestReport::numeric("nb-mean-from-empty", v, std::abs(v - 1.0), model.box().size(), 1e-9, 0));
  }
  {
    const double t = 0.5;
    const DiscreteModel model(ModelClock::polya, {1.2}, 80, t);
    const auto palm = reduced_palm_enumerate(model, t, {1});
    double worst = 0.0;
    for (Count n = 0; n <= 80; ++n) worst = std::max(worst, std::abs(palm({n}) - nb_pmf(2.2, t, n)));
    run.add(TestReport::numeric("palm-polya-one-point", worst, worst, 81, 1e-9, 0));
  }
  {
    const DiscreteModel model(ModelClock::poisson, {1.0, 2.0}, 40, 1.5);
    const auto palm = reduced_palm_enumerate(model, 1.5, {2, 1});
    const auto marginal = marginal_table(model, 1.5);
    double worst = 0.0;
    for (std::size_t k = 0; k < model.box().size(); ++k) {
      worst = std::max(worst, std::abs(palm.values()[k] - marginal.values()[k]));
    }
    run.add(TestReport::numeric("palm-poisson-invariance", worst, worst, model.box().size(), 1e-9, 0));
  }
}

void difference_thinning(Runner& run) {
  const auto rho = two_cells(3.0, 2.0);
  const FlowSpec spec{FlowVariant::polya_difference, rho, 1.0, {}};
  const auto base = spec.difference_base();
  const auto trials = cell_counts(base);
  for (auto [z, q] : {std::pair{1.0, 0.5}, std::pair{2.5, 0.4}}) {
    const auto seed = run.next_seed();
    const auto samples = run.map(seed, run.n(), [&](RngStream& rng) {
      return cell_counts(thin(sample_polya_difference(z, base, rng), q, rng));
    });
    const double g = gamma_param_difference(z, q);
    run.add(chi_square_counts("z" + num(z) + "-q" + num(q), samples, binomial_joint(trials, g / (1.0 + g)),
                              kSuiteAlpha, seed));
  }
  const std::vector<double> grid{0.5, 2.0, 5.0};
  const auto seed = run.next_seed();
  const auto paths = run.paths(seed, run.n(), [&](RngStream& rng) { return simulate_path(spec, grid, rng); });
  for (std::size_t k = 0; k < grid.size(); ++k) {
    run.add(chi_square_counts("flow-t" + num(grid[k]), column(paths, k),
                              binomial_joint(trials, grid[k] / (1.0 + grid[k])), kSuiteAlpha, seed));
  }
  const double s = 0.5;
  const double t = 2.0;
  const auto bseed = run.next_seed();
  const auto back = run.map(bseed, run.n(), [&](RngStream& rng) {
    const auto yt = simulate_path(spec, {t}, rng).states.back();
    return cell_counts(backward_thin(spec, s, t, yt, rng));
  });
  run.add(chi_square_counts("backward-s0.5-t2", back, binomial_joint(trials, s / (1.0 + s)), kSuiteAlpha, bseed));
}

void monotonicity(Runner& run) {
  const std::vector<double> bounded{0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99};
  const std::vector<double> unbounded{0.5, 1.0, 2.0, 3.0, 5.0, 8.0, 13.0, 21.0, 34.0, 55.0, 89.0};
  const std::vector<std::pair<std::string, FlowSpec>> specs{
      {"polya_sum", FlowSpec{FlowVariant::polya_sum, two_cells(1.0, 2.0), 1.0, {}}},
      {"poisson", FlowSpec{FlowVariant::poisson, two_cells(1.0, 2.0), 1.0, {}}},
      {"polya_difference", FlowSpec{FlowVariant::polya_difference, two_cells(3.0, 2.0), 1.0, {}}},
      {"cox_gamma", cox_gamma_spec()},
      {"cox_mixture", cox_mixture_spec()},
  };
  for (const auto& [label, spec] : specs) {
    const auto& grid = spec.bounded_horizon() ? bounded : unbounded;
    const auto seed = run.next_seed();
    const auto tallies = run.map(seed, run.n(), [&](RngStream& rng) {
      const auto path = simulate_path(spec, grid, rng);
      return std::pair{path.states.size() - 1, count_monotonicity_violations(path)};
    });
    std::size_t steps = 0;
    std::size_t bad = 0;
    for (const auto& [st, b] : tallies) {
      steps += st;
      bad += b;
    }
    run.result.path_steps += steps;
    run.result.monotonicity_violations += bad;
    run.add(TestReport::numeric(label, static_cast<double>(steps), static_cast<double>(bad), tallies.size(), 0.5,
                                seed, "path_steps=" + std::to_string(steps)));
  }
  // The extremal sampler builds paths backwards; it must be monotone as well.
  const auto seed = run.next_seed();
  const auto tallies = run.map(seed, run.n(), [&](RngStream& rng) {
    const auto q = sample_gamma_measure(two_cells(1.0, 2.0), rng);
    const auto path = sample_extremal_flow(q, bounded, rng);
    return std::pair{path.states.size() - 1, count_monotonicity_violations(path)};
  });
  std::size_t steps = 0;
  std::size_t bad = 0;
  for (const auto& [st, b] : tallies) {
    steps += st;
    bad += b;
  }
  run.result.path_steps += steps;
  run.result.monotonicity_violations += bad;
  run.add(TestReport::numeric("extremal", static_cast<double>(steps), static_cast<double>(bad), tallies.size(), 0.5,
                              seed, "path_steps=" + std::to_string(steps)));
}

struct Entry {
  SuiteInfo info;
  std::function<void(Runner&)> body;
};

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table{
      {{"sampling-lemma",
        "q-thinning of Poy(z, rho) against NB(rho(B), gamma(z, q)) for (z, q) in {(0.6, 0.5), (0.3, 0.8)}",
        "Sampling lemma: thinning Poy_{z,rho} by q gives Poy_{gamma,rho}, gamma=gamma(z,q)=zq/(1-z(1-q))",
        {{"rho", 2.0}, {"cases", {{0.6, 0.5}, {0.3, 0.8}}}, {"replicas", kDefaultReplicas}}},
       sampling_lemma},
      {{"condensation-lemma",
        "Poy(gamma, rho) plus an increment Poy((z-gamma)/(1-gamma), rho + nu) against NB(rho_i, z)",
        "Condensation lemma: Then P = Poy_{z,rho}",
        {{"gamma", 0.2}, {"z", 0.6}, {"rho", {1.0, 2.0}}, {"replicas", kDefaultReplicas}}},
       condensation_lemma},
      {{"polya-marginals", "Polya sum flow marginals at t in {0.25, 0.5, 0.75} against NB(rho_i, t)",
        "Markov process remark: Y_t(B) ~ NB(rho(B), t)",
        {{"rho", {1.0, 2.0}}, {"grid", {0.25, 0.5, 0.75}}, {"replicas", kDefaultReplicas}}},
       polya_marginals},
      {{"backward-consistency",
        "Backward resampling keeps the law of Y_0.25; backward thinning of Y_t matches Y_s",
        "Gibbs remark: Pr pi_T = Pr, with backward kernel Gamma_{s(1-t)/(t(1-s))}",
        {{"rho", 2.0}, {"resample_grid", {0.25, 0.5}}, {"pairs", {{0.25, 0.5}, {0.5, 0.9}}},
         {"replicas", kDefaultReplicas}}},
       backward_consistency},
      {{"exit-limit", "KS distance of (1-t) Y_t(B) at t = 0.999 against Gamma(rho(B), 1) for rho(B) in {1, 2}",
        "Exit limit: Q = lim_{t->1} (1-t) Y_t is the Gamma random measure",
        {{"rho", {1.0, 2.0}}, {"grid", {0.9, 0.99, 0.999}}, {"ks_threshold", 0.02}, {"replicas", kDefaultReplicas}}},
       exit_limit_suite},
      {{"mixture-representation",
        "Gamma environment plus extremal flow against the direct Polya flow on the grid (0.4, 0.8)",
        "Mixture theorem: Pr(Phi) = integral of P_nu(Phi) over the Gamma random measure R(d nu)",
        {{"rho", 2.0}, {"grid", {0.4, 0.8}}, {"replicas", kDefaultReplicas}}},
       mixture_representation},
      {{"duality", "Forward/backward kernel duality, exact on one cell and by Monte Carlo",
        "Duality corollary: integral p*_{s,t}(., psi) phi dP_{1-t} = integral psi p_{s,t}(., phi) dP_{1-s}",
        {{"s", 0.3}, {"t", 0.6}, {"phi", "1{n<=2}"}, {"psi", "1{n=1}"}, {"rho", 1.0}, {"tolerance", 1e-9},
         {"replicas", kDefaultReplicas}}},
       duality_suite},
      {{"generator", "Palm-kernel generator against semigroup finite differences at h in {1e-3, 1e-4}",
        "Generator lemma: the generator of Y is given by 1/((1-s) P^!(void)) times the one-point Palm jump integral",
        {{"s", 0.3}, {"nu", 2}, {"rho", 1.5}, {"h", {1e-3, 1e-4}}, {"relative_tolerance", 1e-2},
         {"clocks", {"condensation", "polya", "poisson"}}}},
       generator_suite},
      {{"mecke", "Papangelou identity of the Polya sum process and Campbell identity of the Gamma random measure",
        "Papangelou kernel z(rho + mu); Gamma Campbell measure C(h) = integral h(x, mu + r delta_x) e^{-r} dr rho(dx)",
        {{"z", 0.5}, {"rho_exact", 1.0}, {"rho_mc", {1.0, 2.0}}, {"quadrature_nodes", 64}, {"tolerance", 1e-10},
         {"replicas", kDefaultReplicas}}},
       mecke_suite},
      {{"variant-limits", "Poisson flow Y_T/T -> rho and the Polya difference flow reaching rho",
        "Closing remark: Q = rho a.s. for the Poisson and Polya difference flows",
        {{"poisson_rho", 1.0}, {"poisson_T", 1000.0}, {"band", 0.15}, {"required_fraction", 0.99},
         {"difference_rho", {2, 3}}, {"T", {10.0, 100.0, 1000.0}}, {"replicas_small", kDefaultReplicas / 10}}},
       variant_limits},
      {{"cox-thinning", "Thinning P_q by q/q' gives P_q' for a Gamma-directed and a two-component Cox process",
        "Thinning lemma: Gamma_p(P_q) = P_{q/p}",
        {{"q", 0.3}, {"q_prime", 0.6}, {"replicas", kDefaultReplicas}}},
       cox_thinning},
      {{"cox-splitting", "Kept part plus posterior increment reconstructs P_q; Cox flow marginals Y_t ~ P_{1-t}",
        "Splitting lemma: P_q = Upsilon_p(P_q) * P_{q'}",
        {{"q", 0.4}, {"p", 0.5}, {"grid", {0.2, 0.5, 0.8}}, {"replicas", kDefaultReplicas}}},
       cox_splitting},
      {{"laplace-functionals", "Monte Carlo Laplace functionals against closed forms",
        "Extremal Laplace functional exp(-t/(1-t) integral (1 - e^{-f}) d nu)",
        {{"f", {0.3, 1.2}}, {"nu", {0.7, 1.5}}, {"grid", {0.3, 0.6}}, {"replicas", kDefaultReplicas}}},
       laplace_functionals},
      {{"semigroup", "Chapman-Kolmogorov and reduced Palm kernels by exact enumeration",
        "Operator family T_{s,t} phi = p_{s,t}(., phi); reduced Palm kernels P^!",
        {{"triple", {0.1, 0.3, 0.6}}, {"tolerance", 1e-9}}},
       semigroup_suite},
      {{"difference-thinning", "Thinning of the Polya difference process and the difference flow marginals",
        "Closing remark: Gamma_q(GP_{z,rho}) = GP_{zq/(1+z(1-q)),rho}",
        {{"rho", {3, 2}}, {"cases", {{1.0, 0.5}, {2.5, 0.4}}}, {"grid", {0.5, 2.0, 5.0}}, {"replicas", kDefaultReplicas}}},
       difference_thinning},
      {{"monotonicity", "config_leq between consecutive states on every simulated path of every variant",
        "Path space: omega_s <= omega_t for s <= t",
        {{"bounded_grid_points", 11}, {"unbounded_grid_points", 11}, {"replicas", kDefaultReplicas}}},
       monotonicity},
  };
  return table;
}

}  // namespace

bool SuiteResult::passed() const {
  return std::all_of(reports.begin(), reports.end(), [](const TestReport& r) { return r.passed; }) &&
         monotonicity_violations == 0;
}

const std::vector<SuiteInfo>& suite_registry() {
  static const std::vector<SuiteInfo> infos = [] {
    std::vector<SuiteInfo> out;
    for (const auto& e : entries()) out.push_back(e.info);
    return out;
  }();
  return infos;
}

const SuiteInfo* find_suite(const std::string& name) {
  for (const auto& info : suite_registry()) {
    if (info.name == name) return &info;
  }
  return nullptr;
}

std::uint64_t suite_seed(std::uint64_t base, const std::string& name) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : name) h = (h ^ c) * 0x100000001B3ULL;
  return splitmix64(base ^ h);
}

void apply_bonferroni(std::vector<TestReport>& reports, double alpha) {
  const auto k = std::count_if(reports.begin(), reports.end(),
                               [](const TestReport& r) { return r.kind == TestReport::Kind::statistical; });
  if (k == 0) return;
  const double threshold = alpha / static_cast<double>(k);
  for (auto& r : reports) {
    if (r.kind != TestReport::Kind::statistical) continue;
    r.threshold = threshold;
    r.passed = r.value > threshold;
  }
}

SuiteResult run_suite(const std::string& name, const SuiteContext& ctx) {
  const auto it = std::find_if(entries().begin(), entries().end(), [&](const Entry& e) { return e.info.name == name; });
  if (it == entries().end()) throw ParameterError("unknown suite '" + name + "'");
  const auto start = std::chrono::steady_clock::now();
  Runner run(ctx, name);
  try {
    it->body(run);
  } catch (const std::exception& e) {
    run.add(TestReport::numeric("error", 0.0, 1.0, 0, 0.0, ctx.seed, e.what()));
  }
  if (run.result.path_steps > 0 && name != "monotonicity") {
    run.add(TestReport::numeric("path-monotonicity", static_cast<double>(run.result.path_steps),
                                static_cast<double>(run.result.monotonicity_violations), run.result.path_steps, 0.5,
                                suite_seed(ctx.seed, name)));
  }
  apply_bonferroni(run.result.reports);
  run.result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return std::move(run.result);
}

}  // namespace polyaflow
