#include "polyaflow/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "polyaflow/errors.hpp"
#include "polyaflow/flows.hpp"
#include "polyaflow/parallel.hpp"
#include "polyaflow/quadrature.hpp"
#include "polyaflow/rng.hpp"
#include "polyaflow/samplers.hpp"

namespace polyaflow {

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct Bin {
  double expected = 0.0;
  double observed = 0.0;
};

// Greedy left-to-right pooling; a short final bin is folded into its predecessor.
template <typename Cell, typename Key>
std::vector<Cell> pool(const std::vector<Cell>& cells, Key key) {
  std::vector<Cell> bins;
  Cell cur{};
  bool open = false;
  for (const auto& c : cells) {
    cur.expected += c.expected;
    cur.observed += c.observed;
    if constexpr (requires { c.observed_b; }) cur.observed_b += c.observed_b;
    open = true;
    if (key(cur) >= kMinExpectedPerBin) {
      bins.push_back(cur);
      cur = Cell{};
      open = false;
    }
  }
  if (open) {
    if (bins.empty()) {
      bins.push_back(cur);
    } else {
      bins.back().expected += cur.expected;
      bins.back().observed += cur.observed;
      if constexpr (requires { cur.observed_b; }) bins.back().observed_b += cur.observed_b;
    }
  }
  return bins;
}

void require_samples(std::size_t n, const char* what) {
  if (n < kMinChiSquareSamples) {
    throw ParameterError(std::string(what) + ": need at least 1000 samples");
  }
}

}  // namespace

TestReport TestReport::statistical(std::string name, double statistic, double p_value, std::size_t n,
                                   double threshold, std::uint64_t seed, std::string detail) {
  TestReport r;
  r.name = std::move(name);
  r.kind = Kind::statistical;
  r.statistic = statistic;
  r.value = p_value;
  r.n_samples = n;
  r.threshold = threshold;
  r.passed = p_value > threshold;
  r.seed = seed;
  r.detail = std::move(detail);
  return r;
}

TestReport TestReport::numeric(std::string name, double statistic, double max_abs_error, std::size_t n,
                               double threshold, std::uint64_t seed, std::string detail) {
  TestReport r;
  r.name = std::move(name);
  r.kind = Kind::numeric;
  r.statistic = statistic;
  r.value = max_abs_error;
  r.n_samples = n;
  r.threshold = threshold;
  r.passed = max_abs_error < threshold;
  r.seed = seed;
  r.detail = std::move(detail);
  return r;
}

nlohmann::json to_json(const TestReport& r) {
  nlohmann::json j{{"name", r.name},
                   {"statistic", r.statistic},
                   {"n_samples", r.n_samples},
                   {"passed", r.passed},
                   {"threshold", r.threshold},
                   {"seed", r.seed}};
  if (r.kind == TestReport::Kind::statistical) {
    j["p_value"] = r.value;
  } else {
    j["max_abs_error"] = r.value;
  }
  if (!r.detail.empty()) j["detail"] = r.detail;
  return j;
}

std::string csv_header() { return "name,statistic,p_or_err,passed"; }

std::string to_csv_row(const TestReport& r) {
  return r.name + "," + fmt(r.statistic) + "," + fmt(r.value) + "," + (r.passed ? "true" : "false");
}

ChiSquareResult chi_square_gof(const std::vector<CountVector>& samples, const CountFunction& pmf) {
  require_samples(samples.size(), "chi_square_gof");
  const std::size_t dims = samples.front().size();
  CountVector top(dims, 0);
  for (const auto& s : samples) {
    if (s.size() != dims) throw ParameterError("chi_square_gof: ragged count vectors");
    for (std::size_t i = 0; i < dims; ++i) top[i] = std::max(top[i], s[i]);
  }
  std::map<CountVector, double> observed;
  for (const auto& s : samples) observed[s] += 1.0;

  const double n = static_cast<double>(samples.size());
  std::vector<Bin> cells;
  double covered = 0.0;
  CountVector v(dims, 0);
  while (true) {
    const double p = pmf(v);
    covered += p;
    auto it = observed.find(v);
    cells.push_back({n * p, it == observed.end() ? 0.0 : it->second});
    std::size_t i = dims;
    while (i-- > 0) {
      if (v[i] < top[i]) {
        ++v[i];
        break;
      }
      v[i] = 0;
    }
    if (i == static_cast<std::size_t>(-1)) break;
  }
  // Mass outside the observed box has no observations; it joins the last cell.
  cells.back().expected += n * std::max(0.0, 1.0 - covered);

  const auto bins = pool(cells, [](const Bin& b) { return b.expected; });
  ChiSquareResult res;
  res.bins = bins.size();
  for (const auto& b : bins) {
    if (b.expected > 0.0) {
      res.statistic += (b.observed - b.expected) * (b.observed - b.expected) / b.expected;
    } else if (b.observed > 0.0) {
      res.statistic = std::numeric_limits<double>::infinity();
    }
  }
  res.df = static_cast<double>(bins.size()) - 1.0;
  res.p_value = std::isinf(res.statistic) ? 0.0 : chi_square_sf(res.statistic, res.df);
  return res;
}

ChiSquareResult chi_square_two_sample(const std::vector<CountVector>& a, const std::vector<CountVector>& b) {
  require_samples(a.size(), "chi_square_two_sample");
  require_samples(b.size(), "chi_square_two_sample");
  struct Cell {
    double expected = 0.0;  // combined count, scaled below
    double observed = 0.0;  // count in a
    double observed_b = 0.0;
  };
  std::map<CountVector, Cell> table;
  for (const auto& s : a) table[s].observed += 1.0;
  for (const auto& s : b) table[s].observed_b += 1.0;
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double scale = std::min(na, nb) / (na + nb);
  std::vector<Cell> cells;
  cells.reserve(table.size());
  for (auto& [key, c] : table) {
    c.expected = (c.observed + c.observed_b) * scale;
    cells.push_back(c);
  }
  const auto bins = pool(cells, [](const Cell& c) { return c.expected; });
  ChiSquareResult res;
  res.bins = bins.size();
  const double ka = std::sqrt(nb / na);
  const double kb = std::sqrt(na / nb);
  for (const auto& c : bins) {
    const double d = ka * c.observed - kb * c.observed_b;
    res.statistic += d * d / (c.observed + c.observed_b);
  }
  res.df = static_cast<double>(bins.size()) - 1.0;
  res.p_value = chi_square_sf(res.statistic, res.df);
  return res;
}

TestReport chi_square_counts(std::string name, const std::vector<CountVector>& samples,
                             const CountFunction& pmf, double threshold, std::uint64_t seed) {
  const auto r = chi_square_gof(samples, pmf);
  return TestReport::statistical(std::move(name), r.statistic, r.p_value, samples.size(), threshold, seed,
                                 "bins=" + std::to_string(r.bins));
}

TestReport chi_square_counts(std::string name, const std::vector<CountVector>& a,
                             const std::vector<CountVector>& b, double threshold, std::uint64_t seed) {
  const auto r = chi_square_two_sample(a, b);
  return TestReport::statistical(std::move(name), r.statistic, r.p_value, a.size() + b.size(), threshold,
                                 seed, "bins=" + std::to_string(r.bins));
}

MeanEstimate laplace_mc(std::span<const PointConfig> configs, const StepFunction& f) {
  std::vector<double> v;
  v.reserve(configs.size());
  for (const auto& c : configs) v.push_back(std::exp(-config_integrate(c, f)));
  return mean_and_se(v);
}

TestReport mecke_check_polya(double z, const CellMeasure& rho, const CellCountFunction& h, std::size_t n,
                             std::uint64_t seed, std::size_t threads) {
  const PolyaParams params{z, rho};
  params.validate();
  struct Pair {
    double lhs = 0.0;
    double rhs = 0.0;
  };
  const auto pairs = parallel_map(n, threads, [&](std::size_t j) {
    RngStream rng(seed, j);
    const auto counts = cell_counts(sample_polya_sum(params, rng));
    Pair out;
    CountVector shifted = counts;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      out.lhs += static_cast<double>(counts[i]) * h(i, counts);
      ++shifted[i];
      out.rhs += z * (rho.mass(i) + static_cast<double>(counts[i])) * h(i, shifted);
      --shifted[i];
    }
    return out;
  });
  std::vector<double> lhs, rhs, diff;
  for (const auto& p : pairs) {
    lhs.push_back(p.lhs);
    rhs.push_back(p.rhs);
    diff.push_back(p.lhs - p.rhs);
  }
  const auto d = mean_and_se(diff);
  const double err = std::abs(d.mean);
  const double zscore = d.std_error > 0.0 ? err / d.std_error : (err == 0.0 ? 0.0 : INFINITY);
  std::ostringstream detail;
  detail << "lhs=" << fmt(mean_and_se(lhs).mean) << " rhs=" << fmt(mean_and_se(rhs).mean)
         << " se=" << fmt(d.std_error);
  auto report = TestReport::numeric("mecke-polya", zscore, err, n, 3.0 * d.std_error, seed, detail.str());
  if (d.std_error == 0.0) report.passed = err == 0.0;
  return report;
}

TestReport mecke_exact_polya(double z, const std::vector<double>& rho, const CellCountFunction& h,
                             Count max_count, double tolerance) {
  if (!(z > 0.0 && z < 1.0)) throw ParameterError("mecke_exact_polya: z must lie in (0, 1)");
  const DiscreteModel model(ModelClock::polya, rho, max_count, z);
  const auto& box = model.box();
  double lhs = 0.0;
  double rhs = 0.0;
  for (std::size_t k = 0; k < box.size(); ++k) {
    CountVector mu = box.at(k);
    const double p = model.marginal_pmf(z, mu);
    for (std::size_t i = 0; i < mu.size(); ++i) {
      lhs += p * static_cast<double>(mu[i]) * h(i, mu);
      ++mu[i];
      rhs += p * z * (rho[i] + static_cast<double>(mu[i] - 1)) * h(i, mu);
      --mu[i];
    }
  }
  std::ostringstream detail;
  detail << "lhs=" << fmt(lhs) << " rhs=" << fmt(rhs);
  return TestReport::numeric("mecke-polya-exact", lhs, std::abs(lhs - rhs), box.size(), tolerance, 0,
                             detail.str());
}

TestReport mecke_check_gamma(const CellMeasure& rho, const CellMassFunction& h, std::size_t n,
                             std::size_t quadrature_nodes, std::uint64_t seed, std::size_t threads) {
  const GaussLaguerre fine(quadrature_nodes);
  const GaussLaguerre coarse(std::max<std::size_t>(1, quadrature_nodes / 2));
  struct Triple {
    double lhs = 0.0;
    double rhs = 0.0;
    double rhs_coarse = 0.0;
  };
  const auto draws = parallel_map(n, threads, [&](std::size_t j) {
    RngStream rng(seed, j);
    const auto q = sample_gamma_measure(rho, rng);
    std::vector<double> masses(q.masses().begin(), q.masses().end());
    Triple out;
    for (std::size_t i = 0; i < masses.size(); ++i) {
      out.lhs += masses[i] * h(i, masses);
      const double base = masses[i];
      auto shifted = [&](double r) {
        masses[i] = base + r;
        const double v = h(i, masses);
        masses[i] = base;
        return v;
      };
      out.rhs += rho.mass(i) * fine.integrate(shifted);
      out.rhs_coarse += rho.mass(i) * coarse.integrate(shifted);
    }
    return out;
  });
  std::vector<double> diff, lhs, rhs, rhs_coarse;
  for (const auto& d : draws) {
    diff.push_back(d.lhs - d.rhs);
    lhs.push_back(d.lhs);
    rhs.push_back(d.rhs);
    rhs_coarse.push_back(d.rhs_coarse);
  }
  const auto d = mean_and_se(diff);
  const double quad_err = std::abs(mean_and_se(rhs).mean - mean_and_se(rhs_coarse).mean);
  const double err = std::abs(d.mean);
  std::ostringstream detail;
  detail << "lhs=" << fmt(mean_and_se(lhs).mean) << " rhs=" << fmt(mean_and_se(rhs).mean)
         << " se=" << fmt(d.std_error) << " quadrature_nodes=" << quadrature_nodes
         << " quadrature_error=" << fmt(quad_err);
  const double zscore = d.std_error > 0.0 ? err / d.std_error : 0.0;
  auto report = TestReport::numeric("mecke-gamma", zscore, err, n, 3.0 * d.std_error + quad_err, seed,
                                    detail.str());
  if (report.threshold == 0.0) report.passed = err == 0.0;
  return report;
}

TestReport duality_check(const FlowSpec& spec, double s, double t, const CountFunction& phi,
                         const CountFunction& psi, std::size_t n, std::uint64_t seed, std::size_t threads,
                         std::optional<double> exact) {
  spec.validate();
  spec.check_time(s);
  spec.check_time(t);
  if (!(s < t)) throw ParameterError("duality_check: need s < t");
  const auto backward = parallel_map(n, threads, [&](std::size_t j) {
    RngStream rng(seed, 2 * j);
    const auto yt = simulate_path(spec, {t}, rng).states.back();
    const auto ys = backward_thin(spec, s, t, yt, rng);
    return phi(cell_counts(yt)) * psi(cell_counts(ys));
  });
  const auto forward = parallel_map(n, threads, [&](std::size_t j) {
    RngStream rng(seed, 2 * j + 1);
    const auto ys = simulate_path(spec, {s}, rng).states.back();
    const auto yt = superpose(ys, forward_increment(spec, s, t, ys, rng));
    return psi(cell_counts(ys)) * phi(cell_counts(yt));
  });
  const auto b = mean_and_se(backward);
  const auto f = mean_and_se(forward);
  const double combined = std::sqrt(b.std_error * b.std_error + f.std_error * f.std_error);
  const double err = std::abs(b.mean - f.mean);
  std::ostringstream detail;
  detail << "backward=" << fmt(b.mean) << "+-" << fmt(b.std_error) << " forward=" << fmt(f.mean) << "+-"
         << fmt(f.std_error);
  bool exact_ok = true;
  if (exact) {
    detail << " exact=" << fmt(*exact);
    exact_ok = std::abs(b.mean - *exact) < 3.0 * b.std_error && std::abs(f.mean - *exact) < 3.0 * f.std_error;
  }
  auto report = TestReport::numeric("duality-mc", combined > 0.0 ? err / combined : 0.0, err, 2 * n,
                                    3.0 * combined, seed, detail.str());
  report.passed = report.passed && exact_ok;
  return report;
}

TestReport duality_exact_check(const DiscreteModel& model, double s, double t, const CountFunction& phi,
                               const CountFunction& psi, double tolerance) {
  const auto v = duality_exact(model, s, t, phi, psi);
  std::ostringstream detail;
  detail << "backward=" << fmt(v.backward_side) << " forward=" << fmt(v.forward_side);
  return TestReport::numeric("duality-exact", v.backward_side, std::abs(v.backward_side - v.forward_side),
                             model.box().size(), tolerance, 0, detail.str());
}

}  // namespace polyaflow
