#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "polyaflow/errors.hpp"
#include "polyaflow/kernels.hpp"
#include "polyaflow/samplers.hpp"

using namespace polyaflow;

namespace {

const Window w1(0.0, 1.0, 1);
constexpr int kN = 100000;
constexpr double kLevel = 1e-3;

FlowSpec spec_of(FlowVariant v, double rho) { return FlowSpec{v, CellMeasure(w1, {rho}), 1.0, {}}; }

}  // namespace

TEST_CASE("gamma_param values") {
  CHECK(gamma_param(0.37, 1.0) == doctest::Approx(0.37).epsilon(1e-15));
  CHECK(gamma_param(0.5, 0.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(gamma_param(0.6, 0.5) == doctest::Approx(3.0 / 7.0).epsilon(1e-15));
  CHECK(gamma_param(0.7, 0.4 * 0.6) == doctest::Approx(gamma_param(gamma_param(0.7, 0.6), 0.4)).epsilon(1e-14));
  CHECK_THROWS_AS(gamma_param(0.0, 0.5), ParameterError);
  CHECK_THROWS_AS(gamma_param(1.0, 0.5), ParameterError);
  CHECK_THROWS_AS(gamma_param(0.5, 0.0), ParameterError);
  CHECK_THROWS_AS(gamma_param(0.5, 1.2), ParameterError);
}

TEST_CASE("gamma_param_difference values") {
  CHECK(gamma_param_difference(2.3, 1.0) == doctest::Approx(2.3).epsilon(1e-15));
  CHECK(gamma_param_difference(1.0, 0.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(gamma_param_difference(1.0, 0.24) ==
        doctest::Approx(gamma_param_difference(gamma_param_difference(1.0, 0.6), 0.4)).epsilon(1e-14));
  CHECK_THROWS_AS(gamma_param_difference(0.0, 0.5), ParameterError);
  CHECK_THROWS_AS(gamma_param_difference(1.0, 0.0), ParameterError);
}

TEST_CASE("parameter maps compose like thinnings on random triples") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  std::uniform_real_distribution<double> big(0.01, 20.0);
  for (int i = 0; i < 100; ++i) {
    const double z = u(gen), q1 = u(gen), q2 = u(gen), y = big(gen);
    CHECK(std::abs(gamma_param(z, q1 * q2) - gamma_param(gamma_param(z, q2), q1)) < 1e-12);
    CHECK(std::abs(gamma_param_difference(y, q1 * q2) - gamma_param_difference(gamma_param_difference(y, q2), q1)) <
          1e-12);
    const double g = gamma_param(z, q1);
    CHECK(g > 0.0);
    CHECK(g < 1.0);
  }
}

TEST_CASE("backward thinning ratios") {
  CHECK(backward_thin_ratio(FlowVariant::polya_sum, 0.25, 0.5) == doctest::Approx(1.0 / 3.0));
  CHECK(backward_thin_ratio(FlowVariant::polya_sum, 0.4, 0.4) == 1.0);
  CHECK(backward_thin_ratio(FlowVariant::polya_sum, 0.0, 0.4) == 0.0);
  CHECK(backward_thin_ratio(FlowVariant::cox_mixture, 0.2, 0.6) == doctest::Approx(0.4 / 0.8));
  CHECK(backward_thin_ratio(FlowVariant::poisson, 2.0, 8.0) == doctest::Approx(0.25));
  CHECK(backward_thin_ratio(FlowVariant::polya_difference, 1.0, 3.0) == doctest::Approx(4.0 / 6.0));
  CHECK_THROWS_AS(backward_thin_ratio(FlowVariant::polya_sum, 0.5, 0.4), ParameterError);

  const auto spec = spec_of(FlowVariant::polya_sum, 2.0);
  RngStream rng(1, 0);
  const PointConfig state(w1, {{0.5, 4}});
  CHECK(backward_thin(spec, 0.0, 0.5, state, rng).empty());
  CHECK(backward_thin(spec, 0.5, 0.5, state, rng) == state);
  CHECK_THROWS_AS(backward_thin(spec, 0.5, 1.0, state, rng), ParameterError);
}

TEST_CASE("forward increments have the stated laws") {
  RngStream rng(2, 0);
  SUBCASE("polya_sum from empty at (0, 0.5)") {
    const auto spec = spec_of(FlowVariant::polya_sum, 1.0);
    std::vector<std::uint64_t> n;
    for (int i = 0; i < kN; ++i) n.push_back(forward_increment(spec, 0.0, 0.5, PointConfig(w1), rng).total());
    CHECK(oracle::pearson_p(n, oracle::nb_table(1.0, 0.5, 200)) > kLevel);
  }
  SUBCASE("polya_sum from a nonempty state") {
    const auto spec = spec_of(FlowVariant::polya_sum, 1.0);
    const PointConfig state(w1, {{0.2, 2}, {0.8, 1}});
    std::vector<std::uint64_t> n;
    for (int i = 0; i < kN; ++i) n.push_back(forward_increment(spec, 0.3, 0.65, state, rng).total());
    CHECK(oracle::pearson_p(n, oracle::nb_table(4.0, 0.35 / 0.7, 300)) > kLevel);
  }
  SUBCASE("poisson at (1, 3)") {
    const auto spec = spec_of(FlowVariant::poisson, 1.0);
    std::vector<std::uint64_t> n;
    for (int i = 0; i < kN; ++i) n.push_back(forward_increment(spec, 1.0, 3.0, PointConfig(w1), rng).total());
    CHECK(oracle::pearson_p(n, oracle::poisson_table(2.0, 60)) > kLevel);
  }
  SUBCASE("polya_difference adds thinned remaining base") {
    const auto spec = spec_of(FlowVariant::polya_difference, 5.0);
    const auto base = spec.difference_base();
    const PointConfig state(w1, {base.atoms()[0], base.atoms()[3]});
    std::vector<std::uint64_t> n;
    for (int i = 0; i < kN; ++i) {
      const auto inc = forward_increment(spec, 1.0, 3.0, state, rng);
      REQUIRE(config_leq(superpose(state, inc), base));
      n.push_back(inc.total());
    }
    // parameter (t-s)/(1+s) = 1, retention 1/2 of the 3 remaining units
    CHECK(oracle::pearson_p(n, oracle::binomial_table(3, 0.5)) > kLevel);
    const PointConfig too_big(w1, {{0.05, 1}});
    CHECK_THROWS_AS(forward_increment(spec, 1.0, 2.0, too_big, rng), DomainError);
  }
  SUBCASE("small and zero steps") {
    const auto spec = spec_of(FlowVariant::polya_sum, 1.0);
    CHECK(forward_increment(spec, 0.4, 0.4, PointConfig(w1), rng).empty());
    int nonempty = 0;
    for (int i = 0; i < 10000; ++i) nonempty += !forward_increment(spec, 0.4, 0.4 + 1e-9, PointConfig(w1), rng).empty();
    CHECK(nonempty <= 1);
    CHECK_THROWS_AS(forward_increment(spec, 0.5, 0.4, PointConfig(w1), rng), ParameterError);
    CHECK_THROWS_AS(forward_increment(spec, 0.5, 1.0, PointConfig(w1), rng), ParameterError);
  }
}

TEST_CASE("flow spec validation lists every violation") {
  FlowSpec bad{FlowVariant::cox_mixture, CellMeasure(w1, {1.0}), 1.0,
               {{0.7, CellMeasure(w1, {1.0})}, {0.7, CellMeasure(Window(0.0, 2.0, 1), {1.0})}}};
  const auto v = bad.violations();
  CHECK(v.size() == 2);
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  FlowSpec frac{FlowVariant::polya_difference, CellMeasure(w1, {1.5}), -1.0, {}};
  CHECK(frac.violations().size() == 2);
  CHECK(spec_of(FlowVariant::polya_sum, 0.0).violations().size() == 1);
  const auto ok = spec_of(FlowVariant::polya_sum, 1.0);
  CHECK_NOTHROW(ok.check_time(kMaxBoundedTime));
  CHECK_THROWS_AS(ok.check_time(1.0 - 1e-7), ParameterError);
  CHECK_THROWS_AS(ok.check_time(-0.1), ParameterError);
  CHECK_NOTHROW(spec_of(FlowVariant::poisson, 1.0).check_time(1e6));
  CHECK(flow_variant_from_string("cox_mixture") == FlowVariant::cox_mixture);
  CHECK_THROWS_AS(flow_variant_from_string("nope"), ParameterError);
}

TEST_CASE("split posterior: finite mixtures") {
  const FlowSpec single{FlowVariant::cox_mixture, CellMeasure(w1, {1.0}), 1.0, {{1.0, CellMeasure(w1, {2.0})}}};
  const PointConfig obs(w1, {{0.5, 3}});
  const auto p1 = split_posterior(single, 0.5, 0.4, obs);
  REQUIRE(p1.weights.size() == 1);
  CHECK(p1.weights[0] == 1.0);

  const FlowSpec two{FlowVariant::cox_mixture, CellMeasure(w1, {1.0}), 1.0,
                     {{0.5, CellMeasure(w1, {1.0})}, {0.5, CellMeasure(w1, {4.0})}}};
  // p / q = 1: exposures 1 and 4, observed nothing
  const auto p2 = split_posterior(two, 0.5, 0.5, PointConfig(w1));
  const double a = std::exp(-1.0), b = std::exp(-4.0);
  CHECK(p2.weights[0] == doctest::Approx(a / (a + b)).epsilon(1e-14));
  CHECK(p2.weights[1] == doctest::Approx(b / (a + b)).epsilon(1e-14));

  // observed 2 points at exposure 0.5: weights ∝ w_k (0.5 λ_k)^2 exp(-0.5 λ_k)
  const auto p3 = split_posterior(two, 0.25, 0.5, PointConfig(w1, {{0.1, 2}}));
  const double c = 0.25 * std::exp(-0.5), d = 4.0 * std::exp(-2.0);
  CHECK(p3.weights[0] == doctest::Approx(c / (c + d)).epsilon(1e-13));

  const FlowSpec zero_comp{FlowVariant::cox_mixture, CellMeasure(w1, {1.0}), 1.0,
                           {{1.0, CellMeasure(w1, {0.0})}}};
  CHECK_THROWS_AS(split_posterior(zero_comp, 0.5, 0.5, obs), DomainError);
  CHECK_THROWS_AS(split_posterior(spec_of(FlowVariant::polya_sum, 1.0), 0.5, 0.5, obs), DomainError);
  CHECK_THROWS_AS(split_posterior(two, 0.0, 0.5, obs), ParameterError);
}

TEST_CASE("split posterior: Gamma conjugacy against numerical Bayes") {
  const double shape = 1.7;
  const double p = 0.3, q = 0.6;
  const double exposure = p / q;
  const Count n = 3;
  const FlowSpec spec{FlowVariant::cox_mixture, CellMeasure(w1, {shape}), 1.0, {}};
  const auto post = split_posterior(spec, p, q, PointConfig(w1, {{0.5, n}}));
  CHECK(post.family == CoxPosterior::Family::gamma);
  CHECK(post.gamma_shape[0] == doctest::Approx(shape + n));
  CHECK(post.gamma_rate == doctest::Approx(1.0 + exposure));
  // Posterior mean of the intensity by quadrature of prior x Poisson likelihood.
  double num = 0.0, den = 0.0;
  const double h = 1e-4;
  for (double x = h / 2; x < 60.0; x += h) {
    const double wgt = std::pow(x, shape - 1.0) * std::exp(-x) * std::pow(exposure * x, n) * std::exp(-exposure * x);
    num += x * wgt;
    den += wgt;
  }
  CHECK(num / den == doctest::Approx(post.gamma_shape[0] / post.gamma_rate).epsilon(1e-6));
}

TEST_CASE("split increments reconstruct the condensed process") {
  RngStream rng(3, 0);
  SUBCASE("single component: increment is independent Poisson((1-p) lambda / q)") {
    const FlowSpec spec{FlowVariant::cox_mixture, CellMeasure(w1, {1.0}), 1.0, {{1.0, CellMeasure(w1, {2.0})}}};
    const auto post = split_posterior(spec, 0.5, 0.4, PointConfig(w1, {{0.5, 7}}));
    std::vector<std::uint64_t> n;
    for (int i = 0; i < kN; ++i) n.push_back(sample_split_increment(spec, post, 0.5, 0.4, rng).total());
    CHECK(oracle::pearson_p(n, oracle::poisson_table(2.5, 60)) > kLevel);
  }
  SUBCASE("gamma flow: Y_s plus the forward increment is NB(rho, 1/(2 - t))") {
    const FlowSpec spec{FlowVariant::cox_mixture, CellMeasure(w1, {1.5}), 1.0, {}};
    std::vector<std::uint64_t> n;
    for (int i = 0; i < kN; ++i) {
      const auto ys = sample_condensation(spec, 1.0 - 0.3, rng);
      const auto inc = forward_increment(spec, 0.3, 0.7, ys, rng);
      n.push_back(ys.total() + inc.total());
    }
    CHECK(oracle::pearson_p(n, oracle::nb_table(1.5, 1.0 / (2.0 - 0.7), 400)) > kLevel);
  }
  SUBCASE("condensation levels") {
    const FlowSpec spec{FlowVariant::cox_mixture, CellMeasure(w1, {2.0}), 1.0, {}};
    std::vector<std::uint64_t> n;
    for (int i = 0; i < kN; ++i) n.push_back(sample_condensation(spec, 0.5, rng).total());
    CHECK(oracle::pearson_p(n, oracle::nb_table(2.0, 2.0 / 3.0, 400)) > kLevel);
    CHECK_THROWS_AS(sample_condensation(spec, 0.0, rng), ParameterError);
    CHECK_THROWS_AS(sample_condensation(spec_of(FlowVariant::poisson, 1.0), 0.5, rng), DomainError);
  }
}
