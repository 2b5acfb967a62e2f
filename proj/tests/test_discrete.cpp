#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "polyaflow/discrete.hpp"
#include "polyaflow/errors.hpp"

using namespace polyaflow;

TEST_CASE("count box indexing is lexicographic") {
  const CountBox box{3, 4};
  CHECK(box.size() == 125);
  CHECK(box.index({0, 0, 1}) == 1);
  CHECK(box.index({1, 0, 0}) == 25);
  for (std::size_t k = 0; k < box.size(); ++k) CHECK(box.index(box.at(k)) == k);
  CHECK_FALSE(box.contains({5, 0, 0}));
  CHECK_THROWS_AS(box.index({0, 0, 5}), NumericError);
}

TEST_CASE("construction checks the truncation budget") {
  CHECK_THROWS_AS(DiscreteModel(ModelClock::polya, {1.0}, 10, 0.6), NumericError);
  CHECK_NOTHROW(DiscreteModel(ModelClock::polya, {1.0}, 60, 0.6));
  CHECK_THROWS_AS(DiscreteModel(ModelClock::polya, {}, 10, 0.5), ParameterError);
  CHECK_THROWS_AS(DiscreteModel(ModelClock::polya, {1, 1, 1, 1}, 10, 0.1), ParameterError);
  CHECK_THROWS_AS(DiscreteModel(ModelClock::polya, {1.0}, 60, 1.0), ParameterError);
  CHECK_NOTHROW(DiscreteModel(ModelClock::poisson, {1.0}, 60, 5.0));
}

TEST_CASE("marginals agree with recursive pmfs") {
  const DiscreteModel polya(ModelClock::polya, {1.3, 0.4}, 60, 0.5);
  const auto nb = oracle::nb_table(1.3, 0.5, 61);
  for (Count n = 0; n <= 60; ++n) CHECK(polya.cell_marginal_pmf(0, 0.5, n) == doctest::Approx(nb[n]).epsilon(1e-12));
  const DiscreteModel cond(ModelClock::condensation, {2.0}, 150, 0.7);
  const auto nbc = oracle::nb_table(2.0, 1.0 / 1.3, 151);
  for (Count n = 0; n <= 150; n += 7) CHECK(cond.cell_marginal_pmf(0, 0.7, n) == doctest::Approx(nbc[n]).epsilon(1e-11));
  const DiscreteModel pois(ModelClock::poisson, {1.5}, 60, 2.0);
  const auto pt = oracle::poisson_table(3.0, 61);
  for (Count n = 0; n <= 60; ++n) CHECK(pois.cell_marginal_pmf(0, 2.0, n) == doctest::Approx(pt[n]).epsilon(1e-12));
}

TEST_CASE("semigroup: identity, NB mean, Chapman-Kolmogorov") {
  const DiscreteModel m(ModelClock::polya, {1.0}, 80, 0.6);
  const CountFunction phi = [](const CountVector& n) { return std::exp(-0.4 * static_cast<double>(n[0])); };
  const auto id = semigroup_apply(m, 0.3, 0.3, phi);
  for (Count n = 0; n <= 80; ++n) CHECK(id({n}) == phi({n}));

  const auto mean = semigroup_apply(m, 0.0, 0.5, [](const CountVector& n) { return static_cast<double>(n[0]); });
  CHECK(std::abs(mean({0}) - 1.0) < 1e-9);

  // A wider box keeps the composed truncation loss negligible.
  const DiscreteModel wide(ModelClock::polya, {1.0}, 200, 0.6);
  const auto direct = semigroup_apply(wide, 0.1, 0.6, phi);
  const auto composed = semigroup_apply(wide, 0.1, 0.3, semigroup_apply(wide, 0.3, 0.6, phi));
  for (Count n = 0; n <= 20; ++n) {
    CAPTURE(n);
    REQUIRE(composed.missing_mass({n}) < 1e-12);
    CHECK(std::abs(direct({n}) - composed({n})) < 1e-9);
  }
  // NB generating function: E[e^{-0.4 (n + inc)}] with inc ~ NB(1 + n, z').
  const double zp = 0.5 / 0.9;
  for (Count n = 0; n <= 5; ++n) {
    const double exact = std::exp(-0.4 * n) * std::pow((1 - zp) / (1 - zp * std::exp(-0.4)), 1.0 + n);
    CHECK(std::abs(direct({n}) - exact) < 1e-10);
  }
  CHECK_THROWS_AS(semigroup_apply(m, 0.5, 0.3, phi), ParameterError);
  const auto tab = marginal_table(m, 0.3);
  CHECK_THROWS_AS(tab({81}), NumericError);
}

TEST_CASE("reduced Palm kernels") {
  const DiscreteModel m(ModelClock::polya, {1.2, 0.7}, 60, 0.5);
  const auto marg = marginal_table(m, 0.5);
  const auto p0 = reduced_palm_enumerate(m, 0.5, {0, 0});
  for (std::size_t k = 0; k < m.box().size(); ++k) CHECK(p0.values()[k] == marg.values()[k]);

  const auto p1 = reduced_palm_enumerate(m, 0.5, {1, 0});
  const auto shifted = oracle::nb_table(2.2, 0.5, 61);
  const auto other = oracle::nb_table(0.7, 0.5, 61);
  double worst = 0.0;
  for (std::size_t k = 0; k < m.box().size(); ++k) {
    const auto mu = m.box().at(k);
    worst = std::max(worst, std::abs(p1.values()[k] - shifted[mu[0]] * other[mu[1]]));
  }
  CHECK(worst < 1e-9);

  const DiscreteModel pm(ModelClock::poisson, {2.0}, 50, 1.0);
  const auto pp = reduced_palm_enumerate(pm, 1.0, {3});
  const auto pmarg = marginal_table(pm, 1.0);
  for (Count n = 0; n <= 40; ++n) CHECK(std::abs(pp({n}) - pmarg({n})) < 1e-12);

  const DiscreteModel degenerate(ModelClock::polya, {0.0, 1.0}, 60, 0.5);
  CHECK_THROWS_AS(reduced_palm_enumerate(degenerate, 0.5, {1, 0}), DomainError);
}

TEST_CASE("generator against the semigroup derivative") {
  const double s = 0.3;
  const CountFunction phi = [](const CountVector& n) { return 1.0 / (1.0 + static_cast<double>(n[0])); };
  for (auto clock : {ModelClock::condensation, ModelClock::polya, ModelClock::poisson}) {
    const DiscreteModel m(clock, {0.8}, 120, 0.31);
    const CountVector nu{1};
    const auto g = generator_apply(m, s, phi, nu);
    const double h = 1e-6;
    const double fd = (semigroup_apply(m, s, s + h, phi)(nu) - phi(nu)) / h;
    CHECK(std::abs(g.value - fd) < 1e-4 * std::abs(fd));
    if (clock == ModelClock::condensation) CHECK(g.verbatim == doctest::Approx(g.value).epsilon(1e-14));
    if (clock == ModelClock::polya) CHECK(g.verbatim / g.value == doctest::Approx(s).epsilon(1e-12));
  }
  const DiscreteModel m(ModelClock::polya, {0.8}, 120, 0.31);
  CHECK_THROWS_AS(generator_apply(m, 0.0, phi, {0}), ParameterError);
  const auto constant = generator_apply(m, s, [](const CountVector&) { return 2.0; }, {2});
  CHECK(constant.value == 0.0);

  const DiscreteModel degenerate(ModelClock::polya, {0.0, 1.0}, 60, 0.5);
  const auto g0 = generator_apply(degenerate, 0.4, [](const CountVector& n) { return static_cast<double>(n[0]); },
                                  {0, 0});
  CHECK(g0.value == 0.0);
}

TEST_CASE("duality of forward and backward kernels") {
  const CountFunction phi = [](const CountVector& n) { return n[0] <= 2 ? 1.0 : 0.0; };
  const CountFunction psi = [](const CountVector& n) { return n[0] == 1 ? 1.0 : 0.0; };
  for (auto clock : {ModelClock::polya, ModelClock::condensation, ModelClock::poisson}) {
    const DiscreteModel m(clock, {1.0}, 120, 0.6);
    const auto d = duality_exact(m, 0.3, 0.6, phi, psi);
    CHECK(std::abs(d.backward_side - d.forward_side) < 1e-12);
    CHECK(d.backward_side > 0.0);
  }
  // psi constant: both sides reduce to E phi(Y_t)
  const DiscreteModel m(ModelClock::polya, {1.0}, 120, 0.6);
  const auto d = duality_exact(m, 0.3, 0.6, phi, [](const CountVector&) { return 1.0; });
  const auto nb = oracle::nb_table(1.0, 0.6, 3);
  CHECK(std::abs(d.forward_side - (nb[0] + nb[1] + nb[2])) < 1e-12);
  CHECK(std::abs(d.backward_side - (nb[0] + nb[1] + nb[2])) < 1e-12);
}
