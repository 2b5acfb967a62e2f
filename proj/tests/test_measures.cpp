#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "polyaflow/errors.hpp"
#include "polyaflow/measures.hpp"

using namespace polyaflow;

namespace {

const Window w4(0.0, 4.0, 4);

// Random configuration on a coarse lattice so that equal locations collide often.
PointConfig random_config(std::mt19937_64& gen) {
  std::uniform_int_distribution<int> slot(0, 15);
  std::uniform_int_distribution<int> mult(0, 3);
  std::vector<Atom> atoms;
  for (int k = 0; k < 6; ++k) atoms.push_back({slot(gen) * 0.25, static_cast<Count>(mult(gen))});
  return PointConfig::from_unsorted(w4, atoms);
}

}  // namespace

TEST_CASE("window cells are half-open and cover [lo, hi)") {
  const Window w(-1.0, 2.0, 3);
  CHECK(w.cell_of(-1.0) == 0);
  CHECK(w.cell_of(-0.0001) == 0);
  CHECK(w.cell_of(0.0) == 1);
  CHECK(w.cell_of(1.9999) == 2);
  CHECK_THROWS_AS(w.cell_of(2.0), ParameterError);
  CHECK_THROWS_AS(w.cell_of(-1.5), ParameterError);
  CHECK(w.cell_lo(1) == doctest::Approx(0.0));
  CHECK(w.cell_hi(2) == doctest::Approx(2.0));
  CHECK_THROWS_AS(Window(1.0, 1.0, 1), ParameterError);
  CHECK_THROWS_AS(Window(0.0, 1.0, 0), ParameterError);
}

TEST_CASE("point configurations are canonical") {
  CHECK_THROWS_AS(PointConfig(w4, {{1.0, 1}, {0.5, 1}}), ParameterError);
  CHECK_THROWS_AS(PointConfig(w4, {{1.0, 0}}), ParameterError);
  CHECK_THROWS_AS(PointConfig(w4, {{4.0, 1}}), ParameterError);
  const auto c = PointConfig::from_unsorted(w4, {{2.5, 1}, {0.5, 2}, {2.5, 3}, {1.0, 0}});
  REQUIRE(c.atoms().size() == 2);
  CHECK(c.atoms()[0] == Atom{0.5, 2});
  CHECK(c.atoms()[1] == Atom{2.5, 4});
  CHECK(c.total() == 6);
  CHECK(c.multiplicity_at(2.5) == 4);
  CHECK(c.multiplicity_at(2.4) == 0);
  CHECK(cell_counts(c) == CountVector{2, 0, 4, 0});
}

TEST_CASE("empty configuration") {
  const PointConfig e(w4);
  CHECK(e.empty());
  CHECK(e.total() == 0);
  CHECK(cell_counts(e) == CountVector{0, 0, 0, 0});
  CHECK(config_leq(e, e));
}

TEST_CASE("config_leq is a partial order") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 300; ++trial) {
    const auto a = random_config(gen);
    const auto b = random_config(gen);
    const auto c = random_config(gen);
    CHECK(config_leq(a, a));
    if (config_leq(a, b) && config_leq(b, a)) CHECK(a == b);
    if (config_leq(a, b) && config_leq(b, c)) CHECK(config_leq(a, c));
    const auto s = superpose(a, b);
    CHECK(config_leq(a, s));
    CHECK(config_leq(b, s));
    CHECK(difference(s, a) == b);
    CHECK(s.total() == a.total() + b.total());
  }
}

TEST_CASE("difference requires domination") {
  const PointConfig a(w4, {{1.0, 2}});
  const PointConfig b(w4, {{1.0, 1}, {2.0, 5}});
  CHECK_FALSE(config_leq(a, b));
  CHECK_THROWS_AS(difference(b, a), DomainError);
  const PointConfig other(Window(0.0, 1.0, 1));
  CHECK_THROWS_AS(superpose(a, other), ParameterError);
}

TEST_CASE("integration against step functions is additive") {
  const StepFunction f(w4, {0.5, 1.0, 2.0, 0.0});
  const PointConfig a(w4, {{0.1, 2}, {2.2, 1}});
  const PointConfig b(w4, {{1.5, 3}, {3.9, 7}});
  CHECK(config_integrate(a, f) == doctest::Approx(1.0 + 2.0));
  CHECK(config_integrate(superpose(a, b), f) == doctest::Approx(config_integrate(a, f) + config_integrate(b, f)));
  CHECK(config_integrate(a, StepFunction::constant(w4, 0.0)) == 0.0);
  CHECK_THROWS_AS(StepFunction(w4, {1.0}), ParameterError);
  CHECK_THROWS_AS(StepFunction(w4, {1.0, -1.0, 0.0, 0.0}), ParameterError);
}

TEST_CASE("cell measures") {
  const CellMeasure m(w4, {1.0, 0.0, 2.5, 0.5});
  CHECK(m.total() == doctest::Approx(4.0));
  CHECK(m.scaled(2.0).mass(2) == doctest::Approx(5.0));
  CHECK(CellMeasure::zero(w4).total() == 0.0);
  CHECK_THROWS_AS(CellMeasure(w4, {1.0, 2.0}), ParameterError);
  CHECK_THROWS_AS(CellMeasure(w4, {1.0, 2.0, -0.1, 0.0}), ParameterError);
}

TEST_CASE("lattice configuration of integer masses") {
  const CellMeasure m(w4, {2.0, 0.0, 1.0, 3.0});
  const auto c = lattice_config(m);
  CHECK(cell_counts(c) == CountVector{2, 0, 1, 3});
  for (const auto& a : c.atoms()) CHECK(a.multiplicity == 1);
  CHECK(c.multiplicity_at(0.25) == 1);
  CHECK(c.multiplicity_at(2.5) == 1);
  CHECK_THROWS_AS(lattice_config(CellMeasure(w4, {0.5, 0.0, 0.0, 0.0})), ParameterError);
}

TEST_CASE("json round trip") {
  const PointConfig c(w4, {{0.25, 2}, {3.5, 1}});
  const nlohmann::json j = c;
  CHECK(j.dump() == R"({"atoms":[[0.25,2],[3.5,1]]})");
  CHECK(point_config_from_json(w4, j) == c);
  const CellMeasure m(w4, {1.0, 2.0, 3.0, 4.0});
  const nlohmann::json jm = m;
  CHECK(cell_measure_from_json(jm) == m);
  CHECK_THROWS_AS(point_config_from_json(w4, nlohmann::json::parse(R"({"atoms":[[0.5]]})")), ParameterError);
}
