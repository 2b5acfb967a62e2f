#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

namespace polyaflow {

using Count = std::uint64_t;
using CountVector = std::vector<Count>;

/// Interval [lo, hi) split into `cells` equal-width half-open cells.
class Window {
 public:
  Window(double lo, double hi, std::size_t cells);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  std::size_t cells() const { return cells_; }
  double width() const { return hi_ - lo_; }

  double cell_lo(std::size_t i) const;
  double cell_hi(std::size_t i) const { return cell_lo(i + 1); }
  bool contains(double x) const { return x >= lo_ && x < hi_; }
  /// Index of the cell holding x. Throws ParameterError when x is outside [lo, hi).
  std::size_t cell_of(double x) const;

  friend bool operator==(const Window&, const Window&) = default;

 private:
  double lo_;
  double hi_;
  std::size_t cells_;
};

struct Atom {
  double location;
  Count multiplicity;

  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Finite integer-valued point measure on a window. Atoms are kept sorted by
/// location with strictly increasing locations and positive multiplicities.
class PointConfig {
 public:
  explicit PointConfig(Window window) : window_(window) {}
  /// Validates that `atoms` is already canonical.
  PointConfig(Window window, std::vector<Atom> atoms);
  /// Sorts and merges equal locations; drops zero multiplicities.
  static PointConfig from_unsorted(Window window, std::vector<Atom> atoms);

  const Window& window() const { return window_; }
  std::span<const Atom> atoms() const { return atoms_; }
  bool empty() const { return atoms_.empty(); }
  Count total() const;
  /// Multiplicity at an exact location (0 when absent).
  Count multiplicity_at(double location) const;

  friend bool operator==(const PointConfig&, const PointConfig&) = default;

 private:
  Window window_;
  std::vector<Atom> atoms_;
};

/// Nonnegative measure given by its mass on every cell of a window.
class CellMeasure {
 public:
  CellMeasure(Window window, std::vector<double> masses);
  static CellMeasure zero(Window window);

  const Window& window() const { return window_; }
  std::span<const double> masses() const { return masses_; }
  double mass(std::size_t i) const { return masses_.at(i); }
  double total() const;
  CellMeasure scaled(double factor) const;

  friend bool operator==(const CellMeasure&, const CellMeasure&) = default;

 private:
  Window window_;
  std::vector<double> masses_;
};

/// Nonnegative test function, constant on every cell.
class StepFunction {
 public:
  StepFunction(Window window, std::vector<double> values);
  static StepFunction constant(Window window, double value);

  const Window& window() const { return window_; }
  std::span<const double> values() const { return values_; }
  double operator()(double x) const { return values_[window_.cell_of(x)]; }

 private:
  Window window_;
  std::vector<double> values_;
};

/// a <= b in the pointwise order: b - a is again a point configuration.
bool config_leq(const PointConfig& a, const PointConfig& b);
/// Integral of f against the counting measure c.
double config_integrate(const PointConfig& c, const StepFunction& f);
CountVector cell_counts(const PointConfig& c);
/// Atomwise sum; equal locations merge.
PointConfig superpose(const PointConfig& a, const PointConfig& b);
/// b - a; requires config_leq(a, b).
PointConfig difference(const PointConfig& b, const PointConfig& a);
/// Integer-mass cell measure as a configuration: cell i with mass m gets m
/// unit atoms equally spaced at the midpoints of m sub-intervals.
PointConfig lattice_config(const CellMeasure& integer_masses);

void to_json(nlohmann::json& j, const Window& w);
void to_json(nlohmann::json& j, const PointConfig& c);
void to_json(nlohmann::json& j, const CellMeasure& m);
PointConfig point_config_from_json(const Window& window, const nlohmann::json& j);
CellMeasure cell_measure_from_json(const nlohmann::json& j);

}  // namespace polyaflow
