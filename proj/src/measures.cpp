#include "polyaflow/measures.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "polyaflow/errors.hpp"

namespace polyaflow {

namespace {

void require_same_window(const Window& a, const Window& b, const char* op) {
  if (!(a == b)) {
    throw ParameterError(std::string(op) + ": window mismatch");
  }
}

}  // namespace

Window::Window(double lo, double hi, std::size_t cells) : lo_(lo), hi_(hi), cells_(cells) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    throw ParameterError("Window: need finite lo < hi");
  }
  if (cells == 0) {
    throw ParameterError("Window: need at least one cell");
  }
}

double Window::cell_lo(std::size_t i) const {
  if (i >= cells_) return hi_;
  return lo_ + static_cast<double>(i) * (hi_ - lo_) / static_cast<double>(cells_);
}

std::size_t Window::cell_of(double x) const {
  if (!contains(x)) {
    std::ostringstream msg;
    msg << "Window: location " << x << " outside [" << lo_ << ", " << hi_ << ")";
    throw ParameterError(msg.str());
  }
  auto k = static_cast<std::size_t>(std::floor((x - lo_) / (hi_ - lo_) * static_cast<double>(cells_)));
  k = std::min(k, cells_ - 1);
  // The floor above can land one cell off near a boundary; the boundaries are
  // defined by cell_lo, so settle against those.
  while (k > 0 && x < cell_lo(k)) --k;
  while (k + 1 < cells_ && x >= cell_lo(k + 1)) ++k;
  return k;
}

PointConfig::PointConfig(Window window, std::vector<Atom> atoms)
    : window_(window), atoms_(std::move(atoms)) {
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (!window_.contains(atoms_[i].location)) {
      throw ParameterError("PointConfig: atom outside window");
    }
    if (atoms_[i].multiplicity == 0) {
      throw ParameterError("PointConfig: zero multiplicity");
    }
    if (i > 0 && !(atoms_[i - 1].location < atoms_[i].location)) {
      throw ParameterError("PointConfig: locations must be strictly increasing");
    }
  }
}

PointConfig PointConfig::from_unsorted(Window window, std::vector<Atom> atoms) {
  std::erase_if(atoms, [](const Atom& a) { return a.multiplicity == 0; });
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.location < b.location; });
  std::vector<Atom> merged;
  merged.reserve(atoms.size());
  for (const auto& a : atoms) {
    if (!merged.empty() && merged.back().location == a.location) {
      merged.back().multiplicity += a.multiplicity;
    } else {
      merged.push_back(a);
    }
  }
  return PointConfig(window, std::move(merged));
}

Count PointConfig::total() const {
  Count n = 0;
  for (const auto& a : atoms_) n += a.multiplicity;
  return n;
}

Count PointConfig::multiplicity_at(double location) const {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), location,
                             [](const Atom& a, double x) { return a.location < x; });
  return (it != atoms_.end() && it->location == location) ? it->multiplicity : 0;
}

CellMeasure::CellMeasure(Window window, std::vector<double> masses)
    : window_(window), masses_(std::move(masses)) {
  if (masses_.size() != window_.cells()) {
    throw ParameterError("CellMeasure: one mass per cell required");
  }
  for (double m : masses_) {
    if (!std::isfinite(m) || m < 0.0) {
      throw ParameterError("CellMeasure: masses must be finite and nonnegative");
    }
  }
}

CellMeasure CellMeasure::zero(Window window) {
  return CellMeasure(window, std::vector<double>(window.cells(), 0.0));
}

double CellMeasure::total() const {
  double s = 0.0;
  for (double m : masses_) s += m;
  return s;
}

CellMeasure CellMeasure::scaled(double factor) const {
  if (!std::isfinite(factor) || factor < 0.0) {
    throw ParameterError("CellMeasure::scaled: factor must be finite and nonnegative");
  }
  std::vector<double> out(masses_);
  for (double& m : out) m *= factor;
  return CellMeasure(window_, std::move(out));
}

StepFunction::StepFunction(Window window, std::vector<double> values)
    : window_(window), values_(std::move(values)) {
  if (values_.size() != window_.cells()) {
    throw ParameterError("StepFunction: one value per cell required");
  }
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ParameterError("StepFunction: values must be finite and nonnegative");
    }
  }
}

StepFunction StepFunction::constant(Window window, double value) {
  return StepFunction(window, std::vector<double>(window.cells(), value));
}

bool config_leq(const PointConfig& a, const PointConfig& b) {
  require_same_window(a.window(), b.window(), "config_leq");
  auto ia = a.atoms().begin();
  auto ib = b.atoms().begin();
  while (ia != a.atoms().end()) {
    while (ib != b.atoms().end() && ib->location < ia->location) ++ib;
    if (ib == b.atoms().end() || ib->location != ia->location ||
        ib->multiplicity < ia->multiplicity) {
      return false;
    }
    ++ia;
  }
  return true;
}

double config_integrate(const PointConfig& c, const StepFunction& f) {
  require_same_window(c.window(), f.window(), "config_integrate");
  double s = 0.0;
  for (const auto& a : c.atoms()) s += static_cast<double>(a.multiplicity) * f(a.location);
  return s;
}

CountVector cell_counts(const PointConfig& c) {
  CountVector counts(c.window().cells(), 0);
  for (const auto& a : c.atoms()) counts[c.window().cell_of(a.location)] += a.multiplicity;
  return counts;
}

PointConfig superpose(const PointConfig& a, const PointConfig& b) {
  require_same_window(a.window(), b.window(), "superpose");
  std::vector<Atom> out;
  out.reserve(a.atoms().size() + b.atoms().size());
  auto ia = a.atoms().begin();
  auto ib = b.atoms().begin();
  while (ia != a.atoms().end() || ib != b.atoms().end()) {
    if (ib == b.atoms().end() || (ia != a.atoms().end() && ia->location < ib->location)) {
      out.push_back(*ia++);
    } else if (ia == a.atoms().end() || ib->location < ia->location) {
      out.push_back(*ib++);
    } else {
      out.push_back({ia->location, ia->multiplicity + ib->multiplicity});
      ++ia;
      ++ib;
    }
  }
  return PointConfig(a.window(), std::move(out));
}

PointConfig difference(const PointConfig& b, const PointConfig& a) {
  if (!config_leq(a, b)) {
    throw DomainError("difference: subtrahend is not dominated");
  }
  std::vector<Atom> out;
  out.reserve(b.atoms().size());
  auto ia = a.atoms().begin();
  for (const auto& atom : b.atoms()) {
    Count m = atom.multiplicity;
    if (ia != a.atoms().end() && ia->location == atom.location) {
      m -= ia->multiplicity;
      ++ia;
    }
    if (m > 0) out.push_back({atom.location, m});
  }
  return PointConfig(b.window(), std::move(out));
}

PointConfig lattice_config(const CellMeasure& integer_masses) {
  const auto& w = integer_masses.window();
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < w.cells(); ++i) {
    const double m = integer_masses.mass(i);
    if (m != std::floor(m)) {
      throw ParameterError("lattice_config: masses must be integers");
    }
    const auto n = static_cast<Count>(m);
    const double lo = w.cell_lo(i);
    const double step = (w.cell_hi(i) - lo) / static_cast<double>(n ? n : 1);
    for (Count k = 0; k < n; ++k) {
      atoms.push_back({lo + (static_cast<double>(k) + 0.5) * step, 1});
    }
  }
  return PointConfig(w, std::move(atoms));
}

void to_json(nlohmann::json& j, const Window& w) {
  j = nlohmann::json{{"lo", w.lo()}, {"hi", w.hi()}, {"cells", w.cells()}};
}

void to_json(nlohmann::json& j, const PointConfig& c) {
  auto atoms = nlohmann::json::array();
  for (const auto& a : c.atoms()) atoms.push_back(nlohmann::json::array({a.location, a.multiplicity}));
  j = nlohmann::json{{"atoms", std::move(atoms)}};
}

void to_json(nlohmann::json& j, const CellMeasure& m) {
  j = nlohmann::json{{"lo", m.window().lo()},
                     {"hi", m.window().hi()},
                     {"masses", std::vector<double>(m.masses().begin(), m.masses().end())}};
}

PointConfig point_config_from_json(const Window& window, const nlohmann::json& j) {
  try {
    std::vector<Atom> atoms;
    for (const auto& a : j.at("atoms")) {
      if (!a.is_array() || a.size() != 2) throw ParameterError("atom must be [location, multiplicity]");
      atoms.push_back({a[0].get<double>(), a[1].get<Count>()});
    }
    return PointConfig(window, std::move(atoms));
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("PointConfig JSON: ") + e.what());
  }
}

CellMeasure cell_measure_from_json(const nlohmann::json& j) {
  try {
    auto masses = j.at("masses").get<std::vector<double>>();
    Window w(j.at("lo").get<double>(), j.at("hi").get<double>(), masses.size());
    return CellMeasure(w, std::move(masses));
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("CellMeasure JSON: ") + e.what());
  }
}

}  // namespace polyaflow
