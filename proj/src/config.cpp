#include "polyaflow/config.hpp"

#include <charconv>
#include <cmath>
#include <set>

#include "polyaflow/errors.hpp"
#include "polyaflow/flows.hpp"
#include "polyaflow/suites.hpp"

namespace polyaflow {

namespace {

using nlohmann::json;

void unknown_keys(const json& j, const std::set<std::string>& allowed, const std::string& where,
                  std::vector<std::string>& out) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) out.push_back(where + key + ": unknown key");
  }
}

std::optional<double> real_field(const json& j, const char* key, const std::string& where,
                                 std::vector<std::string>& out) {
  if (!j.contains(key)) return std::nullopt;
  if (!j[key].is_number()) {
    out.push_back(where + key + ": must be a number");
    return std::nullopt;
  }
  return j[key].get<double>();
}

std::optional<std::vector<double>> real_list(const json& j, const char* key, const std::string& where,
                                             std::vector<std::string>& out) {
  if (!j.contains(key)) return std::nullopt;
  const auto& v = j[key];
  bool ok = v.is_array();
  if (ok) {
    for (const auto& x : v) ok = ok && x.is_number();
  }
  if (!ok) {
    out.push_back(where + key + ": must be a list of numbers");
    return std::nullopt;
  }
  return v.get<std::vector<double>>();
}

std::optional<std::uint64_t> unsigned_field(const json& j, const char* key, std::vector<std::string>& out) {
  if (!j.contains(key)) return std::nullopt;
  const auto& v = j[key];
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  if (v.is_number_integer()) {
    out.push_back(std::string(key) + ": must be >= 0 (got " + v.dump() + ")");
  } else {
    out.push_back(std::string(key) + ": must be a nonnegative integer");
  }
  return std::nullopt;
}

std::optional<CellMeasure> masses_field(const Window& w, const json& j, const std::string& where,
                                        std::vector<std::string>& out) {
  const auto m = real_list(j, "masses", where, out);
  if (!m) {
    if (!j.contains("masses")) out.push_back(where + "masses: required");
    return std::nullopt;
  }
  if (m->size() != w.cells()) {
    out.push_back(where + "masses: " + std::to_string(m->size()) + " entries, window has " +
                  std::to_string(w.cells()) + " cells");
    return std::nullopt;
  }
  for (double x : *m) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      out.push_back(where + "masses: entries must be finite and nonnegative");
      return std::nullopt;
    }
  }
  return CellMeasure(w, *m);
}

}  // namespace

FlowSpec flow_spec_from_json(const json& j, std::vector<std::string>& out) {
  const std::size_t before = out.size();
  if (!j.is_object()) {
    out.push_back("flow: must be an object");
    throw ParameterError("flow: must be an object");
  }
  unknown_keys(j, {"variant", "lo", "hi", "masses", "z", "mixture"}, "flow.", out);
  FlowVariant variant = FlowVariant::polya_sum;
  if (j.contains("variant")) {
    try {
      variant = flow_variant_from_string(j["variant"].get<std::string>());
    } catch (const std::exception&) {
      out.push_back("flow.variant: must be one of polya_sum, poisson, polya_difference, cox_mixture");
    }
  }
  const double lo = real_field(j, "lo", "flow.", out).value_or(0.0);
  const double hi = real_field(j, "hi", "flow.", out).value_or(1.0);
  std::size_t cells = 1;
  if (j.contains("masses") && j["masses"].is_array()) cells = std::max<std::size_t>(1, j["masses"].size());
  std::optional<Window> window;
  try {
    window.emplace(lo, hi, cells);
  } catch (const std::exception& e) {
    out.push_back(std::string("flow.lo/hi: ") + e.what());
  }
  const double z = real_field(j, "z", "flow.", out).value_or(1.0);
  std::optional<CellMeasure> rho;
  if (window) rho = masses_field(*window, j, "flow.", out);

  std::vector<MixtureComponent> mixture;
  if (j.contains("mixture")) {
    if (!j["mixture"].is_array()) {
      out.push_back("flow.mixture: must be a list of {weight, masses}");
    } else {
      for (std::size_t k = 0; k < j["mixture"].size(); ++k) {
        const auto& c = j["mixture"][k];
        const std::string where = "flow.mixture[" + std::to_string(k) + "].";
        if (!c.is_object()) {
          out.push_back(where + ": must be an object");
          continue;
        }
        unknown_keys(c, {"weight", "masses"}, where, out);
        const auto w = real_field(c, "weight", where, out);
        if (!w) out.push_back(where + "weight: required");
        std::optional<CellMeasure> m;
        if (window) m = masses_field(*window, c, where, out);
        if (w && m) mixture.push_back({*w, *m});
      }
    }
    if (variant != FlowVariant::cox_mixture) out.push_back("flow.mixture: only allowed for cox_mixture");
  }
  if (out.size() > before || !rho) throw ParameterError("flow: invalid");
  FlowSpec spec{variant, *rho, z, std::move(mixture)};
  for (auto& v : spec.violations()) out.push_back(std::move(v));
  if (out.size() > before) throw ParameterError("flow: invalid");
  return spec;
}

json to_json(const FlowSpec& spec) {
  json j{{"variant", to_string(spec.variant)},
         {"lo", spec.rho.window().lo()},
         {"hi", spec.rho.window().hi()},
         {"masses", std::vector<double>(spec.rho.masses().begin(), spec.rho.masses().end())},
         {"z", spec.z}};
  if (!spec.mixture.empty()) {
    json mix = json::array();
    for (const auto& c : spec.mixture) {
      mix.push_back({{"weight", c.weight},
                     {"masses", std::vector<double>(c.intensity.masses().begin(), c.intensity.masses().end())}});
    }
    j["mixture"] = std::move(mix);
  }
  return j;
}

ConfigParse parse_config(const json& j) {
  ConfigParse res;
  auto& out = res.violations;
  auto& c = res.config;
  if (!j.is_object()) {
    out.push_back("config: top level must be an object");
    return res;
  }
  unknown_keys(j, {"flow", "grid", "replicas", "seed", "suites", "output_dir", "threads", "path_samples"}, "",
               out);
  if (!j.contains("flow")) {
    out.push_back("flow: required");
  } else {
    try {
      c.flow = flow_spec_from_json(j["flow"], out);
    } catch (const ParameterError&) {
      // violations already recorded
    }
  }
  if (auto g = real_list(j, "grid", "", out)) c.grid = *g;
  if (j.contains("replicas")) {
    if (auto r = unsigned_field(j, "replicas", out)) c.replicas = static_cast<std::size_t>(*r);
  }
  if (auto s = unsigned_field(j, "seed", out)) c.seed = *s;
  if (j.contains("suites")) {
    if (!j["suites"].is_array()) {
      out.push_back("suites: must be a list of suite names");
    } else {
      for (const auto& s : j["suites"]) {
        if (s.is_string()) {
          c.suites.push_back(s.get<std::string>());
        } else {
          out.push_back("suites: entries must be strings");
        }
      }
    }
  }
  if (j.contains("output_dir")) {
    if (j["output_dir"].is_string()) {
      c.output_dir = j["output_dir"].get<std::string>();
    } else {
      out.push_back("output_dir: must be a string");
    }
  }
  if (auto t = unsigned_field(j, "threads", out)) c.threads = static_cast<std::size_t>(*t);
  if (auto p = unsigned_field(j, "path_samples", out)) c.path_samples = static_cast<std::size_t>(*p);
  for (auto& v : validate_config(c)) out.push_back(std::move(v));
  return res;
}

ConfigParse parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    ConfigParse res;
    res.violations.push_back(std::string("config: not valid JSON (") + e.what() + ")");
    return res;
  }
  return parse_config(j);
}

std::vector<std::string> validate_config(const ExperimentConfig& c) {
  std::vector<std::string> out;
  if (c.replicas && *c.replicas < 1) {
    out.push_back("replicas: must be >= 1 (got " + std::to_string(*c.replicas) + ")");
  }
  if (c.flow) {
    try {
      check_grid(*c.flow, c.grid);
    } catch (const ParameterError& e) {
      out.push_back(std::string("grid: ") + e.what());
    }
  }
  for (const auto& s : c.suites) {
    if (!find_suite(s)) out.push_back("suites: unknown suite '" + s + "' (see list-suites)");
  }
  if (c.output_dir.empty()) out.push_back("output_dir: must not be empty");
  return out;
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const char* env_value, std::uint64_t config_seed) {
  if (flag) return *flag;
  if (env_value && *env_value) {
    const std::string s(env_value);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw ParameterError("POLYAFLOW_SEED: not an unsigned 64-bit integer: '" + s + "'");
    }
    return v;
  }
  return config_seed;
}

}  // namespace polyaflow
