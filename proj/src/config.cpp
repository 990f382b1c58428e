#include "riskbounds/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "riskbounds/error.hpp"

namespace riskbounds {
namespace {

using nlohmann::json;

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items())
    if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

double number(const json& v, const std::string& what) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
  }
  throw ConfigError(what + " must be a number (or \"inf\" / \"-inf\")");
}

double finite(const json& v, const std::string& what) {
  const double d = number(v, what);
  if (!std::isfinite(d)) throw ConfigError(what + " must be finite");
  return d;
}

template <class T>
T integer(const json& v, const std::string& what) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) throw ConfigError(what + " must be an integer");
  return v.get<T>();
}

std::string text(const json& v, const std::string& what) {
  if (!v.is_string()) throw ConfigError(what + " must be a string");
  return v.get<std::string>();
}

std::pair<double, double> pair(const json& v, const std::string& what, bool allow_inf) {
  if (!v.is_array() || v.size() != 2) throw ConfigError(what + " must be a two-element array");
  if (allow_inf) return {number(v[0], what), number(v[1], what)};
  return {finite(v[0], what), finite(v[1], what)};
}

}  // namespace

ModelConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  only_keys(doc, "config", {"name", "parameters", "k", "sigma", "rate", "interval", "xi", "truncation", "grid",
                            "state_is_asset", "tolerances", "mc"});
  for (const char* key : {"k", "sigma", "rate", "interval", "xi", "truncation"})
    if (!doc.contains(key)) throw ConfigError(std::string("missing required key '") + key + "'");

  ModelConfig c;
  if (doc.contains("name")) c.name = text(doc["name"], "name");
  if (doc.contains("parameters")) {
    const json& p = doc["parameters"];
    if (!p.is_object()) throw ConfigError("parameters must be an object");
    for (const auto& [key, value] : p.items()) {
      if (key == "x") throw ConfigError("'x' is reserved for the state variable");
      c.parameters[key] = finite(value, "parameter " + key);
    }
  }
  c.k = text(doc["k"], "k");
  c.sigma = text(doc["sigma"], "sigma");
  c.rate = text(doc["rate"], "rate");
  std::tie(c.c, c.d) = pair(doc["interval"], "interval", true);
  c.xi = finite(doc["xi"], "xi");
  std::tie(c.x_min, c.x_max) = pair(doc["truncation"], "truncation", false);

  if (doc.contains("grid")) {
    const json& g = doc["grid"];
    only_keys(g, "grid", {"n_points", "spacing", "refinement_levels", "refinement_ratio"});
    if (g.contains("n_points")) c.grid.n_points = integer<int>(g["n_points"], "grid.n_points");
    if (g.contains("spacing")) {
      const auto s = text(g["spacing"], "grid.spacing");
      if (s == "uniform") c.grid.spacing = Spacing::Uniform;
      else if (s == "log" || s == "logarithmic") c.grid.spacing = Spacing::Logarithmic;
      else throw ConfigError("grid.spacing must be \"uniform\" or \"log\"");
    }
    if (g.contains("refinement_levels"))
      c.grid.refinement_levels = integer<int>(g["refinement_levels"], "grid.refinement_levels");
    if (g.contains("refinement_ratio"))
      c.grid.refinement_ratio = finite(g["refinement_ratio"], "grid.refinement_ratio");
  }
  if (doc.contains("state_is_asset")) {
    if (!doc["state_is_asset"].is_boolean()) throw ConfigError("state_is_asset must be true or false");
    c.state_is_asset = doc["state_is_asset"].get<bool>();
  }
  if (doc.contains("tolerances")) {
    const json& t = doc["tolerances"];
    only_keys(t, "tolerances", {"slope", "lambda", "ode_rel", "ode_abs"});
    if (t.contains("slope")) c.tolerances.slope = finite(t["slope"], "tolerances.slope");
    if (t.contains("lambda")) c.tolerances.lambda = finite(t["lambda"], "tolerances.lambda");
    if (t.contains("ode_rel")) c.tolerances.ode_rel = finite(t["ode_rel"], "tolerances.ode_rel");
    if (t.contains("ode_abs")) c.tolerances.ode_abs = finite(t["ode_abs"], "tolerances.ode_abs");
  }
  if (doc.contains("mc")) {
    const json& m = doc["mc"];
    only_keys(m, "mc", {"n_paths", "dt", "T", "seed"});
    if (m.contains("n_paths")) c.mc.n_paths = integer<std::int64_t>(m["n_paths"], "mc.n_paths");
    if (m.contains("dt")) c.mc.dt = finite(m["dt"], "mc.dt");
    if (m.contains("T")) c.mc.T = finite(m["T"], "mc.T");
    if (m.contains("seed")) c.mc.seed = integer<std::uint64_t>(m["seed"], "mc.seed");
  }
  return c;
}

ModelConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace riskbounds
