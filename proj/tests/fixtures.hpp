#pragma once

// Models shared by the test suites.  The JSON files in configs/ are the
// single source for the fixture parameters.

#include <cmath>
#include <filesystem>
#include <string>

#include "riskbounds/config.hpp"
#include "riskbounds/model.hpp"

namespace fixtures {

inline std::filesystem::path config_path(const std::string& name) {
  return std::filesystem::path(RISKBOUNDS_CONFIG_DIR) / (name + ".json");
}

inline riskbounds::ModelConfig config(const std::string& name) { return riskbounds::load_config(config_path(name)); }

inline riskbounds::ModelConfig black_scholes(double r = 0.05, double v = 0.2) {
  auto c = config("bs");
  c.parameters["r"] = r;
  c.parameters["v"] = v;
  if (r == 0.0) c.allow_zero_rate = true;
  return c;
}

inline riskbounds::ModelConfig brownian() {
  auto c = config("brownian");
  c.allow_zero_rate = true;
  return c;
}

inline riskbounds::ModelConfig inverse_bessel() {
  auto c = config("xsq");
  c.allow_zero_rate = true;
  return c;
}

inline const riskbounds::DiffusionModel& bs() {
  static const auto m = riskbounds::build_model(black_scholes());
  return m;
}

inline const riskbounds::DiffusionModel& bm() {
  static const auto m = riskbounds::build_model(brownian());
  return m;
}

inline const riskbounds::DiffusionModel& cir() {
  static const auto m = riskbounds::build_model(config("cir"));
  return m;
}

inline const riskbounds::DiffusionModel& xsq() {
  static const auto m = riskbounds::build_model(inverse_bessel());
  return m;
}

// Largest |a[i] - f(x[i])| over the base window.
template <class F>
double interior_error(const riskbounds::DiffusionModel& m, const std::vector<double>& a, F&& f) {
  double e = 0.0;
  for (std::size_t i = m.interior_begin(); i < m.interior_end(); ++i)
    e = std::max(e, std::fabs(a[i] - f(m.xs()[i])));
  return e;
}

}  // namespace fixtures
