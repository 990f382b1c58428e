#include "riskbounds/analysis.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "riskbounds/error.hpp"

namespace riskbounds {
namespace {

using nlohmann::json;

void log(const char* fmt, auto... args) {
  std::fprintf(stderr, "[riskbounds] ");
  std::fprintf(stderr, fmt, args...);
  std::fputc('\n', stderr);
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json opt(const std::optional<double>& v) { return v ? num(*v) : json(nullptr); }

json to_json(const CandidateInterval& c) {
  return {{"lambda", c.lambda},         {"slope_min", num(c.slope_min)}, {"slope_max", num(c.slope_max)},
          {"empty", c.empty},           {"singleton", c.singleton},      {"trend_min", c.trend_min},
          {"trend_max", c.trend_max}};
}

json to_json(const FellerResult& f) {
  json seq = json::array();
  for (double v : f.log_integrals) seq.push_back(num(v));
  return {{"verdict", to_string(f.verdict)}, {"log_integrals", seq}};
}

json to_json(const AdmissibilityReport& a) {
  json j = {{"lambda", a.lambda},
            {"slope0", a.slope0},
            {"admissible", a.admissible},
            {"left_explosion", to_string(a.left_explosion)},
            {"right_explosion", to_string(a.right_explosion)},
            {"feller_left", to_json(a.left)},
            {"feller_right", to_json(a.right)}};
  if (a.mc_cross_check) j["mc_cross_check"] = {{"mean", a.mc_cross_check->mean}, {"std_error", a.mc_cross_check->std_error}};
  return j;
}

std::string csv_name(Variant v) { return std::string("bounds_") + to_string(v) + ".csv"; }

// Runs one stage; unresolved outcomes and numerical failures become warnings.
template <class F>
bool stage(AnalysisReport& rep, const char* name, F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    f();
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    log("%s done in %.0f ms", name, ms);
    return true;
  } catch (const ConfigError&) {
    throw;
  } catch (const UnresolvedError& e) {
    rep.warnings.push_back(std::string(name) + ": unresolved: " + e.what());
  } catch (const EmptyCandidateSet& e) {
    rep.warnings.push_back(std::string(name) + ": empty candidate set: " + e.what());
  } catch (const Error& e) {
    rep.warnings.push_back(std::string(name) + ": " + e.what());
  }
  rep.unresolved = true;
  log("%s failed: %s", name, rep.warnings.back().c_str());
  return false;
}

}  // namespace

ModelConfig apply_flags(ModelConfig c, const AnalysisFlags& flags) {
  if (flags.seed) c.mc.seed = *flags.seed;
  if (flags.allow_zero_rate) c.allow_zero_rate = true;
  if (flags.grid_points) c.grid.n_points = *flags.grid_points;
  if (flags.refinement_levels) c.grid.refinement_levels = *flags.refinement_levels;
  return c;
}

AnalysisReport run_analysis(const std::filesystem::path& path, const AnalysisFlags& flags) {
  return run_analysis(load_config(path), flags);
}

AnalysisReport run_analysis(const ModelConfig& config, const AnalysisFlags& flags) {
  const DiffusionModel model = build_model(apply_flags(config, flags));
  AnalysisReport rep;
  rep.name = model.name();
  log("model '%s': %zu grid points, %d refinement levels", rep.name.c_str(), model.size(), model.levels());

  stage(rep, "candidate set at lambda=0", [&] { rep.candidate_sets.push_back(candidate_interval(model, 0.0)); });
  stage(rep, "critical eigenvalue", [&] { rep.beta = beta_bar(model); });
  if (rep.beta) {
    log("beta_bar = %.10g (bracket %.3g)", rep.beta->beta_bar, rep.beta->bracket_width);
    if (!rep.beta->existence_at_top)
      rep.warnings.push_back("candidate set at beta_bar is empty at full slope tolerance");
    stage(rep, "candidate set at beta_bar",
          [&] { rep.candidate_sets.push_back(candidate_interval(model, rep.beta->beta_bar)); });
  }

  std::vector<double> lambdas{0.0};
  if (rep.beta) lambdas.push_back(rep.beta->beta_bar);
  for (double lambda : lambdas) {
    for (Extremal which : {Extremal::Min, Extremal::Max}) {
      char label[64];
      std::snprintf(label, sizeof label, "(%.10g, %s)", lambda, which == Extremal::Max ? "H" : "h");
      stage(rep, "admissibility", [&] {
        const auto p = extremal_solution(model, lambda, which);
        rep.admissibility.emplace_back(label, is_admissible(model, lambda, p));
      });
    }
  }

  if (rep.beta) {
    stage(rep, "thresholds", [&] { rep.thresholds = compute_thresholds(model, rep.beta->beta_bar); });
    rep.notes.push_back("ell and L are scan infima, treated as attained at the reported value (resolution " +
                        std::to_string(rep.thresholds ? rep.thresholds->scan_resolution : 0.0) + ")");
  }

  BoundInputs inputs;
  if (rep.beta) inputs.beta_bar = rep.beta->beta_bar;
  if (rep.thresholds) inputs.thresholds = *rep.thresholds;
  for (Variant v : kAllVariants) {
    if (flags.variant && *flags.variant != v) continue;
    if (v != Variant::Rough && !rep.beta) continue;
    stage(rep, to_string(v), [&] {
      BoundCurve c = theta_bounds(model, v, inputs);
      if (model.state_is_asset()) c = return_bounds(model, std::move(c));
      rep.curves.push_back(std::move(c));
    });
  }
  if (auto note = closed_form_note(model)) rep.notes.push_back(*note);

  if (flags.monte_carlo) {
    const McSettings& mc = model.config().mc;
    stage(rep, "monte carlo", [&] {
      const PathBundle bundle = simulate(model, std::nullopt, mc.T, mc.n_paths, mc.dt, mc.seed);
      if (bundle.warning()) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.1f%% of Monte Carlo paths were absorbed", 100 * bundle.absorbed_fraction());
        rep.warnings.push_back(buf);
      }
      for (Extremal which : {Extremal::Max, Extremal::Min}) {
        const auto p = extremal_solution(model, 0.0, which);
        const char* pair = which == Extremal::Max ? "(0, H)" : "(0, h)";
        if (model.levels() > 0) {
          const auto coarse = extremal_solution(model, 0.0, which, model.levels() - 1);
          rep.monte_carlo.push_back({pair, martingale_check(model, 0.0, p, coarse, bundle)});
        } else {
          rep.monte_carlo.push_back({pair, martingale_check(model, 0.0, p, bundle)});
        }
      }
    });
  }
  return rep;
}

std::string AnalysisReport::to_json() const {
  json j;
  j["name"] = name;
  j["status"] = unresolved ? "partial" : "complete";
  if (beta)
    j["beta_bar"] = {{"value", beta->beta_bar},
                     {"bracket_width", beta->bracket_width},
                     {"existence_at_top", beta->existence_at_top}};
  else
    j["beta_bar"] = nullptr;
  if (thresholds) {
    j["ell"] = opt(thresholds->ell);
    j["L_cap"] = opt(thresholds->L_cap);
    j["scan_resolution"] = thresholds->scan_resolution;
  } else {
    j["ell"] = j["L_cap"] = nullptr;
  }
  j["candidate_sets"] = json::array();
  for (const auto& c : candidate_sets) j["candidate_sets"].push_back(riskbounds::to_json(c));
  j["admissibility"] = json::array();
  for (const auto& [label, a] : admissibility) {
    json e = riskbounds::to_json(a);
    e["pair"] = label;
    j["admissibility"].push_back(e);
  }
  j["curves"] = json::array();
  for (const auto& c : curves)
    j["curves"].push_back({{"variant", to_string(c.variant)},
                           {"file", csv_name(c.variant)},
                           {"points", c.xs.size()},
                           {"has_mu", !c.mu_lower.empty()},
                           {"lower", {{"lambda", c.provenance.lambda_lower}, {"slope", c.provenance.slope_lower}}},
                           {"upper", {{"lambda", c.provenance.lambda_upper}, {"slope", c.provenance.slope_upper}}}});
  j["monte_carlo"] = json::array();
  for (const auto& m : monte_carlo)
    j["monte_carlo"].push_back({{"pair", m.pair},
                                {"mean", num(m.check.mean)},
                                {"std_error", num(m.check.std_error)},
                                {"systematic", num(m.check.systematic)},
                                {"z_score", num(m.check.z_score)},
                                {"absorbed_fraction", m.check.absorbed_fraction}});
  j["warnings"] = warnings;
  j["notes"] = notes;
  return j.dump(2) + "\n";
}

std::string curve_csv(const BoundCurve& c) {
  std::string out = "x,theta_lower,theta_upper,mu_lower,mu_upper,variant\n";
  const bool mu = !c.mu_lower.empty();
  char buf[160];
  for (std::size_t i = 0; i < c.xs.size(); ++i) {
    if (mu)
      std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,", c.xs[i], c.theta_lower[i], c.theta_upper[i],
                    c.mu_lower[i], c.mu_upper[i]);
    else
      std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,,,", c.xs[i], c.theta_lower[i], c.theta_upper[i]);
    out += buf;
    out += to_string(c.variant);
    out += '\n';
  }
  return out;
}

void write_outputs(const AnalysisReport& report, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto write = [&](const std::filesystem::path& p, const std::string& body) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("cannot write " + p.string());
    f << body;
  };
  write(out_dir / "report.json", report.to_json());
  for (const auto& c : report.curves) write(out_dir / csv_name(c.variant), curve_csv(c));
}

}  // namespace riskbounds
