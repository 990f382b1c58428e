#pragma once

// End-to-end pipeline: model -> beta_bar -> extremal solutions -> thresholds
// -> bound curves -> optional Monte Carlo checks, and the files it writes.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "riskbounds/admissibility.hpp"
#include "riskbounds/bounds.hpp"
#include "riskbounds/config.hpp"
#include "riskbounds/mcverify.hpp"
#include "riskbounds/spectral.hpp"

namespace riskbounds {

struct AnalysisFlags {
  std::optional<Variant> variant;   // nullopt: all four
  bool monte_carlo = false;
  std::optional<std::uint64_t> seed;
  bool allow_zero_rate = false;
  std::optional<int> grid_points;
  std::optional<int> refinement_levels;
};

struct NamedCheck {
  std::string pair;   // e.g. "(0, H)"
  MartingaleCheck check;
};

struct AnalysisReport {
  std::string name;
  std::optional<CriticalEigenvalue> beta;
  std::optional<Thresholds> thresholds;
  std::vector<CandidateInterval> candidate_sets;
  std::vector<std::pair<std::string, AdmissibilityReport>> admissibility;
  std::vector<BoundCurve> curves;
  std::vector<NamedCheck> monte_carlo;
  std::vector<std::string> warnings;
  std::vector<std::string> notes;
  bool unresolved = false;   // some verdict could not be reached

  std::string to_json() const;
};

// Applies the command-line overrides to a parsed configuration.
ModelConfig apply_flags(ModelConfig config, const AnalysisFlags& flags);

// Runs every stage it can; stages that cannot reach a verdict add a warning
// and set `unresolved`.  Configuration errors are thrown as ConfigError.
AnalysisReport run_analysis(const ModelConfig& config, const AnalysisFlags& flags);
AnalysisReport run_analysis(const std::filesystem::path& config_path, const AnalysisFlags& flags);

// CSV with header x,theta_lower,theta_upper,mu_lower,mu_upper,variant.
std::string curve_csv(const BoundCurve& curve);

// report.json plus bounds_<variant>.csv for every curve.
void write_outputs(const AnalysisReport& report, const std::filesystem::path& out_dir);

}  // namespace riskbounds
