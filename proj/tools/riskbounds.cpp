// Command-line driver: riskbounds --config model.json --out results/
//
// Exit status: 0 complete, 1 configuration error, 2 partial results.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "riskbounds/analysis.hpp"
#include "riskbounds/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Bounds on the market price of risk from a risk-neutral diffusion model"};
  std::string config_path, out_dir = ".", variant = "all";
  bool mc = false;
  std::uint64_t seed = 0;
  bool allow_zero_rate = false;
  int grid_points = 0, refinement_levels = -1;

  app.add_option("--config", config_path, "model file (JSON)")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--variant", variant, "intrinsic, rough, non-attracted-left, non-attracted-right or all");
  app.add_flag("--mc,!--no-mc", mc, "run Monte Carlo martingale checks");
  auto* seed_opt = app.add_option("--seed", seed, "Monte Carlo seed (overrides mc.seed)");
  app.add_flag("--allow-zero-rate", allow_zero_rate, "accept r(x) = 0 on the grid");
  auto* points_opt = app.add_option("--grid-points", grid_points, "base grid size");
  auto* levels_opt = app.add_option("--refinement-levels", refinement_levels, "boundary refinement levels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  riskbounds::AnalysisFlags flags;
  if (variant != "all") {
    flags.variant = riskbounds::parse_variant(variant);
    if (!flags.variant) {
      std::fprintf(stderr, "error: unknown variant '%s'\n", variant.c_str());
      return 1;
    }
  }
  flags.monte_carlo = mc;
  if (*seed_opt) flags.seed = seed;
  flags.allow_zero_rate = allow_zero_rate;
  if (*points_opt) flags.grid_points = grid_points;
  if (*levels_opt) flags.refinement_levels = refinement_levels;

  try {
    const auto report = riskbounds::run_analysis(config_path, flags);
    riskbounds::write_outputs(report, out_dir);
    for (const auto& w : report.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    for (const auto& n : report.notes) std::fprintf(stderr, "note: %s\n", n.c_str());
    return report.unresolved ? 2 : 0;
  } catch (const riskbounds::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
