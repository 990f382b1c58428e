#pragma once

// Euler-Maruyama simulation of the state under Q (or under an h-transformed
// measure via a drift override) with reproducible per-path random streams.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riskbounds/bounds.hpp"
#include "riskbounds/model.hpp"
#include "riskbounds/odecore.hpp"

namespace riskbounds {

struct PathBundle {
  std::int64_t n_paths = 0;
  double dt = 0.0;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> x_T;        // terminal state per path
  std::vector<double> int_r;      // int_0^T r(X_s) ds per path
  std::vector<std::uint8_t> absorbed;
  std::int64_t absorbed_count = 0;

  double absorbed_fraction() const {
    return n_paths > 0 ? static_cast<double>(absorbed_count) / static_cast<double>(n_paths) : 0.0;
  }
  // More than 20% of paths hit the truncation boundary.
  bool warning() const { return absorbed_fraction() > 0.2; }
};

// Paths start at xi and are absorbed at the finest window edges.  The drift
// override, if given, is a grid function interpolated linearly in grid
// coordinates.
PathBundle simulate(const DiffusionModel& model, std::optional<std::span<const double>> drift_override, double T,
                    std::int64_t n_paths, double dt, std::uint64_t seed);

struct MartingaleCheck {
  double mean = 0.0;
  double std_error = 0.0;
  double systematic = 0.0;   // window truncation error of h, when estimated
  double target = 1.0;
  double z_score = 0.0;      // (mean - target) / sqrt(std_error^2 + systematic^2)
  double absorbed_fraction = 0.0;
  bool warning = false;
};

// Sample mean of e^{lambda T - int r} h(X_T) over the surviving paths.
MartingaleCheck martingale_check(const DiffusionModel& model, double lambda, const SolutionProfile& profile,
                                 const PathBundle& bundle);

// Same, with the change of the mean when h is replaced by `coarser` (the
// same solution from a coarser truncation window) taken as a systematic
// error.  A near-degenerate deflator has a tiny sampling error, so the
// truncation bias of h would otherwise dominate the z score.
MartingaleCheck martingale_check(const DiffusionModel& model, double lambda, const SolutionProfile& profile,
                                 const SolutionProfile& coarser, const PathBundle& bundle);

struct ContainmentReport {
  bool contained = true;
  std::size_t visited_cells = 0;
  double worst_excess = -INFINITY;  // signed distance outside [lower, upper], negative inside
  double worst_x = 0.0;
  double worst_theta = 0.0;
  double absorbed_fraction = 0.0;
};

// Simulates under the measure induced by (lambda, profile) and checks
// theta = sigma w against the curve at both ends of every visited cell.
ContainmentReport empirical_bound_check(const DiffusionModel& model, const BoundCurve& curve, double lambda,
                                        const SolutionProfile& profile, const McSettings& settings);

}  // namespace riskbounds
