#pragma once

// Martingality of the deflator e^{lambda t - int r} h(X_t) / h(xi), decided by
// Feller's test on the h-transformed diffusion, plus boundary attraction and
// the thresholds ell and L.

#include <optional>
#include <span>
#include <vector>

#include "riskbounds/candidate.hpp"
#include "riskbounds/model.hpp"
#include "riskbounds/odecore.hpp"

namespace riskbounds {

enum class Explosion { Explosive, NonExplosive, Unresolved };

const char* to_string(Explosion e);

struct FellerResult {
  Explosion verdict = Explosion::Unresolved;
  // log of the Feller integral toward the boundary, one entry per refinement
  // level on which the drift is finite.
  std::vector<double> log_integrals;
};

// k + sigma^2 w on the grid.
std::vector<double> transformed_drift(const DiffusionModel& model, const SolutionProfile& profile);

FellerResult feller_explosion_test(const DiffusionModel& model, std::span<const double> drift, Side side);

struct McCrossCheck {
  double mean = 0.0;
  double std_error = 0.0;
};

struct AdmissibilityReport {
  double lambda = 0.0;
  double slope0 = 0.0;
  bool admissible = false;
  Explosion left_explosion = Explosion::Unresolved;
  Explosion right_explosion = Explosion::Unresolved;
  FellerResult left;
  FellerResult right;
  std::optional<McCrossCheck> mc_cross_check;
};

struct AdmissibilityOptions {
  bool monte_carlo = false;   // attach a deflator mean under Q
  McSettings mc;
};

// Throws UnresolvedError when either boundary verdict is unresolved.
AdmissibilityReport is_admissible(const DiffusionModel& model, double lambda, const SolutionProfile& profile,
                                  const AdmissibilityOptions& options = {});

enum class Attraction { NonAttracted, PossiblyAttracted };

const char* to_string(Attraction a);

Attraction attraction_classification(const DiffusionModel& model, const CandidateInterval& interval,
                                     const SolutionProfile& profile, Side side);
Attraction attraction_classification(const DiffusionModel& model, double lambda, const SolutionProfile& profile,
                                     Side side);

struct Thresholds {
  std::optional<double> ell;     // empty: no admissible h_lambda on [0, beta_bar]
  std::optional<double> L_cap;   // empty: no admissible H_lambda on [0, beta_bar]
  double scan_resolution = 0.0;
};

// Bisection on admissibility of (lambda, h_lambda) and (lambda, H_lambda)
// over [0, beta_bar].  Throws UnresolvedError naming the lambda at which a
// verdict could not be reached.
Thresholds compute_thresholds(const DiffusionModel& model, double beta_bar);

}  // namespace riskbounds
