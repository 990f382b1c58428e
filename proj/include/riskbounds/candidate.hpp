#pragma once

// Candidate sets C_lambda: initial slopes of normalised positive solutions,
// the extremal solutions at both ends, the one-parameter family between them,
// and the divergence integrals that characterise the extremal ends.

#include <vector>

#include "riskbounds/model.hpp"
#include "riskbounds/odecore.hpp"

namespace riskbounds {

struct CandidateInterval {
  double lambda = 0.0;
  double slope_min = 0.0;   // slope of h_lambda at xi
  double slope_max = 0.0;   // slope of H_lambda at xi
  bool empty = false;
  bool singleton = false;   // width below ten slope tolerances
  // Endpoint estimates per refinement level 0..R (the last one is reported).
  std::vector<double> trend_min;
  std::vector<double> trend_max;
};

struct CandidateOptions {
  double slope_tol = 0.0;     // 0: the model's slope tolerance
  bool trend = true;          // estimate every level, not only the finest
  double bracket_limit = 1e6;
};

// Bisection on the initial slope against left and right positivity on the
// window of each level.  Throws UnresolvedError when the bracket cannot be
// closed within the slope limit.
CandidateInterval candidate_interval(const DiffusionModel& model, double lambda,
                                     const CandidateOptions& options = {});

enum class Extremal { Min, Max };

// H_lambda (Max) or h_lambda (Min).  Obtained by shooting from the finest
// window edge it is recessive toward.  A zero inside the base window means
// C_lambda is empty there and raises EmptyCandidateSet; zeros in the outer
// refinement segments are recorded on the profile.  `level` selects the
// window to shoot from (finest when negative).
SolutionProfile extremal_solution(const DiffusionModel& model, double lambda, Extremal which, int level = -1);

struct GeneralSolution {
  SolutionProfile profile;
  bool flagged = false;   // c > 0: slope above the maximal one
};

// h(x; c) = H(x) (1 + c int_xi^x V^-2), V = H / q, with slope H'(xi) + c.
GeneralSolution general_solution(const DiffusionModel& model, double lambda, double c);
GeneralSolution general_solution(const DiffusionModel& model, const SolutionProfile& H, double c);

enum class DivergenceSide { LeftOfH, RightOfh };

struct DivergenceSequence {
  std::vector<double> log_integral;   // per refinement level 0..R
  bool increasing() const;
};

// log of int_{a_j}^xi V^-2 (LeftOfH) or int_xi^{b_j} v^-2 (RightOfh), v = h/q.
DivergenceSequence divergence_diagnostic(const DiffusionModel& model, double lambda, DivergenceSide side);

}  // namespace riskbounds
