#pragma once

#include "riskbounds/candidate.hpp"
#include "riskbounds/model.hpp"

namespace riskbounds {

struct CriticalEigenvalue {
  double beta_bar = 0.0;
  double bracket_width = 0.0;
  bool existence_at_top = false;   // C_beta_bar non-empty at full slope tolerance
};

struct SpectralOptions {
  double lambda_tol = 0.0;            // 0: the model's lambda tolerance
  double predicate_slope_tol = 1e-6;  // loose tolerance inside the bisection
  double growth_limit = 1e12;
};

// Bisection on lambda over "C_lambda is non-empty".  Throws EmptyCandidateSet
// when no positive solution exists even at lambda = 0.
CriticalEigenvalue beta_bar(const DiffusionModel& model, const SpectralOptions& options = {});

}  // namespace riskbounds
