#include "riskbounds/spectral.hpp"

#include <algorithm>
#include <cstdio>

#include "riskbounds/error.hpp"

namespace riskbounds {

CriticalEigenvalue beta_bar(const DiffusionModel& model, const SpectralOptions& options) {
  const double tol = options.lambda_tol > 0.0 ? options.lambda_tol : model.tolerances().lambda;
  CandidateOptions loose;
  loose.slope_tol = options.predicate_slope_tol;
  loose.trend = false;
  auto exists = [&](double lambda) { return !candidate_interval(model, lambda, loose).empty; };

  if (!exists(0.0))
    throw EmptyCandidateSet("no positive solution at lambda = 0, hence none for any lambda", 0.0);

  double lo = 0.0, hi = std::max(model.max_rate(), 1.0);
  while (exists(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > options.growth_limit) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "positive solutions persist up to lambda=%.6g", lo);
      throw UnresolvedError(buf, lo);
    }
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (exists(mid) ? lo : hi) = mid;
  }

  CriticalEigenvalue out;
  out.beta_bar = lo;
  out.bracket_width = hi - lo;
  CandidateOptions full;
  full.trend = false;
  out.existence_at_top = !candidate_interval(model, lo, full).empty;
  return out;
}

}  // namespace riskbounds
