#pragma once

// Bound curves for the market price of risk theta(x) and, when the state is
// the traded asset itself, for its expected return.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "riskbounds/admissibility.hpp"
#include "riskbounds/model.hpp"
#include "riskbounds/spectral.hpp"

namespace riskbounds {

enum class Variant { Intrinsic, Rough, NonAttractedLeft, NonAttractedRight };

const char* to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view name);
inline constexpr Variant kAllVariants[] = {Variant::Intrinsic, Variant::Rough, Variant::NonAttractedLeft,
                                           Variant::NonAttractedRight};

struct Provenance {
  double lambda_lower = 0.0, slope_lower = 0.0;
  double lambda_upper = 0.0, slope_upper = 0.0;
};

struct BoundCurve {
  Variant variant = Variant::Rough;
  std::vector<double> xs;   // base window of the grid
  std::vector<double> theta_lower, theta_upper;
  std::vector<double> mu_lower, mu_upper;   // empty unless return_bounds ran
  Provenance provenance;
};

// What the variants need beyond the model.
struct BoundInputs {
  double beta_bar = 0.0;
  Thresholds thresholds;
};

// theta = sigma w of the two generating profiles on the base window.
// Intrinsic needs both thresholds; a missing one raises UnresolvedError.
BoundCurve theta_bounds(const DiffusionModel& model, Variant variant, const BoundInputs& inputs);

// Same, from explicit generating profiles (lower, upper).
BoundCurve theta_bounds(const DiffusionModel& model, Variant variant, const SolutionProfile& lower,
                        const SolutionProfile& upper);

// mu = r + (sigma(x) / x) theta: the asset's own volatility is sigma / X.
BoundCurve return_bounds(const DiffusionModel& model, BoundCurve curve);

// Monotone cubic interpolation of the curve in grid coordinates.
std::pair<double, double> theta_at(const DiffusionModel& model, const BoundCurve& curve, double x);

// For geometric Brownian dynamics (sigma = v x, k = r x, constant r), a note
// giving the closed-form non-attracted-left bounds and flagging the
// misprinted variants 1/2 - r/v and v/2; nullopt for any other model.
std::optional<std::string> closed_form_note(const DiffusionModel& model);

}  // namespace riskbounds
