#include "riskbounds/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "riskbounds/error.hpp"
#include "riskbounds/quadrature.hpp"

namespace riskbounds {
namespace {

double need(const std::optional<double>& v, const char* what, double beta_bar) {
  if (!v) throw UnresolvedError(std::string("no admissible ") + what + " on [0, beta_bar]", beta_bar);
  return *v;
}

}  // namespace

const char* to_string(Variant v) {
  switch (v) {
    case Variant::Intrinsic: return "intrinsic";
    case Variant::Rough: return "rough";
    case Variant::NonAttractedLeft: return "non-attracted-left";
    case Variant::NonAttractedRight: return "non-attracted-right";
  }
  return "?";
}

std::optional<Variant> parse_variant(std::string_view name) {
  for (Variant v : kAllVariants)
    if (name == to_string(v)) return v;
  return std::nullopt;
}

BoundCurve theta_bounds(const DiffusionModel& model, Variant variant, const SolutionProfile& lower,
                        const SolutionProfile& upper) {
  BoundCurve c;
  c.variant = variant;
  c.provenance = {lower.lambda, lower.slope0, upper.lambda, upper.slope0};
  const auto ss = model.sigma_grid();
  for (std::size_t i = model.interior_begin(); i < model.interior_end(); ++i) {
    const double lo = ss[i] * lower.w[i], hi = ss[i] * upper.w[i];
    if (!std::isfinite(lo) || !std::isfinite(hi))
      throw NumericalError("bound curve is not finite at x=" + std::to_string(model.xs()[i]), model.xs()[i]);
    if (lo > hi + 1e-8) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s bounds out of order at x=%.10g: %.10g > %.10g", to_string(variant),
                    model.xs()[i], lo, hi);
      throw NumericalError(buf, model.xs()[i]);
    }
    c.xs.push_back(model.xs()[i]);
    c.theta_lower.push_back(lo);
    c.theta_upper.push_back(hi);
  }
  return c;
}

BoundCurve theta_bounds(const DiffusionModel& model, Variant variant, const BoundInputs& in) {
  const double bb = in.beta_bar;
  const auto& th = in.thresholds;
  auto h = [&](double lambda) { return extremal_solution(model, lambda, Extremal::Min); };
  auto H = [&](double lambda) { return extremal_solution(model, lambda, Extremal::Max); };
  switch (variant) {
    case Variant::Rough:
      return theta_bounds(model, variant, h(0.0), H(0.0));
    case Variant::Intrinsic:
      return theta_bounds(model, variant, h(need(th.ell, "h_lambda", bb)), H(need(th.L_cap, "H_lambda", bb)));
    case Variant::NonAttractedLeft:
      return theta_bounds(model, variant, H(bb), H(need(th.L_cap, "H_lambda", bb)));
    case Variant::NonAttractedRight:
      return theta_bounds(model, variant, h(need(th.ell, "h_lambda", bb)), h(bb));
  }
  throw Error("unknown bound variant");
}

BoundCurve return_bounds(const DiffusionModel& model, BoundCurve curve) {
  if (!model.state_is_asset()) throw ConfigError("return bounds need a state-as-asset model");
  curve.mu_lower.resize(curve.xs.size());
  curve.mu_upper.resize(curve.xs.size());
  for (std::size_t j = 0; j < curve.xs.size(); ++j) {
    const double x = curve.xs[j];
    if (!(x > 0.0)) throw ConfigError("return bounds need a positive asset price");
    const auto co = model.coefficients(x);
    const double vol = co.sigma / x;
    curve.mu_lower[j] = co.rate + vol * curve.theta_lower[j];
    curve.mu_upper[j] = co.rate + vol * curve.theta_upper[j];
  }
  return curve;
}

std::pair<double, double> theta_at(const DiffusionModel& model, const BoundCurve& curve, double x) {
  if (curve.xs.empty() || !(x >= curve.xs.front() && x <= curve.xs.back()))
    throw Error("theta_at: x outside the truncation window");
  std::vector<double> ts(curve.xs.size());
  for (std::size_t j = 0; j < ts.size(); ++j) ts[j] = model.to_coord(curve.xs[j]);
  const double t = std::clamp(model.to_coord(x), ts.front(), ts.back());
  return {quad::pchip(ts, curve.theta_lower, t), quad::pchip(ts, curve.theta_upper, t)};
}

std::optional<std::string> closed_form_note(const DiffusionModel& model) {
  const auto xs = model.xs(), ks = model.k_grid(), ss = model.sigma_grid(), rs = model.rate_grid();
  if (!(xs.front() > 0.0)) return std::nullopt;
  const double v = ss[0] / xs[0], r = rs[0];
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double tol = 1e-12;
    if (std::fabs(ss[i] / xs[i] - v) > tol * v || std::fabs(rs[i] - r) > tol * std::fabs(r) ||
        std::fabs(ks[i] / xs[i] - r) > tol * std::max(std::fabs(r), 1e-300))
      return std::nullopt;
  }
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "geometric Brownian closed form: H at beta_bar is x^(1/2 - r/v^2), so the non-attracted-left "
                "lower bounds are theta >= v/2 - r/v = %.6g and mu >= v^2/2 = %.6g; the forms 1/2 - r/v (= %.6g) "
                "and v/2 (= %.6g) are misprints of these",
                v / 2 - r / v, v * v / 2, 0.5 - r / v, v / 2);
  return std::string(buf);
}

}  // namespace riskbounds
