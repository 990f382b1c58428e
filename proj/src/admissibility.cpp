#include "riskbounds/admissibility.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "riskbounds/error.hpp"
#include "riskbounds/mcverify.hpp"
#include "riskbounds/quadrature.hpp"

namespace riskbounds {
namespace {

using quad::kNegInf;

// Deepest refinement level whose window the profile covers with finite w.
int usable_level(const DiffusionModel& m, std::span<const double> drift, Side side) {
  const std::size_t xi = m.xi_index();
  int best = -1;
  for (int level = 0; level <= m.finest_level(); ++level) {
    const std::size_t edge = side == Side::Left ? m.left_index(level) : m.right_index(level);
    const std::size_t a = std::min(edge, xi), b = std::max(edge, xi);
    bool ok = true;
    for (std::size_t i = a; i <= b && ok; ++i) ok = std::isfinite(drift[i]);
    if (!ok) break;
    best = level;
  }
  return best;
}

Explosion verdict(const std::vector<double>& lf) {
  const std::size_t n = lf.size();
  if (n < 2) return Explosion::Unresolved;
  const double last = lf[n - 1], prev = lf[n - 2];
  if (!std::isfinite(last)) return Explosion::NonExplosive;
  const double growth = last - prev;
  if (growth < std::log1p(1e-3)) return Explosion::Explosive;
  if (growth >= std::log(2.0)) return Explosion::NonExplosive;
  // Logarithmic divergence: increments that do not shrink.
  if (n >= 3) {
    const double d_last = last + std::log(-std::expm1(prev - last));
    const double d_prev = prev + std::log(-std::expm1(lf[n - 3] - prev));
    if (d_last >= std::log(0.9) + d_prev) return Explosion::NonExplosive;
  }
  return Explosion::Unresolved;
}

bool admissible_extremal(const DiffusionModel& m, double lambda, Extremal which) {
  SolutionProfile p;
  try {
    p = extremal_solution(m, lambda, which);
  } catch (const EmptyCandidateSet& e) {
    throw UnresolvedError(std::string("extremal solution unavailable: ") + e.what(), lambda);
  }
  return is_admissible(m, lambda, p).admissible;
}

// Smallest lambda in [0, top] with admissible extremal pair, assuming an
// up-set; nullopt when even top is not admissible.
std::optional<double> threshold(const DiffusionModel& m, double top, double res, Extremal which) {
  if (admissible_extremal(m, 0.0, which)) return 0.0;
  if (top <= 0.0 || !admissible_extremal(m, top, which)) return std::nullopt;
  double lo = 0.0, hi = top;
  while (hi - lo > res) {
    const double mid = 0.5 * (lo + hi);
    (admissible_extremal(m, mid, which) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace

const char* to_string(Explosion e) {
  switch (e) {
    case Explosion::Explosive: return "explosive";
    case Explosion::NonExplosive: return "non-explosive";
    case Explosion::Unresolved: return "unresolved";
  }
  return "?";
}

const char* to_string(Attraction a) {
  return a == Attraction::NonAttracted ? "non-attracted" : "possibly-attracted";
}

std::vector<double> transformed_drift(const DiffusionModel& model, const SolutionProfile& profile) {
  if (profile.w.size() != model.size()) throw Error("transformed_drift: profile does not match the grid");
  const auto ks = model.k_grid(), ss = model.sigma_grid();
  std::vector<double> out(model.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ks[i] + ss[i] * ss[i] * profile.w[i];
  return out;
}

FellerResult feller_explosion_test(const DiffusionModel& model, std::span<const double> drift, Side side) {
  if (drift.size() != model.size()) throw Error("feller_explosion_test: drift does not match the grid");
  const auto ts = model.ts(), ss = model.sigma_grid();
  const std::size_t xi = model.xi_index();
  FellerResult out;
  const int top = usable_level(model, drift, side);
  if (top < 0) return out;

  // a = 2 drift / sigma^2 in grid coordinates.
  auto a = [&](std::size_t i) {
    const double J = model.jacobian(ts[i]);
    return 2.0 * (drift[i] / ss[i]) * (J / ss[i]);
  };
  auto log_j = [&](std::size_t i) { return std::log(model.jacobian(ts[i])); };

  double log_s = 0.0;               // log s'(x), s'(xi) = 1
  double log_M = kNegInf;           // log int_xi^x m
  double log_F = kNegInf;           // log of the double integral
  double prev_log_m = -2.0 * std::log(ss[xi]) + log_j(xi);
  double prev_outer = kNegInf;
  std::size_t i = xi;
  for (int level = 0; level <= top; ++level) {
    const std::size_t edge = side == Side::Left ? model.left_index(level) : model.right_index(level);
    while (i != edge) {
      const std::size_t next = side == Side::Left ? i - 1 : i + 1;
      const double dt = std::fabs(ts[next] - ts[i]);
      const double sgn = side == Side::Left ? -1.0 : 1.0;
      log_s -= sgn * 0.5 * (a(i) + a(next)) * dt;
      const double lm = -log_s - 2.0 * std::log(ss[next]) + log_j(next);
      log_M = quad::log_add(log_M, quad::log_exp_linear(prev_log_m, lm, dt));
      const double outer = log_s + log_M + log_j(next);
      log_F = quad::log_add(log_F, quad::log_exp_linear(prev_outer, outer, dt));
      prev_log_m = lm;
      prev_outer = outer;
      i = next;
    }
    out.log_integrals.push_back(log_F);
  }
  out.verdict = verdict(out.log_integrals);
  return out;
}

AdmissibilityReport is_admissible(const DiffusionModel& model, double lambda, const SolutionProfile& profile,
                                  const AdmissibilityOptions& options) {
  AdmissibilityReport rep;
  rep.lambda = lambda;
  rep.slope0 = profile.slope0;
  const auto drift = transformed_drift(model, profile);
  rep.left = feller_explosion_test(model, drift, Side::Left);
  rep.right = feller_explosion_test(model, drift, Side::Right);
  rep.left_explosion = rep.left.verdict;
  rep.right_explosion = rep.right.verdict;
  if (options.monte_carlo) {
    const PathBundle bundle = simulate(model, std::nullopt, options.mc.T, options.mc.n_paths, options.mc.dt,
                                       options.mc.seed);
    const MartingaleCheck mc = martingale_check(model, lambda, profile, bundle);
    rep.mc_cross_check = McCrossCheck{mc.mean, mc.std_error};
  }
  for (const auto& [name, e] : {std::pair{"left", rep.left_explosion}, std::pair{"right", rep.right_explosion}}) {
    if (e == Explosion::Unresolved) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "Feller test unresolved at the %s boundary (lambda=%.10g, slope=%.10g)", name,
                    lambda, profile.slope0);
      throw UnresolvedError(buf, lambda);
    }
  }
  rep.admissible = rep.left_explosion == Explosion::NonExplosive && rep.right_explosion == Explosion::NonExplosive;
  return rep;
}

Attraction attraction_classification(const DiffusionModel& model, const CandidateInterval& interval,
                                     const SolutionProfile& profile, Side side) {
  if (interval.empty) throw EmptyCandidateSet("attraction_classification: empty candidate set", interval.lambda);
  const double tol = 10.0 * model.tolerances().slope;
  const double target = side == Side::Left ? interval.slope_max : interval.slope_min;
  return std::fabs(profile.slope0 - target) <= tol ? Attraction::NonAttracted : Attraction::PossiblyAttracted;
}

Attraction attraction_classification(const DiffusionModel& model, double lambda, const SolutionProfile& profile,
                                     Side side) {
  CandidateOptions opt;
  opt.trend = false;
  return attraction_classification(model, candidate_interval(model, lambda, opt), profile, side);
}

Thresholds compute_thresholds(const DiffusionModel& model, double beta_bar) {
  Thresholds out;
  out.scan_resolution = std::max(1e-4 * beta_bar, 1e-6);
  out.ell = threshold(model, beta_bar, out.scan_resolution, Extremal::Min);
  out.L_cap = threshold(model, beta_bar, out.scan_resolution, Extremal::Max);
  return out;
}

}  // namespace riskbounds
