#include "riskbounds/candidate.hpp"

#include <cmath>
#include <cstdio>
#include <optional>

#include "riskbounds/error.hpp"
#include "riskbounds/quadrature.hpp"

namespace riskbounds {
namespace {

using quad::LogSigned;
using quad::kNegInf;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// sup{s : pred(s)} for a predicate that holds on a half line (-inf, S].
// Returns nullopt when pred fails everywhere down to -limit.
template <class Pred>
std::optional<double> upper_edge(Pred pred, double tol, double limit, double lambda) {
  double lo, hi;
  if (pred(0.0)) {
    lo = 0.0;
    hi = 1.0;
    while (pred(hi)) {
      lo = hi;
      hi *= 2.0;
      if (hi > limit)
        throw UnresolvedError("candidate bracket exhausted: positive up to slope " + fmt(lo), lambda);
    }
  } else {
    hi = 0.0;
    lo = -1.0;
    while (!pred(lo)) {
      hi = lo;
      lo *= 2.0;
      if (-lo > limit) return std::nullopt;
    }
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (pred(mid) ? lo : hi) = mid;
  }
  return lo;
}

// log V = log h - log q on the grid, with its t-derivative (w + k/sigma^2) J.
struct LogV {
  std::vector<double> v, dv;
};

LogV log_v(const DiffusionModel& m, const SolutionProfile& p, const ScaleDensity& q) {
  const std::size_t n = m.size();
  LogV out;
  out.v.resize(n);
  out.dv.resize(n);
  const auto ts = m.ts(), ks = m.k_grid(), ss = m.sigma_grid();
  for (std::size_t i = 0; i < n; ++i) {
    const double J = m.jacobian(ts[i]);
    out.v[i] = p.log_h[i] - q.log_q[i];
    out.dv[i] = p.w[i] * J + (ks[i] / ss[i]) * (J / ss[i]);
  }
  return out;
}

// log int exp(-2 log V) dx over [a, b] inside cell i.
double log_cell(const DiffusionModel& m, const LogV& lv, std::size_t i, double a, double b) {
  const auto ts = m.ts();
  const auto& rule = quad::gauss_legendre(8);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  double acc = kNegInf;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double t = mid + half * rule.nodes[k];
    const double lv_t = quad::hermite(ts[i], ts[i + 1], lv.v[i], lv.v[i + 1], lv.dv[i], lv.dv[i + 1], t);
    acc = quad::log_add(acc, std::log(rule.weights[k]) - 2.0 * lv_t + std::log(m.jacobian(t)));
  }
  return acc + std::log(std::fabs(half));
}

void require_finite(const DiffusionModel& m, const LogV& lv, std::size_t i) {
  if (!std::isfinite(lv.v[i]) || !std::isfinite(lv.dv[i]))
    throw NumericalError("non-finite V^-2 integrand at x=" + fmt(m.xs()[i]), m.xs()[i]);
}

}  // namespace

CandidateInterval candidate_interval(const DiffusionModel& model, double lambda,
                                     const CandidateOptions& options) {
  const double tol = options.slope_tol > 0.0 ? options.slope_tol : model.tolerances().slope;
  CandidateInterval out;
  out.lambda = lambda;
  const int R = model.finest_level();
  const int first = options.trend ? 0 : R;
  std::optional<double> s_left, s_right;
  for (int level = first; level <= R; ++level) {
    s_left = upper_edge(
        [&](double s) { return stays_positive(model, lambda, s, Direction::Left, level); }, tol,
        options.bracket_limit, lambda);
    auto neg = upper_edge(
        [&](double s) { return stays_positive(model, lambda, -s, Direction::Right, level); }, tol,
        options.bracket_limit, lambda);
    s_right = neg ? std::optional<double>(-*neg) : std::nullopt;
    if (!s_left || !s_right) {
      out.empty = true;
      break;
    }
    out.trend_max.push_back(*s_left);
    out.trend_min.push_back(*s_right);
  }
  if (!out.empty) {
    const double lo = *s_right, hi = *s_left;
    if (std::fabs(hi - lo) <= 10.0 * tol) {
      out.singleton = true;
      out.slope_min = out.slope_max = 0.5 * (lo + hi);
    } else if (lo > hi) {
      out.empty = true;
    } else {
      out.slope_min = lo;
      out.slope_max = hi;
    }
  }
  if (out.empty) {
    out.slope_min = out.slope_max = NAN;
  }
  return out;
}

SolutionProfile extremal_solution(const DiffusionModel& model, double lambda, Extremal which, int level) {
  SolutionProfile p = boundary_shot(model, lambda, which == Extremal::Max ? Side::Left : Side::Right, {}, level);
  if (!p.positive_on(model.interior_begin(), model.interior_end() - 1))
    throw EmptyCandidateSet("extremal solution changes sign inside the truncation window", lambda);
  return p;
}

GeneralSolution general_solution(const DiffusionModel& model, double lambda, double c) {
  return general_solution(model, extremal_solution(model, lambda, Extremal::Max), c);
}

GeneralSolution general_solution(const DiffusionModel& model, const SolutionProfile& H, double c) {
  const ScaleDensity q = scale_density(model);
  const LogV lv = log_v(model, H, q);
  const auto ts = model.ts();
  const std::size_t n = model.size(), xi = model.xi_index();
  const int R = model.finest_level();

  // Cumulative log integrals of V^-2: toward the left from xi, and the tail
  // from each point to the padded right end.
  std::vector<double> left(n, kNegInf), tail(n, kNegInf);
  for (std::size_t j = xi; j > 0; --j) {
    require_finite(model, lv, j - 1);
    left[j - 1] = quad::log_add(left[j], log_cell(model, lv, j - 1, ts[j - 1], ts[j]));
  }
  {
    const double f0 = -2.0 * lv.v[n - 1] + std::log(model.jacobian(ts[n - 1]));
    const double slope = -2.0 * lv.dv[n - 1] + 1.0 * (model.spacing() == Spacing::Logarithmic);
    const double span = model.domain_hi(R) - ts[n - 1];
    tail[n - 1] = quad::log_exp_linear(f0, f0 + slope * span, span);
  }
  for (std::size_t j = n - 1; j > xi; --j) {
    require_finite(model, lv, j - 1);
    tail[j - 1] = quad::log_add(tail[j], log_cell(model, lv, j - 1, ts[j - 1], ts[j]));
  }
  const double log_i_pad = tail[xi];
  const double c_star = -std::exp(-log_i_pad);
  const double tol = model.tolerances().slope;
  if (c != 0.0 && std::fabs(c - c_star) <= 10.0 * tol + 1e-6 * std::fabs(c_star)) c = c_star;

  // F = 1 + c int_xi^x V^-2 in sign/log form.
  std::vector<LogSigned> F(n);
  const LogSigned one = LogSigned::from_log(0.0);
  const int csign = c > 0 ? 1 : (c < 0 ? -1 : 0);
  const double log_c = std::log(std::fabs(c));
  for (std::size_t j = 0; j < n; ++j) {
    if (csign == 0 || j == xi) {
      F[j] = one;
    } else if (j < xi) {
      F[j] = one + LogSigned::from_log(log_c + left[j], -csign);
    } else if (c > 0) {
      // I(x) = I_pad - T(x), both terms positive.
      const LogSigned i_x = LogSigned::from_log(log_i_pad) + LogSigned::from_log(tail[j], -1);
      F[j] = one + LogSigned{i_x.sign, i_x.log_abs + log_c};
    } else {
      // 1 + cI = (c* - c)/c* - c T(x)
      const LogSigned head = c == c_star ? LogSigned{} : LogSigned::from_value(1.0 - c / c_star);
      F[j] = head + LogSigned::from_log(log_c + tail[j], 1);
    }
  }

  GeneralSolution out;
  out.flagged = c > 0;
  SolutionProfile& p = out.profile;
  p.lambda = H.lambda;
  p.slope0 = H.slope0 + c;
  p.xs = H.xs;
  p.log_h.resize(n);
  p.w.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    p.log_h[j] = H.log_h[j] + F[j].log_abs;
    if (csign == 0) {
      p.w[j] = H.w[j];
    } else if (F[j].sign == 0) {
      p.w[j] = csign * INFINITY;
    } else {
      p.w[j] = H.w[j] + csign * F[j].sign * std::exp(log_c - 2.0 * lv.v[j] - F[j].log_abs);
    }
  }
  p.w[xi] = p.slope0;

  // First sign change of F on each side, refined inside the cell.
  auto locate = [&](std::size_t inner, std::size_t outer) {
    const std::size_t cell = std::min(inner, outer);
    double a = ts[inner], b = ts[outer];
    const double base = inner == xi ? kNegInf : (inner < xi ? left[inner] : tail[inner]);
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (a + b);
      double li;
      LogSigned f;
      if (outer < inner) {
        li = quad::log_add(base, log_cell(model, lv, cell, mid, ts[inner]));
        f = one + LogSigned::from_log(log_c + li, -csign);
      } else {
        li = quad::log_add(tail[outer], log_cell(model, lv, cell, mid, ts[outer]));
        const LogSigned head = c == c_star ? LogSigned{} : LogSigned::from_value(1.0 - c / c_star);
        f = head + LogSigned::from_log(log_c + li, 1);
      }
      (f.sign > 0 ? a : b) = mid;
    }
    return model.from_coord(0.5 * (a + b));
  };
  for (std::size_t j = xi; j > 0; --j)
    if (F[j - 1].sign <= 0) {
      p.horizon_left = locate(j, j - 1);
      break;
    }
  if (c < 0)
    for (std::size_t j = xi; j + 1 < n; ++j)
      if (F[j + 1].sign <= 0) {
        p.horizon_right = locate(j, j + 1);
        break;
      }
  if (H.horizon_left && (!p.horizon_left || *H.horizon_left > *p.horizon_left)) p.horizon_left = H.horizon_left;
  if (H.horizon_right && (!p.horizon_right || *H.horizon_right < *p.horizon_right))
    p.horizon_right = H.horizon_right;
  notify_profile(model, p);
  return out;
}

bool DivergenceSequence::increasing() const {
  for (std::size_t i = 1; i < log_integral.size(); ++i)
    if (!(log_integral[i] > log_integral[i - 1])) return false;
  return !log_integral.empty();
}

DivergenceSequence divergence_diagnostic(const DiffusionModel& model, double lambda, DivergenceSide side) {
  const bool left = side == DivergenceSide::LeftOfH;
  const SolutionProfile p = extremal_solution(model, lambda, left ? Extremal::Max : Extremal::Min);
  const ScaleDensity q = scale_density(model);
  const LogV lv = log_v(model, p, q);
  const auto ts = model.ts();
  const std::size_t xi = model.xi_index();
  DivergenceSequence out;
  double acc = kNegInf;
  std::size_t j = xi;
  require_finite(model, lv, xi);
  for (int level = 0; level <= model.finest_level(); ++level) {
    const std::size_t edge = left ? model.left_index(level) : model.right_index(level);
    while (j != edge) {
      const std::size_t next = left ? j - 1 : j + 1;
      require_finite(model, lv, next);
      const std::size_t cell = std::min(j, next);
      acc = quad::log_add(acc, log_cell(model, lv, cell, ts[cell], ts[cell + 1]));
      j = next;
    }
    out.log_integral.push_back(acc);
  }
  return out;
}

}  // namespace riskbounds
