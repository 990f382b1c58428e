#include "riskbounds/odecore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <numbers>

#include "riskbounds/error.hpp"

namespace riskbounds {
namespace {

// Dormand-Prince 8(5,3) tableau.
constexpr double c2 = 0.526001519587677318785587544488E-01, c3 = 0.789002279381515978178381316732E-01,
                 c4 = 0.118350341907227396726757197510E+00, c5 = 0.281649658092772603273242802490E+00,
                 c6 = 0.333333333333333333333333333333E+00, c7 = 0.25E+00,
                 c8 = 0.307692307692307692307692307692E+00, c9 = 0.651282051282051282051282051282E+00,
                 c10 = 0.6E+00, c11 = 0.857142857142857142857142857142E+00;
constexpr double b1 = 5.42937341165687622380535766363E-2, b6 = 4.45031289275240888144113950566E0,
                 b7 = 1.89151789931450038304281599044E0, b8 = -5.8012039600105847814672114227E0,
                 b9 = 3.1116436695781989440891606237E-1, b10 = -1.52160949662516078556178806805E-1,
                 b11 = 2.01365400804030348374776537501E-1, b12 = 4.47106157277725905176885569043E-2;
constexpr double a21 = 5.26001519587677318785587544488E-2, a31 = 1.97250569845378994544595329183E-2,
                 a32 = 5.91751709536136983633785987549E-2, a41 = 2.95875854768068491816892993775E-2,
                 a43 = 8.87627564304205475450678981324E-2, a51 = 2.41365134159266685502369798665E-1,
                 a53 = -8.84549479328286085344864962717E-1, a54 = 9.24834003261792003115737966543E-1,
                 a61 = 3.7037037037037037037037037037E-2, a64 = 1.70828608729473871279604482173E-1,
                 a65 = 1.25467687566822425016691814123E-1, a71 = 3.7109375E-2,
                 a74 = 1.70252211019544039314978060272E-1, a75 = 6.02165389804559606850219397283E-2,
                 a76 = -1.7578125E-2;
constexpr double a81 = 3.70920001185047927108779319836E-2, a84 = 1.70383925712239993810214054705E-1,
                 a85 = 1.07262030446373284651809199168E-1, a86 = -1.53194377486244017527936158236E-2,
                 a87 = 8.27378916381402288758473766002E-3, a91 = 6.24110958716075717114429577812E-1,
                 a94 = -3.36089262944694129406857109825E0, a95 = -8.68219346841726006818189891453E-1,
                 a96 = 2.75920996994467083049415600797E1, a97 = 2.01540675504778934086186788979E1,
                 a98 = -4.34898841810699588477366255144E1, a101 = 4.77662536438264365890433908527E-1,
                 a104 = -2.48811461997166764192642586468E0, a105 = -5.90290826836842996371446475743E-1,
                 a106 = 2.12300514481811942347288949897E1, a107 = 1.52792336328824235832596922938E1,
                 a108 = -3.32882109689848629194453265587E1, a109 = -2.03312017085086261358222928593E-2;
constexpr double a111 = -9.3714243008598732571704021658E-1, a114 = 5.18637242884406370830023853209E0,
                 a115 = 1.09143734899672957818500254654E0, a116 = -8.14978701074692612513997267357E0,
                 a117 = -1.85200656599969598641566180701E1, a118 = 2.27394870993505042818970056734E1,
                 a119 = 2.49360555267965238987089396762E0, a1110 = -3.0467644718982195003823669022E0,
                 a121 = 2.27331014751653820792359768449E0, a124 = -1.05344954667372501984066689879E1,
                 a125 = -2.00087205822486249909675718444E0, a126 = -1.79589318631187989172765950534E1,
                 a127 = 2.79488845294199600508499808837E1, a128 = -2.85899827713502369474065508674E0,
                 a129 = -8.87285693353062954433549289258E0, a1210 = 1.23605671757943030647266201528E1,
                 a1211 = 6.43392746015763530355970484046E-1;
constexpr double bhh1 = 0.244094488188976377952755905512E+00, bhh2 = 0.733846688281611857341361741547E+00,
                 bhh3 = 0.220588235294117647058823529412E-01;
constexpr double er1 = 0.1312004499419488073250102996E-01, er6 = -0.1225156446376204440720569753E+01,
                 er7 = -0.4957589496572501915214079952E+00, er8 = 0.1664377182454986536961530415E+01,
                 er9 = -0.3503288487499736816886487290E+00, er10 = 0.3341791187130174790297318841E+00,
                 er11 = 0.8192320648511571246570742613E-01, er12 = -0.2235530786388629525884427845E-01;

struct Vec {
  double h = 0.0, g = 0.0;
};
inline Vec operator+(Vec a, Vec b) { return {a.h + b.h, a.g + b.g}; }
inline Vec operator*(double s, Vec a) { return {s * a.h, s * a.g}; }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// State in grid coordinates: g = dh/dt, true h = h * exp(log_scale).
struct State {
  double t = 0.0;
  Vec y;
  double log_scale = 0.0;
};

class Flow {
 public:
  Flow(const DiffusionModel& model, double lambda, const IntegratorOptions& opt)
      : m_(model), lambda_(lambda), log_(model.spacing() == Spacing::Logarithmic),
        rtol_(model.tolerances().ode_rel), atol_(model.tolerances().ode_abs),
        renorm_(opt.renormalize_exponent) {}

  Vec rhs(double t, Vec y) const {
    const double x = m_.from_coord(t);
    DiffusionModel::Coefficients co;
    try {
      co = m_.coefficients(x);
    } catch (const expr::DomainError& e) {
      throw NumericalError(std::string("coefficient evaluation failed at x=") + fmt(x) + ": " + e.what(), x);
    }
    // J^2 h_xx grouped so that no intermediate over- or underflows when x
    // and sigma are extreme but of comparable size.
    const double J = log_ ? x : 1.0;
    const double a = J / co.sigma;
    const double jjhxx = -2.0 * (a * a) * ((co.k / J) * y.g + (lambda_ - co.rate) * y.h);
    return {y.g, (log_ ? y.g : 0.0) + jjhxx};
  }

  // One Dormand-Prince step of size dt from (t, y) with f0 = rhs(t, y).
  // Returns the weighted error estimate (accept when <= 1).
  double step(double t, Vec y, Vec f0, double dt, Vec& out) const {
    const Vec k1 = f0;
    const Vec k2 = rhs(t + c2 * dt, y + (dt * a21) * k1);
    const Vec k3 = rhs(t + c3 * dt, y + dt * (a31 * k1 + a32 * k2));
    const Vec k4 = rhs(t + c4 * dt, y + dt * (a41 * k1 + a43 * k3));
    const Vec k5 = rhs(t + c5 * dt, y + dt * (a51 * k1 + a53 * k3 + a54 * k4));
    const Vec k6 = rhs(t + c6 * dt, y + dt * (a61 * k1 + a64 * k4 + a65 * k5));
    const Vec k7 = rhs(t + c7 * dt, y + dt * (a71 * k1 + a74 * k4 + a75 * k5 + a76 * k6));
    const Vec k8 = rhs(t + c8 * dt, y + dt * (a81 * k1 + a84 * k4 + a85 * k5 + a86 * k6 + a87 * k7));
    const Vec k9 = rhs(t + c9 * dt,
                       y + dt * (a91 * k1 + a94 * k4 + a95 * k5 + a96 * k6 + a97 * k7 + a98 * k8));
    const Vec k10 = rhs(t + c10 * dt, y + dt * (a101 * k1 + a104 * k4 + a105 * k5 + a106 * k6 +
                                                a107 * k7 + a108 * k8 + a109 * k9));
    const Vec k11 = rhs(t + c11 * dt, y + dt * (a111 * k1 + a114 * k4 + a115 * k5 + a116 * k6 +
                                                a117 * k7 + a118 * k8 + a119 * k9 + a1110 * k10));
    const Vec k12 = rhs(t + dt, y + dt * (a121 * k1 + a124 * k4 + a125 * k5 + a126 * k6 + a127 * k7 +
                                          a128 * k8 + a129 * k9 + a1210 * k10 + a1211 * k11));
    const Vec kb = b1 * k1 + b6 * k6 + b7 * k7 + b8 * k8 + b9 * k9 + b10 * k10 + b11 * k11 + b12 * k12;
    out = y + dt * kb;

    // Tolerances are relative to the state norm, so the control is blind to
    // the power-of-two rescaling.
    const double norm = std::max({std::fabs(y.h), std::fabs(y.g), std::fabs(out.h), std::fabs(out.g)});
    double err = 0.0, err2 = 0.0;
    auto accumulate = [&](double yi, double oi, double kbi, double k1i, double k9i, double k12i,
                          double e) {
      const double sk = 1.0 / (atol_ * norm + rtol_ * std::max(std::fabs(yi), std::fabs(oi)));
      const double s2 = (kbi - bhh1 * k1i - bhh2 * k9i - bhh3 * k12i) * sk;
      const double s1 = e * sk;
      err2 += s2 * s2;
      err += s1 * s1;
    };
    const Vec e = er1 * k1 + er6 * k6 + er7 * k7 + er8 * k8 + er9 * k9 + er10 * k10 + er11 * k11 + er12 * k12;
    accumulate(y.h, out.h, kb.h, k1.h, k9.h, k12.h, e.h);
    accumulate(y.g, out.g, kb.g, k1.g, k9.g, k12.g, e.g);
    if (!(norm > 0.0)) return 0.0;
    double deno = err + 0.01 * err2;
    if (deno <= 0.0) deno = 1.0;
    return std::fabs(dt) * err * std::sqrt(1.0 / (2.0 * deno));
  }

  void renormalize(State& s) const {
    const double mag = std::max(std::fabs(s.y.h), std::fabs(s.y.g));
    if (!(mag > 0.0) || !std::isfinite(mag)) return;
    const int e = std::ilogb(mag);
    if (e > renorm_ || e < -renorm_) {
      s.y.h = std::ldexp(s.y.h, -e);
      s.y.g = std::ldexp(s.y.g, -e);
      s.log_scale += e * std::numbers::ln2;
    }
  }

  // Adaptive integration from s to t_end.  `dt` carries the step size guess
  // between calls.  After every accepted step on_step(prev, next) may return
  // false to stop early; returns false in that case.
  template <class OnStep>
  bool advance(State& s, double t_end, double& dt, OnStep&& on_step) const {
    const double dir = t_end >= s.t ? 1.0 : -1.0;
    Vec f = rhs(s.t, s.y);
    bool rejected = false;
    while (dir * (t_end - s.t) > 0.0) {
      double h = std::min(std::fabs(dt), std::fabs(t_end - s.t));
      bool last = h == std::fabs(t_end - s.t);
      const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(s.t));
      if (h < floor) {
        if (last) {
          s.t = t_end;
          break;
        }
        const double x = m_.from_coord(s.t);
        throw NumericalError("step size underflow near x=" + fmt(x), x);
      }
      Vec out;
      const double err = step(s.t, s.y, f, dir * h, out);
      if (!std::isfinite(err) || !std::isfinite(out.h) || !std::isfinite(out.g)) {
        dt = 0.25 * h;
        rejected = true;
        continue;
      }
      const double fac11 = std::pow(err, 0.125);
      if (err <= 1.0) {
        const State prev = s;
        s.t = last ? t_end : s.t + dir * h;
        s.y = out;
        renormalize(s);
        double hnew = h / std::clamp(fac11 / 0.9, 1.0 / 6.0, 1.0 / 0.333);
        if (rejected) hnew = std::min(hnew, h);
        rejected = false;
        // Keep the guess from collapsing onto a short final step.
        if (!last) dt = hnew;
        else dt = std::max(std::fabs(dt), hnew);
        if (!on_step(prev, s)) return false;
        f = rhs(s.t, s.y);
      } else {
        dt = h / std::min(1.0 / 0.333, fac11 / 0.9);
        rejected = true;
      }
    }
    return true;
  }

  // Position in (prev.t, prev.t + span] where h changes sign, by bisection
  // on single steps from prev.
  double refine_zero(const State& prev, double span) const {
    const Vec f = rhs(prev.t, prev.y);
    const double sgn = prev.y.h > 0 ? 1.0 : -1.0;
    double lo = 0.0, hi = span;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      Vec out;
      step(prev.t, prev.y, f, mid, out);
      if (sgn * out.h > 0.0) lo = mid;
      else hi = mid;
    }
    return m_.from_coord(prev.t + 0.5 * (lo + hi));
  }

  Vec rhs_at(double t, Vec y) const { return rhs(t, y); }
  const DiffusionModel& model() const { return m_; }

 private:
  const DiffusionModel& m_;
  double lambda_;
  bool log_;
  double rtol_, atol_;
  int renorm_;
};

double initial_step(std::span<const double> ts, std::size_t i, Direction d) {
  if (d == Direction::Right) return ts[std::min(i + 1, ts.size() - 1)] - ts[i];
  return ts[i] - ts[i == 0 ? 0 : i - 1];
}

void record(const DiffusionModel& m, const State& s, std::size_t i, SolutionProfile& p) {
  const double J = m.jacobian(s.t);
  p.log_h[i] = std::log(std::fabs(s.y.h)) + s.log_scale;
  p.w[i] = s.y.g / (J * s.y.h);
}

// Fills grid points from `from` outward in direction d, starting at state s
// which sits at ts[from].  Records the first sign change.
void sweep_profile(const Flow& flow, State s, std::size_t from, Direction d, SolutionProfile& p,
                   std::optional<double>& horizon) {
  const auto ts = flow.model().ts();
  const std::size_t n = ts.size();
  double dt = initial_step(ts, from, d);
  std::size_t i = from;
  while (d == Direction::Right ? i + 1 < n : i > 0) {
    const std::size_t next = d == Direction::Right ? i + 1 : i - 1;
    flow.advance(s, ts[next], dt, [&](const State& prev, const State& cur) {
      if (!horizon && prev.y.h != 0.0 && (cur.y.h == 0.0 || (cur.y.h > 0) != (prev.y.h > 0)))
        horizon = flow.refine_zero(prev, cur.t - prev.t);
      return true;
    });
    record(flow.model(), s, next, p);
    i = next;
  }
}

SolutionProfile empty_profile(const DiffusionModel& m, double lambda) {
  SolutionProfile p;
  p.lambda = lambda;
  p.xs.assign(m.xs().begin(), m.xs().end());
  p.log_h.assign(m.size(), 0.0);
  p.w.assign(m.size(), 0.0);
  return p;
}

std::mutex observer_mu;
ProfileObserver observer;

}  // namespace

bool SolutionProfile::positive_on(std::size_t lo, std::size_t hi) const {
  if (horizon_left && *horizon_left >= xs.at(lo)) return false;
  if (horizon_right && *horizon_right <= xs.at(hi)) return false;
  return true;
}

void notify_profile(const DiffusionModel& model, const SolutionProfile& profile) {
  ProfileObserver fn;
  {
    std::lock_guard lock(observer_mu);
    fn = observer;
  }
  if (fn) fn(model, profile);
}

ScopedProfileObserver::ScopedProfileObserver(ProfileObserver fn) {
  std::lock_guard lock(observer_mu);
  previous_ = std::exchange(observer, std::move(fn));
}

ScopedProfileObserver::~ScopedProfileObserver() {
  std::lock_guard lock(observer_mu);
  observer = std::move(previous_);
}

SolutionProfile integrate_from(const DiffusionModel& model, double lambda, std::size_t index,
                               double w0, const IntegratorOptions& options) {
  if (index >= model.size()) throw Error("integrate_from: grid index out of range");
  const Flow flow(model, lambda, options);
  SolutionProfile p = empty_profile(model, lambda);
  const double t0 = model.ts()[index];
  const State s{t0, {1.0, model.jacobian(t0) * w0}, 0.0};
  p.log_h[index] = 0.0;
  p.w[index] = w0;
  sweep_profile(flow, s, index, Direction::Right, p, p.horizon_right);
  sweep_profile(flow, s, index, Direction::Left, p, p.horizon_left);
  const std::size_t xi = model.xi_index();
  p.slope0 = index == xi ? w0 : p.w[xi];
  notify_profile(model, p);
  return p;
}

SolutionProfile integrate_solution(const DiffusionModel& model, double lambda, double slope0,
                                   const IntegratorOptions& options) {
  return integrate_from(model, lambda, model.xi_index(), slope0, options);
}

SolutionProfile boundary_shot(const DiffusionModel& model, double lambda, Side side,
                              const IntegratorOptions& options, int level) {
  if (level > model.finest_level()) throw Error("refinement level out of range");
  const Flow flow(model, lambda, options);
  SolutionProfile p = empty_profile(model, lambda);
  const auto ts = model.ts();
  const std::size_t n = ts.size(), xi = model.xi_index();
  const int R = level < 0 ? model.finest_level() : level;
  std::optional<double> first_zero;
  auto watch = [&](const State& prev, const State& cur) {
    if (!first_zero && prev.y.h != 0.0 && (cur.y.h == 0.0 || (cur.y.h > 0) != (prev.y.h > 0)))
      first_zero = flow.refine_zero(prev, cur.t - prev.t);
    return true;
  };

  const bool left = side == Side::Left;
  const double t_start = left ? model.domain_lo(R) : model.domain_hi(R);
  State s{t_start, {0.0, left ? 1.0 : -1.0}, 0.0};
  const std::size_t first = left ? model.left_index(R) : model.right_index(R);
  double dt = 0.5 * std::fabs(ts[first] - t_start);
  flow.advance(s, ts[first], dt, watch);
  record(model, s, first, p);
  if (first_zero) throw EmptyCandidateSet("boundary solution vanishes inside the padding", lambda);
  // On a coarser window the outer segments lie beyond the zero at t_start.
  std::optional<double> outer_zero;
  if (first != (left ? 0 : n - 1))
    sweep_profile(flow, s, first, left ? Direction::Left : Direction::Right, p, outer_zero);
  std::optional<double> zero_before_xi, zero_after_xi;
  std::size_t i = first;
  while (left ? i + 1 < n : i > 0) {
    const std::size_t next = left ? i + 1 : i - 1;
    flow.advance(s, ts[next], dt, watch);
    record(model, s, next, p);
    i = next;
    if (i == xi) {
      if (first_zero) zero_before_xi = first_zero;
      first_zero.reset();
    }
  }
  zero_after_xi = first_zero;
  if (zero_before_xi || !(std::isfinite(p.log_h[xi])))
    throw EmptyCandidateSet("boundary solution changes sign before reaching xi at x=" +
                                fmt(zero_before_xi.value_or(model.xi())),
                            lambda);
  const double shift = p.log_h[xi];
  for (double& v : p.log_h) v -= shift;
  p.log_h[xi] = 0.0;
  p.slope0 = p.w[xi];
  if (left) {
    p.horizon_right = zero_after_xi;
    p.horizon_left = outer_zero;
  } else {
    p.horizon_left = zero_after_xi;
    p.horizon_right = outer_zero;
  }
  notify_profile(model, p);
  return p;
}

namespace {

struct SweepResult {
  bool positive;
  std::optional<double> zero;
};

SweepResult positivity_sweep(const DiffusionModel& model, double lambda, double slope0, Direction d,
                             int level, bool refine) {
  if (level < 0) level = model.finest_level();
  if (level > model.finest_level()) throw Error("refinement level out of range");
  const Flow flow(model, lambda, {});
  const auto ts = model.ts();
  const std::size_t xi = model.xi_index();
  const std::size_t edge = d == Direction::Right ? model.right_index(level) : model.left_index(level);
  State s{ts[xi], {1.0, model.jacobian(ts[xi]) * slope0}, 0.0};
  double dt = initial_step(ts, xi, d);
  std::optional<double> zero;
  const bool done = flow.advance(s, ts[edge], dt, [&](const State& prev, const State& cur) {
    if (cur.y.h > 0.0) return true;
    if (refine) zero = flow.refine_zero(prev, cur.t - prev.t);
    return false;
  });
  if (!done && !refine) zero = model.from_coord(s.t);
  return {done, zero};
}

}  // namespace

std::optional<double> positivity_horizon(const DiffusionModel& model, double lambda, double slope0,
                                         Direction direction, int level) {
  return positivity_sweep(model, lambda, slope0, direction, level, true).zero;
}

bool stays_positive(const DiffusionModel& model, double lambda, double slope0, Direction direction,
                    int level) {
  return positivity_sweep(model, lambda, slope0, direction, level, false).positive;
}

ResidualReport residual_check(const DiffusionModel& model, const SolutionProfile& p) {
  const double tol = 1e-8;
  const Flow flow(model, p.lambda, {});
  const auto ts = model.ts();
  const std::size_t n = ts.size();
  ResidualReport rep;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!std::isfinite(p.log_h[i]) || !std::isfinite(p.w[i])) continue;
    const double t = ts[i], J = model.jacobian(t);
    const Vec y{1.0, J * p.w[i]};
    const double cell = std::min(ts[i + 1] - t, t - ts[i - 1]);
    const double delta = 5e-6 * std::min(cell, 1.0 / std::max(std::fabs(y.g), 1e-300));
    const Vec f = flow.rhs_at(t, y);
    Vec up, down;
    flow.step(t, y, f, delta, up);
    flow.step(t, y, f, -delta, down);
    const double g_t = (up.g - down.g) / (2.0 * delta);
    const bool log = model.spacing() == Spacing::Logarithmic;
    const auto co = model.coefficients(p.xs[i]);
    const double s = co.sigma / J;
    const double a = 0.5 * (s * s) * (g_t - (log ? y.g : 0.0));
    const double b = (co.k / J) * y.g, c = p.lambda - co.rate;
    const double residual = std::fabs(a + b + c);
    // Scale by the sizes of the individual terms, so that cancellation inside the second-order
    // term (exact for h linear in x) does not count as a failure.
    const double a_terms = 0.5 * (s * s) * (std::fabs(g_t) + (log ? std::fabs(y.g) : 0.0));
    const double scale = (std::fabs(p.lambda) + model.max_rate()) + a_terms + std::fabs(b);
    // A constant solution of a driftless, rate-free model has zero scale and zero residual.
    const double ratio = residual == 0.0 ? 0.0 : residual / (tol * scale);
    ++rep.checked;
    if (ratio > rep.worst || !std::isfinite(ratio)) {
      rep.worst = std::isfinite(ratio) ? ratio : INFINITY;
      rep.worst_x = p.xs[i];
    }
  }
  return rep;
}

}  // namespace riskbounds
