#include "riskbounds/mcverify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "riskbounds/admissibility.hpp"
#include "riskbounds/error.hpp"
#include "riskbounds/quadrature.hpp"
#include "riskbounds/simd/kernels.hpp"

namespace riskbounds {
namespace {

constexpr std::size_t kBatch = 256;

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Cell index i with ts[i] <= t < ts[i+1], clamped to the grid.
std::size_t locate(std::span<const double> ts, double t) {
  auto it = std::upper_bound(ts.begin(), ts.end(), t);
  std::size_t i = it == ts.begin() ? 0 : static_cast<std::size_t>(it - ts.begin()) - 1;
  return std::min(i, ts.size() - 2);
}

using StepVisitor = std::function<void(std::span<const double> xs, std::span<const std::uint8_t> absorbed)>;

PathBundle run(const DiffusionModel& model, std::optional<std::span<const double>> drift_override, double T,
               std::int64_t n_paths, double dt, std::uint64_t seed, const StepVisitor& visit) {
  if (!(T > 0.0)) throw ConfigError("simulation horizon T must be positive");
  if (n_paths < 1) throw ConfigError("n_paths must be positive");
  if (!(dt > 0.0) || dt > T / 100.0 * (1.0 + 1e-12)) throw ConfigError("dt must lie in (0, T/100]");
  if (drift_override && drift_override->size() != model.size())
    throw Error("drift override does not match the grid");

  const auto& K = simd::kernels();
  const auto ts = model.ts();
  const int R = model.finest_level();
  const double lo = model.xs()[model.left_index(R)], hi = model.xs()[model.right_index(R)];
  const auto steps = static_cast<std::int64_t>(std::llround(T / dt));
  const double sqrt_dt = std::sqrt(dt);

  PathBundle b;
  b.n_paths = n_paths;
  b.dt = dt;
  b.horizon = T;
  b.seed = seed;
  b.x_T.resize(static_cast<std::size_t>(n_paths));
  b.int_r.resize(static_cast<std::size_t>(n_paths));
  b.absorbed.assign(static_cast<std::size_t>(n_paths), 0);

  std::vector<double> x(kBatch), xprev(kBatch), drift(kBatch), vol(kBatch), z(kBatch), r0(kBatch), r1(kBatch),
      acc(kBatch), scratch;
  std::vector<std::uint8_t> dead(kBatch);
  std::vector<std::mt19937_64> engines;
  std::vector<std::normal_distribution<double>> normals(kBatch);

  auto eval_drift = [&](std::span<const double> xs, std::span<double> out) {
    if (!drift_override) {
      model.drift().eval_batch(xs, out, scratch);
      return;
    }
    const auto& d = *drift_override;
    for (std::size_t j = 0; j < xs.size(); ++j) {
      const double t = model.to_coord(xs[j]);
      const std::size_t i = locate(ts, t);
      const double s = std::clamp((t - ts[i]) / (ts[i + 1] - ts[i]), 0.0, 1.0);
      out[j] = d[i] + s * (d[i + 1] - d[i]);
    }
  };

  for (std::int64_t start = 0; start < n_paths; start += static_cast<std::int64_t>(kBatch)) {
    const std::size_t m = static_cast<std::size_t>(std::min<std::int64_t>(kBatch, n_paths - start));
    const std::span<double> xs(x.data(), m);
    engines.clear();
    for (std::size_t j = 0; j < m; ++j) {
      const auto index = static_cast<std::uint64_t>(start) + j;
      engines.emplace_back(splitmix64(seed ^ splitmix64(index)));
      normals[j].reset();
    }
    std::fill_n(x.begin(), m, model.xi());
    std::fill_n(acc.begin(), m, 0.0);
    std::fill_n(dead.begin(), m, 0);
    try {
      model.short_rate().eval_batch(xs, {r0.data(), m}, scratch);
      for (std::int64_t s = 0; s < steps; ++s) {
        eval_drift(xs, {drift.data(), m});
        model.volatility().eval_batch(xs, {vol.data(), m}, scratch);
        for (std::size_t j = 0; j < m; ++j) z[j] = normals[j](engines[j]);
        std::copy_n(x.begin(), m, xprev.begin());
        K.em_step(x.data(), drift.data(), vol.data(), z.data(), dt, sqrt_dt, m);
        for (std::size_t j = 0; j < m; ++j) {
          if (dead[j] || !(x[j] > lo && x[j] < hi)) {
            dead[j] = 1;
            x[j] = xprev[j];
          }
        }
        model.short_rate().eval_batch(xs, {r1.data(), m}, scratch);
        K.trapezoid_accumulate(acc.data(), r0.data(), r1.data(), 0.5 * dt, m);
        std::copy_n(r1.begin(), m, r0.begin());
        if (visit) visit(xs, {dead.data(), m});
      }
    } catch (const expr::DomainError& e) {
      throw NumericalError(std::string("coefficient evaluation failed during simulation: ") + e.what());
    }
    for (std::size_t j = 0; j < m; ++j) {
      const auto k = static_cast<std::size_t>(start) + j;
      b.x_T[k] = x[j];
      b.int_r[k] = acc[j];
      b.absorbed[k] = dead[j];
      b.absorbed_count += dead[j];
    }
  }
  return b;
}

double log_h_at(const DiffusionModel& model, const SolutionProfile& p, double x) {
  const auto ts = model.ts();
  const double t = model.to_coord(x);
  const std::size_t i = locate(ts, t);
  const double d0 = p.w[i] * model.jacobian(ts[i]), d1 = p.w[i + 1] * model.jacobian(ts[i + 1]);
  return quad::hermite(ts[i], ts[i + 1], p.log_h[i], p.log_h[i + 1], d0, d1, std::clamp(t, ts[i], ts[i + 1]));
}

// Deflator values over the surviving paths; h is negative past a horizon.
std::vector<double> deflators(const DiffusionModel& model, double lambda, const SolutionProfile& p,
                              const PathBundle& bundle) {
  std::vector<double> v;
  v.reserve(bundle.x_T.size());
  for (std::size_t k = 0; k < bundle.x_T.size(); ++k) {
    if (bundle.absorbed[k]) continue;
    const double x = bundle.x_T[k];
    const bool past = (p.horizon_left && x < *p.horizon_left) || (p.horizon_right && x > *p.horizon_right);
    const double d = std::exp(lambda * bundle.horizon - bundle.int_r[k] + log_h_at(model, p, x));
    v.push_back(past ? -d : d);
  }
  return v;
}

}  // namespace

PathBundle simulate(const DiffusionModel& model, std::optional<std::span<const double>> drift_override, double T,
                    std::int64_t n_paths, double dt, std::uint64_t seed) {
  return run(model, drift_override, T, n_paths, dt, seed, {});
}

MartingaleCheck martingale_check(const DiffusionModel& model, double lambda, const SolutionProfile& profile,
                                 const PathBundle& bundle) {
  std::vector<double> v = deflators(model, lambda, profile, bundle);
  MartingaleCheck out;
  out.absorbed_fraction = bundle.absorbed_fraction();
  out.warning = bundle.warning();
  const auto n = static_cast<double>(v.size());
  if (v.empty()) {
    out.mean = out.std_error = out.z_score = NAN;
    return out;
  }
  out.mean = quad::pairwise_sum(v) / n;
  for (double& e : v) e = (e - out.mean) * (e - out.mean);
  const double var = v.size() > 1 ? quad::pairwise_sum(v) / (n - 1.0) : 0.0;
  out.std_error = std::sqrt(var / n);
  out.z_score = out.std_error > 0.0 ? (out.mean - out.target) / out.std_error : 0.0;
  return out;
}

MartingaleCheck martingale_check(const DiffusionModel& model, double lambda, const SolutionProfile& profile,
                                 const SolutionProfile& coarser, const PathBundle& bundle) {
  MartingaleCheck out = martingale_check(model, lambda, profile, bundle);
  const std::vector<double> v = deflators(model, lambda, coarser, bundle);
  if (v.empty() || !std::isfinite(out.mean)) return out;
  out.systematic = std::fabs(quad::pairwise_sum(v) / static_cast<double>(v.size()) - out.mean);
  const double err = std::hypot(out.std_error, out.systematic);
  out.z_score = err > 0.0 ? (out.mean - out.target) / err : 0.0;
  return out;
}

ContainmentReport empirical_bound_check(const DiffusionModel& model, const BoundCurve& curve, double /*lambda*/,
                                        const SolutionProfile& profile, const McSettings& settings) {
  if (curve.xs.size() < 2) throw Error("empirical_bound_check: empty curve");
  const auto drift = transformed_drift(model, profile);
  std::vector<double> cts(curve.xs.size());
  for (std::size_t j = 0; j < cts.size(); ++j) cts[j] = model.to_coord(curve.xs[j]);
  std::vector<std::uint8_t> visited(cts.size() - 1, 0);
  auto visit = [&](std::span<const double> xs, std::span<const std::uint8_t> dead) {
    for (std::size_t j = 0; j < xs.size(); ++j) {
      if (dead[j] || xs[j] < curve.xs.front() || xs[j] > curve.xs.back()) continue;
      visited[locate(cts, model.to_coord(xs[j]))] = 1;
    }
  };
  const PathBundle b = run(model, std::span<const double>(drift), settings.T, settings.n_paths, settings.dt,
                           settings.seed, visit);

  ContainmentReport rep;
  rep.absorbed_fraction = b.absorbed_fraction();
  const std::size_t base = model.interior_begin();
  const auto ss = model.sigma_grid();
  for (std::size_t c = 0; c < visited.size(); ++c) {
    if (!visited[c]) continue;
    ++rep.visited_cells;
    for (std::size_t j : {c, c + 1}) {
      const double theta = ss[base + j] * profile.w[base + j];
      const double excess = std::max(curve.theta_lower[j] - theta, theta - curve.theta_upper[j]);
      if (excess > rep.worst_excess || !std::isfinite(theta)) {
        rep.worst_excess = std::isfinite(theta) ? excess : INFINITY;
        rep.worst_x = curve.xs[j];
        rep.worst_theta = theta;
      }
    }
  }
  rep.contained = rep.worst_excess <= 1e-6;
  return rep;
}

}  // namespace riskbounds
