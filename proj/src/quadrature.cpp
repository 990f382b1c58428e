#include "riskbounds/quadrature.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numbers>

namespace riskbounds::quad {

const Rule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, Rule> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  Rule r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::fabs(dz) < 1e-16) break;
    }
    r.nodes[static_cast<std::size_t>(i)] = -z;
    r.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return cache.emplace(n, std::move(r)).first->second;
}

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::fabs(a - b)));
}

double log_exp_linear(double f0, double f1, double dt) {
  if (f0 == kNegInf || f1 == kNegInf) return std::log(0.5 * dt) + log_add(f0, f1);
  const double delta = f1 - f0;
  const double ad = std::fabs(delta);
  if (ad < 1e-10) return std::log(dt) + 0.5 * (f0 + f1);
  // int_0^1 exp(f0 + delta s) ds = exp(max) * (1 - exp(-|delta|)) / |delta|
  return std::log(dt) + std::max(f0, f1) + std::log(-std::expm1(-ad) / ad);
}

LogSigned operator+(const LogSigned& a, const LogSigned& b) {
  if (a.sign == 0) return b;
  if (b.sign == 0) return a;
  if (a.sign == b.sign) return {a.sign, log_add(a.log_abs, b.log_abs)};
  // opposite signs: |a| - |b| with the sign of the larger
  const bool a_big = a.log_abs >= b.log_abs;
  const double big = a_big ? a.log_abs : b.log_abs;
  const double small = a_big ? b.log_abs : a.log_abs;
  if (big == small) return {};
  const double diff = big + std::log(-std::expm1(small - big));
  return {a_big ? a.sign : b.sign, diff};
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

double hermite(double t0, double t1, double y0, double y1, double d0, double d1, double t) {
  const double h = t1 - t0;
  const double s = (t - t0) / h;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * y1 +
         (s3 - s2) * h * d1;
}

double pchip(std::span<const double> ts, std::span<const double> ys, double t) {
  const std::size_t n = ts.size();
  if (n == 1) return ys[0];
  auto it = std::upper_bound(ts.begin(), ts.end(), t);
  std::size_t i = it == ts.begin() ? 0 : static_cast<std::size_t>(it - ts.begin()) - 1;
  if (i >= n - 1) i = n - 2;
  auto secant = [&](std::size_t j) { return (ys[j + 1] - ys[j]) / (ts[j + 1] - ts[j]); };
  auto slope = [&](std::size_t j) {
    if (j == 0) return secant(0);
    if (j == n - 1) return secant(n - 2);
    const double a = secant(j - 1), b = secant(j);
    if (a * b <= 0.0) return 0.0;
    const double ha = ts[j] - ts[j - 1], hb = ts[j + 1] - ts[j];
    const double w1 = 2 * hb + ha, w2 = hb + 2 * ha;
    return (w1 + w2) / (w1 / a + w2 / b);
  };
  return hermite(ts[i], ts[i + 1], ys[i], ys[i + 1], slope(i), slope(i + 1), t);
}

}  // namespace riskbounds::quad
