#pragma once

// Small numerical helpers shared by several modules: Gauss-Legendre rules,
// log-domain accumulation for integrals whose values overflow a double,
// deterministic summation, and piecewise cubic interpolation.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace riskbounds::quad {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Rule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule (nodes by Newton iteration, cached).
const Rule& gauss_legendre(int n);

// log(exp(a) + exp(b)), exact for -inf operands.
double log_add(double a, double b);

// log of int_0^dt exp(f(s)) ds where f is linear from f0 to f1.
double log_exp_linear(double f0, double f1, double dt);

// Signed number stored as (sign, log|value|).
struct LogSigned {
  int sign = 0;
  double log_abs = kNegInf;

  static LogSigned from_log(double log_abs, int sign = 1) { return {log_abs == kNegInf ? 0 : sign, log_abs}; }
  static LogSigned from_value(double v) {
    if (v == 0.0) return {};
    return {v > 0 ? 1 : -1, std::log(std::fabs(v))};
  }
  double value() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }
};

LogSigned operator+(const LogSigned& a, const LogSigned& b);

// Pairwise summation; the result depends only on the order of `v`.
double pairwise_sum(std::span<const double> v);

// Cubic Hermite interpolant on [t0, t1] at t, from values and slopes.
double hermite(double t0, double t1, double y0, double y1, double d0, double d1, double t);

// Monotone piecewise cubic (Fritsch-Carlson) interpolation of (ts, ys) at t;
// ts strictly increasing, t inside [ts.front(), ts.back()].
double pchip(std::span<const double> ts, std::span<const double> ys, double t);

}  // namespace riskbounds::quad
