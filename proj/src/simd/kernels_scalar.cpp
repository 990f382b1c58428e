#include <cmath>

#include "riskbounds/simd/kernels.hpp"

namespace riskbounds::simd {
namespace {

void add(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}
void sub(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}
void mul(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}
void div(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] / b[i];
}
void neg(const double* a, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = -a[i];
}
void abs(const double* a, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::fabs(a[i]);
}
void sqrt(const double* a, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::sqrt(a[i]);
}
void mul_add(const double* a, const double* b, const double* c, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i] * c[i];
}
void em_step(double* x, const double* drift, const double* vol, const double* z, double dt,
             double sqrt_dt, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = x[i] + drift[i] * dt + vol[i] * (sqrt_dt * z[i]);
}
void trapezoid_accumulate(double* acc, const double* r0, const double* r1, double half_dt,
                          std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] = acc[i] + half_dt * (r0[i] + r1[i]);
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar", add,     sub,     mul,
                                 div,      neg,     abs,     sqrt,
                                 mul_add,  em_step, trapezoid_accumulate};
  return table;
}

}  // namespace riskbounds::simd
