// Compiled with -mavx2 only; never called unless the CPU reports AVX2.
#include <immintrin.h>

#include <cmath>

#include "riskbounds/simd/kernels.hpp"

namespace riskbounds::simd {
namespace {

constexpr std::size_t kLanes = 4;

template <class VecOp, class ScalarOp>
inline void binary(const double* a, const double* b, double* out, std::size_t n, VecOp vop,
                   ScalarOp sop) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    __m256d va = _mm256_loadu_pd(a + i);
    __m256d vb = _mm256_loadu_pd(b + i);
    _mm256_storeu_pd(out + i, vop(va, vb));
  }
  for (; i < n; ++i) out[i] = sop(a[i], b[i]);
}

void add(const double* a, const double* b, double* out, std::size_t n) {
  binary(a, b, out, n, [](__m256d x, __m256d y) { return _mm256_add_pd(x, y); },
         [](double x, double y) { return x + y; });
}
void sub(const double* a, const double* b, double* out, std::size_t n) {
  binary(a, b, out, n, [](__m256d x, __m256d y) { return _mm256_sub_pd(x, y); },
         [](double x, double y) { return x - y; });
}
void mul(const double* a, const double* b, double* out, std::size_t n) {
  binary(a, b, out, n, [](__m256d x, __m256d y) { return _mm256_mul_pd(x, y); },
         [](double x, double y) { return x * y; });
}
void div(const double* a, const double* b, double* out, std::size_t n) {
  binary(a, b, out, n, [](__m256d x, __m256d y) { return _mm256_div_pd(x, y); },
         [](double x, double y) { return x / y; });
}

void neg(const double* a, double* out, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes)
    _mm256_storeu_pd(out + i, _mm256_xor_pd(_mm256_loadu_pd(a + i), sign));
  for (; i < n; ++i) out[i] = -a[i];
}

void abs(const double* a, double* out, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes)
    _mm256_storeu_pd(out + i, _mm256_andnot_pd(sign, _mm256_loadu_pd(a + i)));
  for (; i < n; ++i) out[i] = std::fabs(a[i]);
}

void sqrt(const double* a, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes)
    _mm256_storeu_pd(out + i, _mm256_sqrt_pd(_mm256_loadu_pd(a + i)));
  for (; i < n; ++i) out[i] = std::sqrt(a[i]);
}

void mul_add(const double* a, const double* b, const double* c, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(b + i), _mm256_loadu_pd(c + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), prod));
  }
  for (; i < n; ++i) out[i] = a[i] + b[i] * c[i];
}

void em_step(double* x, const double* drift, const double* vol, const double* z, double dt,
             double sqrt_dt, std::size_t n) {
  const __m256d vdt = _mm256_set1_pd(dt);
  const __m256d vsq = _mm256_set1_pd(sqrt_dt);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    __m256d vx = _mm256_loadu_pd(x + i);
    __m256d d = _mm256_mul_pd(_mm256_loadu_pd(drift + i), vdt);
    __m256d s = _mm256_mul_pd(_mm256_loadu_pd(vol + i),
                              _mm256_mul_pd(vsq, _mm256_loadu_pd(z + i)));
    _mm256_storeu_pd(x + i, _mm256_add_pd(_mm256_add_pd(vx, d), s));
  }
  for (; i < n; ++i) x[i] = x[i] + drift[i] * dt + vol[i] * (sqrt_dt * z[i]);
}

void trapezoid_accumulate(double* acc, const double* r0, const double* r1, double half_dt,
                          std::size_t n) {
  const __m256d vh = _mm256_set1_pd(half_dt);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    __m256d sum = _mm256_add_pd(_mm256_loadu_pd(r0 + i), _mm256_loadu_pd(r1 + i));
    _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), _mm256_mul_pd(vh, sum)));
  }
  for (; i < n; ++i) acc[i] = acc[i] + half_dt * (r0[i] + r1[i]);
}

}  // namespace

const KernelTable& avx2_kernel_table() {
  static const KernelTable table{"avx2",   add,     sub,     mul,
                                 div,      neg,     abs,     sqrt,
                                 mul_add,  em_step, trapezoid_accumulate};
  return table;
}

}  // namespace riskbounds::simd
