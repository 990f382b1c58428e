#pragma once

// Element-wise array kernels for the data-parallel inner loops: batch
// expression evaluation over grids and path bundles, the Euler-Maruyama
// update, and running time integrals.  Every kernel has a scalar reference
// implementation; vector variants are selected at runtime and must round
// bit-for-bit like the reference (no FMA contraction, same operation order).

#include <cstddef>
#include <string_view>

namespace riskbounds::simd {

struct KernelTable {
  const char* name;

  // out[i] = a[i] (op) b[i].  `out` may alias `a` or `b`.
  void (*add)(const double* a, const double* b, double* out, std::size_t n);
  void (*sub)(const double* a, const double* b, double* out, std::size_t n);
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  void (*div)(const double* a, const double* b, double* out, std::size_t n);

  void (*neg)(const double* a, double* out, std::size_t n);
  void (*abs)(const double* a, double* out, std::size_t n);
  void (*sqrt)(const double* a, double* out, std::size_t n);

  // out[i] = a[i] + b[i] * c[i]
  void (*mul_add)(const double* a, const double* b, const double* c, double* out,
                  std::size_t n);

  // x[i] = x[i] + drift[i] * dt + vol[i] * (sqrt_dt * z[i])
  void (*em_step)(double* x, const double* drift, const double* vol, const double* z,
                  double dt, double sqrt_dt, std::size_t n);

  // acc[i] = acc[i] + half_dt * (r0[i] + r1[i])
  void (*trapezoid_accumulate)(double* acc, const double* r0, const double* r1,
                               double half_dt, std::size_t n);
};

// Kernels chosen for this process: the best variant the CPU supports unless
// RISKBOUNDS_SIMD=scalar is set in the environment.
const KernelTable& kernels();

const KernelTable& scalar_kernels();

// Null when the AVX2 variant was not compiled in or the CPU lacks AVX2.
const KernelTable* avx2_kernels();

// Force a variant by name ("scalar" or "avx2"); returns false if unavailable.
bool select_kernels(std::string_view name);

}  // namespace riskbounds::simd
