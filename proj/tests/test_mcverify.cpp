#include <cmath>
#include <cstring>
#include <numeric>

#include <doctest.h>

#include "fixtures.hpp"
#include "riskbounds/admissibility.hpp"
#include "riskbounds/error.hpp"
#include "riskbounds/mcverify.hpp"
#include "riskbounds/quadrature.hpp"
#include "riskbounds/simd/kernels.hpp"

using namespace riskbounds;

namespace {

struct Stats {
  double mean, se;
};

Stats stats(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = quad::pairwise_sum(v) / n;
  double ss = 0.0;
  for (double e : v) ss += (e - mean) * (e - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

const PathBundle& bs_bundle() {
  static const PathBundle b = simulate(fixtures::bs(), std::nullopt, 1.0, 100000, 1e-3, 42);
  return b;
}

}  // namespace

TEST_CASE("Brownian terminal mean") {
  const PathBundle b = simulate(fixtures::bm(), std::nullopt, 1.0, 100000, 1e-3, 7);
  CHECK(b.absorbed_count == 0);
  const Stats s = stats(b.x_T);
  CHECK(std::fabs(s.mean) < 3.0 / std::sqrt(1e5));
  CHECK(s.se == doctest::Approx(1.0 / std::sqrt(1e5)).epsilon(0.02));
  for (double r : b.int_r) CHECK(r == 0.0);
}

TEST_CASE("discounted Black-Scholes stock is a martingale under Q") {
  const PathBundle& b = bs_bundle();
  CHECK_FALSE(b.warning());
  std::vector<double> v(b.x_T.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(-b.int_r[i]) * b.x_T[i];
  const Stats s = stats(v);
  CHECK(std::fabs(s.mean - 1.0) < 3 * s.se);
  CHECK(b.int_r[0] == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("transformed Black-Scholes drift grows like (r + v^2) x") {
  const DiffusionModel& m = fixtures::bs();
  const auto drift = transformed_drift(m, extremal_solution(m, 0.0, Extremal::Max));
  const PathBundle b = simulate(m, std::span<const double>(drift), 1.0, 100000, 1e-3, 43);
  std::vector<double> v(b.x_T.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = b.x_T[i] * std::exp(-0.09);
  const Stats s = stats(v);
  CHECK(std::fabs(s.mean - 1.0) < 3 * s.se);
}

TEST_CASE("martingale checks") {
  const DiffusionModel& m = fixtures::bs();
  const MartingaleCheck h0 = martingale_check(m, 0.0, extremal_solution(m, 0.0, Extremal::Max), bs_bundle());
  CHECK(std::fabs(h0.z_score) < 3);
  CHECK(h0.target == 1.0);
  const double beta = beta_bar(m).beta_bar;
  const MartingaleCheck hb = martingale_check(m, beta, extremal_solution(m, beta, Extremal::Max), bs_bundle());
  CHECK(std::fabs(hb.z_score) < 3);

  const DiffusionModel& x2 = fixtures::xsq();
  const PathBundle bx = simulate(x2, std::nullopt, 1.0, 100000, 1e-3, 3);
  const auto H = extremal_solution(x2, 0.0, Extremal::Max);
  const auto Hc = extremal_solution(x2, 0.0, Extremal::Max, x2.levels() - 1);
  const MartingaleCheck strict = martingale_check(x2, 0.0, H, Hc, bx);
  CHECK(strict.z_score < -3);
  CHECK(strict.mean < 1.0);

  // Feller verdicts and Monte Carlo never disagree at |z| > 3.
  for (Extremal e : {Extremal::Max, Extremal::Min}) {
    const auto p = extremal_solution(x2, 0.0, e);
    const auto pc = extremal_solution(x2, 0.0, e, x2.levels() - 1);
    const bool admissible = is_admissible(x2, 0.0, p).admissible;
    const double z = martingale_check(x2, 0.0, p, pc, bx).z_score;
    CAPTURE(z);
    CHECK(admissible == (std::fabs(z) <= 3));
  }
  for (Extremal e : {Extremal::Max, Extremal::Min}) {
    const auto p = extremal_solution(m, 0.0, e);
    const auto pc = extremal_solution(m, 0.0, e, m.levels() - 1);
    CHECK(is_admissible(m, 0.0, p).admissible);
    CHECK(std::fabs(martingale_check(m, 0.0, p, pc, bs_bundle()).z_score) <= 3);
  }
}

TEST_CASE("halving dt moves the Black-Scholes deflator mean by less than two standard errors") {
  const DiffusionModel& m = fixtures::bs();
  const auto H = extremal_solution(m, 0.0, Extremal::Max);
  const MartingaleCheck a = martingale_check(m, 0.0, H, simulate(m, std::nullopt, 1.0, 20000, 1e-3, 8));
  const MartingaleCheck b = martingale_check(m, 0.0, H, simulate(m, std::nullopt, 1.0, 20000, 5e-4, 8));
  CHECK(std::fabs(a.mean - b.mean) < 2 * std::hypot(a.std_error, b.std_error));
}

TEST_CASE("identical seeds give identical bundles, across kernel variants too") {
  const DiffusionModel& m = fixtures::cir();
  const PathBundle a = simulate(m, std::nullopt, 1.0, 1000, 1e-3, 99);
  const PathBundle b = simulate(m, std::nullopt, 1.0, 1000, 1e-3, 99);
  CHECK(std::memcmp(a.x_T.data(), b.x_T.data(), a.x_T.size() * sizeof(double)) == 0);
  CHECK(std::memcmp(a.int_r.data(), b.int_r.data(), a.int_r.size() * sizeof(double)) == 0);
  const PathBundle c = simulate(m, std::nullopt, 1.0, 1000, 1e-3, 100);
  CHECK(std::memcmp(a.x_T.data(), c.x_T.data(), a.x_T.size() * sizeof(double)) != 0);
  // A prefix of paths does not depend on how many paths follow.
  const PathBundle d = simulate(m, std::nullopt, 1.0, 300, 1e-3, 99);
  CHECK(std::memcmp(a.x_T.data(), d.x_T.data(), d.x_T.size() * sizeof(double)) == 0);

  const std::string before = simd::kernels().name;
  REQUIRE(simd::select_kernels("scalar"));
  const PathBundle s = simulate(m, std::nullopt, 1.0, 1000, 1e-3, 99);
  if (simd::select_kernels("avx2")) {
    const PathBundle v = simulate(m, std::nullopt, 1.0, 1000, 1e-3, 99);
    CHECK(std::memcmp(s.x_T.data(), v.x_T.data(), s.x_T.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(s.int_r.data(), v.int_r.data(), s.int_r.size() * sizeof(double)) == 0);
  }
  simd::select_kernels(before);
  CHECK(std::memcmp(s.x_T.data(), a.x_T.data(), s.x_T.size() * sizeof(double)) == 0);
}

TEST_CASE("absorption warning") {
  ModelConfig c = fixtures::brownian();
  c.x_min = -0.5;
  c.x_max = 0.5;
  c.grid.refinement_levels = 0;
  const DiffusionModel m = build_model(c);
  const PathBundle b = simulate(m, std::nullopt, 1.0, 2000, 1e-3, 1);
  CHECK(b.absorbed_fraction() > 0.2);
  CHECK(b.warning());
  const MartingaleCheck mc = martingale_check(m, 0.0, integrate_solution(m, 0.0, 0.0), b);
  CHECK(mc.warning);
}

TEST_CASE("simulation arguments are validated") {
  const DiffusionModel& m = fixtures::bs();
  CHECK_THROWS_AS(simulate(m, std::nullopt, 0.0, 10, 1e-3, 1), ConfigError);
  CHECK_THROWS_AS(simulate(m, std::nullopt, 1.0, 10, 0.1, 1), ConfigError);
  CHECK_THROWS_AS(simulate(m, std::nullopt, 1.0, 0, 1e-3, 1), ConfigError);
}

TEST_CASE("empirical containment") {
  const DiffusionModel& m = fixtures::bs();
  const double beta = beta_bar(m).beta_bar;
  BoundInputs in;
  in.beta_bar = beta;
  in.thresholds = compute_thresholds(m, beta);
  const BoundCurve intrinsic = theta_bounds(m, Variant::Intrinsic, in);
  const McSettings mc{5000, 1e-3, 1.0, 17};

  const double lambda = 0.5 * beta;
  const CandidateInterval c = candidate_interval(m, lambda, {.trend = false});
  const auto p = integrate_solution(m, lambda, 0.5 * (c.slope_min + c.slope_max));
  const ContainmentReport r = empirical_bound_check(m, intrinsic, lambda, p, mc);
  CHECK(r.contained);
  CHECK(r.visited_cells > 10);

  const BoundCurve rough = theta_bounds(m, Variant::Rough, in);
  const auto Hb = extremal_solution(m, beta, Extremal::Max);
  const ContainmentReport rb = empirical_bound_check(m, rough, beta, Hb, mc);
  CHECK(rb.contained);
  CHECK(std::fabs(rb.worst_theta + 0.15) < 1e-4);

  // A curve that the pair cannot satisfy is reported with its worst state.
  const BoundCurve nar = theta_bounds(m, Variant::NonAttractedRight, in);
  const ContainmentReport bad = empirical_bound_check(m, nar, lambda, integrate_solution(m, lambda, c.slope_max), mc);
  CHECK_FALSE(bad.contained);
  CHECK(bad.worst_excess > 1e-3);

  const DiffusionModel& b = fixtures::bm();
  BoundInputs bi;
  const BoundCurve zero = theta_bounds(b, Variant::Rough, bi);
  const ContainmentReport rz = empirical_bound_check(b, zero, 0.0, integrate_solution(b, 0.0, 0.0), mc);
  CHECK(rz.contained);
  CHECK(rz.worst_excess <= 1e-12);
}
