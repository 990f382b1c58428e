#include <cmath>

#include <doctest.h>

#include "fixtures.hpp"
#include "riskbounds/bounds.hpp"
#include "riskbounds/error.hpp"

using namespace riskbounds;

namespace {

const BoundInputs& bs_inputs() {
  static const BoundInputs in = [] {
    const DiffusionModel& m = fixtures::bs();
    BoundInputs b;
    b.beta_bar = beta_bar(m).beta_bar;
    b.thresholds = compute_thresholds(m, b.beta_bar);
    return b;
  }();
  return in;
}

double max_dev(const std::vector<double>& v, double want) {
  double e = 0.0;
  for (double x : v) e = std::max(e, std::fabs(x - want));
  return e;
}

}  // namespace

TEST_CASE("variant names") {
  for (Variant v : kAllVariants) CHECK(parse_variant(to_string(v)) == v);
  CHECK(std::string(to_string(Variant::NonAttractedLeft)) == "non-attracted-left");
  CHECK_FALSE(parse_variant("sharp"));
}

TEST_CASE("Black-Scholes rough and non-attracted curves") {
  const DiffusionModel& m = fixtures::bs();
  const BoundCurve rough = theta_bounds(m, Variant::Rough, bs_inputs());
  CHECK(rough.xs.size() == m.interior_end() - m.interior_begin());
  CHECK(max_dev(rough.theta_lower, -0.5) < 1e-4);
  CHECK(max_dev(rough.theta_upper, 0.2) < 1e-4);

  const BoundCurve nal = theta_bounds(m, Variant::NonAttractedLeft, bs_inputs());
  CHECK(max_dev(nal.theta_lower, -0.15) < 1e-4);
  CHECK(max_dev(nal.theta_upper, 0.2) < 1e-4);

  const BoundCurve intrinsic = theta_bounds(m, Variant::Intrinsic, bs_inputs());
  CHECK(max_dev(intrinsic.theta_lower, -0.5) < 1e-4);
  CHECK(max_dev(intrinsic.theta_upper, 0.2) < 1e-4);

  const BoundCurve nar = theta_bounds(m, Variant::NonAttractedRight, bs_inputs());
  CHECK(max_dev(nar.theta_lower, -0.5) < 1e-4);
  CHECK(max_dev(nar.theta_upper, -0.15) < 1e-4);

  for (const BoundCurve* c : {&rough, &nal, &intrinsic, &nar})
    for (std::size_t i = 0; i < c->xs.size(); ++i) CHECK(c->theta_lower[i] <= c->theta_upper[i] + 1e-8);

  // Non-attracted-left sits inside the rough curve.
  for (std::size_t i = 0; i < nal.xs.size(); ++i) {
    CHECK(nal.theta_lower[i] >= rough.theta_lower[i] - 1e-8);
    CHECK(nal.theta_upper[i] <= rough.theta_upper[i] + 1e-8);
  }
}

TEST_CASE("return bounds") {
  const DiffusionModel& m = fixtures::bs();
  const BoundCurve rough = return_bounds(m, theta_bounds(m, Variant::Rough, bs_inputs()));
  CHECK(max_dev(rough.mu_lower, -0.05) < 1e-4);
  CHECK(max_dev(rough.mu_upper, 0.09) < 1e-4);
  const BoundCurve nal = return_bounds(m, theta_bounds(m, Variant::NonAttractedLeft, bs_inputs()));
  CHECK(max_dev(nal.mu_lower, 0.02) < 1e-4);
  CHECK(max_dev(nal.mu_upper, 0.09) < 1e-4);

  const BoundCurve bm = theta_bounds(fixtures::bm(), Variant::Rough, BoundInputs{});
  CHECK_THROWS_AS(return_bounds(fixtures::bm(), bm), Error);
}

TEST_CASE("Brownian curves collapse to zero") {
  const DiffusionModel& b = fixtures::bm();
  BoundInputs in;
  in.beta_bar = beta_bar(b).beta_bar;
  in.thresholds = compute_thresholds(b, in.beta_bar);
  for (Variant v : kAllVariants) {
    CAPTURE(to_string(v));
    const BoundCurve c = theta_bounds(b, v, in);
    CHECK(max_dev(c.theta_lower, 0.0) < 1e-8);
    CHECK(max_dev(c.theta_upper, 0.0) < 1e-8);
  }
  const auto [lo, hi] = theta_at(b, theta_bounds(b, Variant::Rough, in), 0.0);
  CHECK(std::fabs(lo) < 1e-8);
  CHECK(std::fabs(hi) < 1e-8);
}

TEST_CASE("interpolation at off-grid states") {
  const DiffusionModel& m = fixtures::bs();
  const auto [lo, hi] = theta_at(m, theta_bounds(m, Variant::Rough, bs_inputs()), 3.7);
  CHECK(lo == doctest::Approx(-0.5).epsilon(1e-6));
  CHECK(hi == doctest::Approx(0.2).epsilon(1e-6));
  const auto [nl, nh] = theta_at(m, theta_bounds(m, Variant::NonAttractedLeft, bs_inputs()), 1.0);
  CHECK(std::fabs(nl + 0.15) < 1e-4);
  CHECK(nh == doctest::Approx(0.2).epsilon(1e-6));
  CHECK_THROWS_AS(theta_at(m, theta_bounds(m, Variant::Rough, bs_inputs()), 1e5), Error);
}

TEST_CASE("intrinsic needs both thresholds") {
  BoundInputs in = bs_inputs();
  in.thresholds.L_cap.reset();
  CHECK_THROWS_AS(theta_bounds(fixtures::bs(), Variant::Intrinsic, in), UnresolvedError);
}

TEST_CASE("admissible pairs inside the candidate set respect the intrinsic curve") {
  const DiffusionModel& m = fixtures::bs();
  const BoundCurve intrinsic = theta_bounds(m, Variant::Intrinsic, bs_inputs());
  for (double frac : {0.2, 0.5, 0.9}) {
    const double lambda = frac * bs_inputs().beta_bar;
    const CandidateInterval c = candidate_interval(m, lambda, {.trend = false});
    for (double t : {0.25, 0.5, 0.75}) {
      const auto p = integrate_solution(m, lambda, c.slope_min + t * (c.slope_max - c.slope_min));
      REQUIRE(is_admissible(m, lambda, p).admissible);
      for (std::size_t j = 0; j < intrinsic.xs.size(); ++j) {
        const std::size_t i = m.interior_begin() + j;
        const double theta = m.sigma_grid()[i] * p.w[i];
        CHECK(theta >= intrinsic.theta_lower[j] - 1e-6);
        CHECK(theta <= intrinsic.theta_upper[j] + 1e-6);
      }
    }
  }
}

TEST_CASE("closed-form note only for geometric Brownian dynamics") {
  const auto note = closed_form_note(fixtures::bs());
  REQUIRE(note);
  CHECK(note->find("-0.15") != std::string::npos);
  CHECK(note->find("misprint") != std::string::npos);
  CHECK_FALSE(closed_form_note(fixtures::cir()));
  CHECK_FALSE(closed_form_note(fixtures::bm()));
}
