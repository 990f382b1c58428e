#include <cmath>

#include <doctest.h>

#include "fixtures.hpp"
#include "riskbounds/spectral.hpp"

using namespace riskbounds;

TEST_CASE("Black-Scholes critical eigenvalue") {
  const CriticalEigenvalue b = beta_bar(fixtures::bs());
  CHECK(b.beta_bar == doctest::Approx(0.06125).epsilon(1e-5));
  CHECK(b.existence_at_top);
  CHECK(b.bracket_width <= fixtures::bs().tolerances().lambda);
}

TEST_CASE("Brownian critical eigenvalue is 0") {
  const CriticalEigenvalue b = beta_bar(fixtures::bm());
  CHECK(std::fabs(b.beta_bar) < 1e-6);
}

TEST_CASE("Black-Scholes at zero rate: v^2 / 8") {
  const DiffusionModel m = build_model(fixtures::black_scholes(0.0, 0.2));
  CHECK(beta_bar(m).beta_bar == doctest::Approx(0.005).epsilon(1e-5));
}

TEST_CASE("closed form over a parameter sweep") {
  for (auto [r, v] : {std::pair{0.02, 0.3}, {0.1, 0.25}, {0.03, 0.15}}) {
    CAPTURE(r);
    CAPTURE(v);
    const DiffusionModel m = build_model(fixtures::black_scholes(r, v));
    const double exact = (r + 0.5 * v * v) * (r + 0.5 * v * v) / (2 * v * v);
    CHECK(beta_bar(m).beta_bar == doctest::Approx(exact).epsilon(1e-5));
  }
}

TEST_CASE("existence is monotone in lambda") {
  for (const DiffusionModel* m : {&fixtures::bs(), &fixtures::cir()}) {
    const double beta = beta_bar(*m).beta_bar;
    bool seen_nonempty = false, seen_gap = false;
    for (int k = 1; k <= 16; ++k) {
      const double lambda = beta * (1.0 - k / 16.0);
      const bool nonempty = !candidate_interval(*m, lambda, {.trend = false}).empty;
      if (nonempty && seen_gap) FAIL("non-empty -> empty -> non-empty at lambda=" << lambda);
      if (!nonempty && seen_nonempty) seen_gap = true;
      seen_nonempty = seen_nonempty || nonempty;
    }
    CHECK(seen_nonempty);
    CHECK_FALSE(seen_gap);
    CHECK(candidate_interval(*m, beta * 1.01 + 1e-4, {.trend = false}).empty);
  }
}

TEST_CASE("two grid resolutions agree") {
  ModelConfig c = fixtures::black_scholes();
  const double coarse = beta_bar(build_model(c)).beta_bar;
  c.grid.n_points *= 2;
  const double fine = beta_bar(build_model(c)).beta_bar;
  CHECK(std::fabs(coarse - fine) < 1e-5);
}
