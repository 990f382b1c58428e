#include <cmath>

#include <doctest.h>

#include "fixtures.hpp"
#include "riskbounds/error.hpp"

using namespace riskbounds;

namespace {

const char* kMinimal = R"({"k": "0", "sigma": "1", "rate": "0.1", "interval": ["-inf", "inf"],
                           "xi": 0, "truncation": [-5, 5]})";

}  // namespace

TEST_CASE("the shipped configs parse") {
  const ModelConfig bs = fixtures::config("bs");
  CHECK(bs.name == "black-scholes");
  CHECK(bs.parameters.at("r") == 0.05);
  CHECK(bs.c == 0.0);
  CHECK(std::isinf(bs.d));
  CHECK(bs.grid.spacing == Spacing::Logarithmic);
  CHECK(bs.state_is_asset);
  CHECK(bs.mc.n_paths == 100000);
  const ModelConfig bm = fixtures::config("brownian");
  CHECK(bm.c == -INFINITY);
  CHECK(bm.grid.spacing == Spacing::Uniform);
  CHECK_FALSE(bm.state_is_asset);
}

TEST_CASE("defaults apply to omitted sections") {
  const ModelConfig c = parse_config(kMinimal);
  CHECK(c.grid.n_points == GridPolicy{}.n_points);
  CHECK(c.tolerances.lambda == Tolerances{}.lambda);
  CHECK_FALSE(c.state_is_asset);
  CHECK_FALSE(c.allow_zero_rate);
}

TEST_CASE("malformed documents are configuration errors") {
  CHECK_THROWS_AS(parse_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_config("[]"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"k": "0"})"), doctest::Contains("missing required key"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"k": "0", "sigma": "1", "rate": "0.1", "interval": [0, 1],
                                        "xi": 0.5, "truncation": [0.1, 0.9], "gird": {}})"),
                       doctest::Contains("gird"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"k": 0, "sigma": "1", "rate": "0.1", "interval": [0, 1],
                                   "xi": 0.5, "truncation": [0.1, 0.9]})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"k": "0", "sigma": "1", "rate": "0.1", "interval": [0],
                                   "xi": 0.5, "truncation": [0.1, 0.9]})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"k": "0", "sigma": "1", "rate": "0.1", "interval": [0, 1],
                                   "xi": 0.5, "truncation": [0.1, "inf"]})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"k": "0", "sigma": "1", "rate": "0.1", "interval": [0, 1],
                                   "xi": 0.5, "truncation": [0.1, 0.9], "grid": {"spacing": "cubic"}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"k": "0", "sigma": "1", "rate": "0.1", "interval": [0, 1],
                                   "xi": 0.5, "truncation": [0.1, 0.9], "grid": {"n_points": 12.5}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"parameters": {"x": 1}, "k": "0", "sigma": "1", "rate": "0.1",
                                   "interval": [0, 1], "xi": 0.5, "truncation": [0.1, 0.9]})"),
                  ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/model.json"), ConfigError);
}
