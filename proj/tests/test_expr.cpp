#include <cmath>
#include <functional>
#include <random>

#include <doctest.h>

#include "riskbounds/expr.hpp"

using namespace riskbounds;
using namespace riskbounds::expr;

namespace {

Node constant(double v) { return {Op::Constant, v, {}, {}}; }
Node var() { return {Op::Variable, 0.0, {}, {}}; }
Node param(const char* n) { return {Op::Parameter, 0.0, n, {}}; }
Node bin(Op op, Node a, Node b) { return {op, 0.0, {}, {std::move(a), std::move(b)}}; }
Node un(Op op, Node a) { return {op, 0.0, {}, {std::move(a)}}; }

}  // namespace

TEST_CASE("products and powers parse to the expected trees") {
  CHECK(parse("r*x", {"r"}).root() == bin(Op::Mul, param("r"), var()));
  const Node exponent = bin(Op::Div, bin(Op::Mul, un(Op::Neg, constant(2)), param("r")),
                           bin(Op::Mul, param("v"), param("v")));
  CHECK(parse("x^(-2*r/(v*v))", {"r", "v"}).root() == bin(Op::Pow, var(), exponent));
}

TEST_CASE("precedence: power over unary minus over products over sums") {
  CHECK(parse("-x^2").root() == un(Op::Neg, bin(Op::Pow, var(), constant(2))));
  CHECK(parse("1+2*x").root() == bin(Op::Add, constant(1), bin(Op::Mul, constant(2), var())));
  CHECK(parse("2^3^2").root() == bin(Op::Pow, constant(2), bin(Op::Pow, constant(3), constant(2))));
  CHECK(parse("x-1-2").root() == bin(Op::Sub, bin(Op::Sub, var(), constant(1)), constant(2)));
  CHECK(parse("x^-2").eval(2.0, {}) == doctest::Approx(0.25));
}

TEST_CASE("syntax errors carry the offset") {
  try {
    parse("x +");
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.offset() == 3);
  }
  CHECK_THROWS_AS(parse("(x"), SyntaxError);
  CHECK_THROWS_AS(parse("x y"), SyntaxError);
  CHECK_THROWS_AS(parse(""), SyntaxError);
}

TEST_CASE("unknown identifiers are named") {
  try {
    parse("q*x", {"r"});
    FAIL("expected an unknown identifier");
  } catch (const UnknownIdentifier& e) {
    CHECK(e.name() == "q");
    CHECK(e.offset() == 0);
  }
  CHECK_THROWS_AS(parse("foo(x)"), UnknownIdentifier);
}

TEST_CASE("evaluation examples") {
  CHECK(eval(parse("r*x", {"r"}), 2.0, {{"r", 0.05}}) == doctest::Approx(0.10).epsilon(1e-15));
  CHECK(eval(parse("x^(-2.5)"), 1.0, {}) == 1.0);
  CHECK_THROWS_AS(eval(parse("log(x)"), 0.0, {}), DomainError);
}

TEST_CASE("domain errors name the node and are not NaN") {
  try {
    eval(parse("1 + log(x)"), -1.0, {});
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(e.node().find("log") != std::string::npos);
  }
  CHECK_THROWS_AS(eval(parse("x^(-1)"), 0.0, {}), DomainError);
  CHECK_THROWS_AS(eval(parse("sqrt(x)"), -4.0, {}), DomainError);
  CHECK_THROWS_AS(eval(parse("(x-1)^0.5"), 0.0, {}), DomainError);
  CHECK(eval(parse("(x-1)^2"), 0.0, {}) == 1.0);
  CHECK_THROWS_AS(eval(parse("r*x", {"r"}), 1.0, {}), Error);

  const Function f(parse("log(x)"), {});
  std::vector<double> xs{1.0, 2.0, 0.0}, out(3), scratch;
  CHECK_THROWS_AS(f.eval_batch(xs, out, scratch), DomainError);
}

TEST_CASE("bound functions agree with tree evaluation") {
  const Bindings b{{"a", 0.5}, {"b", 0.05}, {"s", 0.1}};
  for (const char* src : {"a*(b-x)", "s*sqrt(x)", "exp(-x*x/2)/sqrt(2*3.141592653589793)", "abs(x-b)^1.5", "-x^2+3"}) {
    const Expression e = parse(src, {"a", "b", "s"});
    const Function f(e, b);
    std::vector<double> xs, out, scratch;
    for (int i = 1; i <= 37; ++i) xs.push_back(0.013 * i * i);
    out.resize(xs.size());
    f.eval_batch(xs, out, scratch);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      CHECK(out[i] == e.eval(xs[i], b));
      CHECK(f(xs[i]) == e.eval(xs[i], b));
    }
  }
  CHECK(Function(parse("2*3+1"), {}).is_constant());
  CHECK_FALSE(Function(parse("2*x"), {}).is_constant());
}

namespace {

struct Sample {
  std::string text;
  std::function<double(double)> f;
};

// Random expressions that stay inside the real domain for x in [0.5, 2].
Sample random_expression(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 9);
  std::uniform_real_distribution<double> coef(0.25, 3.0);
  switch (pick(rng)) {
    case 0: return {"x", [](double x) { return x; }};
    case 1: {
      const double c = std::round(coef(rng) * 1000.0) / 1000.0;
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f", c);
      return {buf, [c](double) { return c; }};
    }
    default: break;
  }
  Sample a = random_expression(rng, depth - 1), b = random_expression(rng, depth - 1);
  switch (std::uniform_int_distribution<int>(0, 7)(rng)) {
    case 0: return {"(" + a.text + ")+(" + b.text + ")", [=](double x) { return a.f(x) + b.f(x); }};
    case 1: return {"(" + a.text + ")-(" + b.text + ")", [=](double x) { return a.f(x) - b.f(x); }};
    case 2: return {"(" + a.text + ")*(" + b.text + ")", [=](double x) { return a.f(x) * b.f(x); }};
    case 3: return {"(" + a.text + ")/(1+abs(" + b.text + "))",
                    [=](double x) { return a.f(x) / (1.0 + std::fabs(b.f(x))); }};
    case 4: return {"exp(-abs(" + a.text + "))", [=](double x) { return std::exp(-std::fabs(a.f(x))); }};
    case 5: return {"log(1+abs(" + a.text + "))", [=](double x) { return std::log(1.0 + std::fabs(a.f(x))); }};
    case 6: return {"sqrt(abs(" + a.text + "))", [=](double x) { return std::sqrt(std::fabs(a.f(x))); }};
    default: return {"(1+abs(" + a.text + "))^1.5", [=](double x) { return std::pow(1.0 + std::fabs(a.f(x)), 1.5); }};
  }
}

}  // namespace

TEST_CASE("randomized corpus against hand composition, and print round trip") {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> ux(0.5, 2.0);
  for (int k = 0; k < 100; ++k) {
    const Sample s = random_expression(rng, 4);
    CAPTURE(s.text);
    const Expression e = parse(s.text);
    const Expression back = parse(e.to_string());
    CHECK(back.root() == e.root());
    const Function f(e, {});
    for (int j = 0; j < 100; ++j) {
      const double x = ux(rng);
      const double want = s.f(x);
      const double got = e.eval(x, {});
      CHECK(std::fabs(got - want) <= 1e-14 * std::max(1.0, std::fabs(want)));
      CHECK(f(x) == got);
    }
  }
}
