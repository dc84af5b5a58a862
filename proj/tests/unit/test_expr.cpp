#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "cartan/errors.hpp"
#include "cartan/eval.hpp"
#include "cartan/expr.hpp"
#include "cartan/parse.hpp"
#include "support.hpp"

using namespace cartan;

namespace {

Expr P(const char* s) { return parse_expr(s); }

// Builds the same random arithmetic both symbolically and as a double
// closure; the closure is the oracle for eval.
struct Pair {
  Expr e;
  std::function<double(const Point&)> f;
};

Pair random_tree(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> op(0, depth > 0 ? 6 : 1), var(0, 2), c(-4, 4);
  const char* names[] = {"x", "y", "z"};
  switch (op(rng)) {
    case 0: {
      const std::string n = names[var(rng)];
      return {Expr::symbol(n), [n](const Point& p) { return p.at(n); }};
    }
    case 1: {
      const int v = c(rng);
      return {Expr(v), [v](const Point&) { return double(v); }};
    }
    case 2: {
      auto a = random_tree(rng, depth - 1), b = random_tree(rng, depth - 1);
      return {a.e + b.e, [a, b](const Point& p) { return a.f(p) + b.f(p); }};
    }
    case 3: {
      auto a = random_tree(rng, depth - 1), b = random_tree(rng, depth - 1);
      return {a.e - b.e, [a, b](const Point& p) { return a.f(p) - b.f(p); }};
    }
    case 4: {
      auto a = random_tree(rng, depth - 1), b = random_tree(rng, depth - 1);
      return {a.e * b.e, [a, b](const Point& p) { return a.f(p) * b.f(p); }};
    }
    case 5: {
      auto a = random_tree(rng, depth - 1);
      return {sin(a.e), [a](const Point& p) { return std::sin(a.f(p)); }};
    }
    default: {
      auto a = random_tree(rng, depth - 1);
      return {pow(a.e, 2), [a](const Point& p) { return a.f(p) * a.f(p); }};
    }
  }
}

}  // namespace

TEST_CASE("parse and print round trip") {
  for (const char* s : {"x + 2*y^3 - 1/2", "sin(x*y) + cos(z)^2", "exp(-x) * ln(y + 2)", "(x - y)^3", "x1*Dz1_x2 - B12"}) {
    const Expr e = P(s);
    CHECK(parse_expr(e.str()) == e);
  }
  CHECK(P("2*x + 3*x") == P("5*x"));
  CHECK(P("(x+y)^2") == P("x^2 + 2*x*y + y^2"));
  CHECK(P("-x^2") == -(P("x") * P("x")));
  CHECK(P("0.25*x") == P("x/4"));
}

TEST_CASE("parse errors carry the offset") {
  try {
    parse_expr("x + * y");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 4);
  }
  CHECK_THROWS_AS(parse_expr("tan(x)"), ParseError);
  CHECK_THROWS_AS(parse_expr("(x + 1"), ParseError);
}

TEST_CASE("eval agrees with direct double arithmetic") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 60; ++trial) {
    const auto t = random_tree(rng, 4);
    const Point p{{"x", u(rng)}, {"y", u(rng)}, {"z", u(rng)}};
    const double want = t.f(p);
    CHECK(eval(t.e, p) == doctest::Approx(want).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("compiled evaluation matches eval") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const auto t = random_tree(rng, 4);
    const CompiledExpr c(t.e, {"x", "y"}, {{"z", 0.3}});
    const double x = u(rng), y = u(rng);
    const double v[] = {x, y};
    CHECK(c(v) == doctest::Approx(eval(t.e, {{"x", x}, {"y", y}, {"z", 0.3}})).epsilon(1e-12));
  }
}

TEST_CASE("derivatives agree with central differences") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double h = 1e-5;
  for (int trial = 0; trial < 40; ++trial) {
    const auto t = random_tree(rng, 3);
    Point p{{"x", u(rng)}, {"y", u(rng)}, {"z", u(rng)}};
    Point a = p, b = p;
    a["x"] += h;
    b["x"] -= h;
    const double fd = (t.f(a) - t.f(b)) / (2 * h);
    CHECK(eval(diff(t.e, "x"), p) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
  }
  CHECK(diff(P("ln(x)"), "x") == P("x^(-1)"));
  CHECK(diff(P("exp(2*x)"), "x") == P("2*exp(2*x)"));
}

TEST_CASE("binomial expansion against Pascal coefficients") {
  const Expr x = Expr::symbol("x"), y = Expr::symbol("y");
  for (int n = 0; n <= 8; ++n) {
    Expr oracle;
    long c = 1;
    for (int k = 0; k <= n; ++k) {
      oracle += Expr(Rational(c)) * pow(x, k) * pow(y, n - k);
      c = c * (n - k) / (k + 1);
    }
    CHECK(pow(x + y, n) == oracle);
  }
}

TEST_CASE("substitution commutes with evaluation") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 30; ++trial) {
    const Expr e = testing_support::rand_poly(rng, {"x", "y"}, 3, 4);
    const Expr g = testing_support::rand_poly(rng, {"y", "z"}, 2, 3);
    const Expr s = subs(e, {{"x", g}});
    const Point p{{"y", 0.4}, {"z", -0.7}};
    Point q = p;
    q["x"] = eval(g, p);
    CHECK(eval(s, p) == doctest::Approx(eval(e, q)).epsilon(1e-10));
  }
}

TEST_CASE("zero testing") {
  CHECK(is_zero(P("(x+y)^2 - x^2 - 2*x*y - y^2")).zero());
  CHECK(is_zero(P("sin(x)^2 + cos(x)^2 - 1"), {}, {true}).zero());
  const auto v = is_zero(P("x*y - 1/1000"));
  CHECK(v.nonzero());
  CHECK(std::abs(eval(P("x*y - 1/1000"), v.witness)) > kZeroThreshold);
  CHECK(canon(P("sin(x)^2 + cos(x)^2"), {true}) == Expr(1));
}

TEST_CASE("exact division and content") {
  CHECK(exact_divide(P("x^2 - y^2"), P("x - y")) == P("x + y"));
  CHECK(!exact_divide(P("x^2 + 1"), P("x - 1")).has_value());
  const auto [c, prim] = content_split(P("6*x^2*y + 4*x*y^2"));
  CHECK(c * prim == P("6*x^2*y + 4*x*y^2"));
  // Content carries the monomial gcd; the primitive part is monic.
  const auto q = exact_divide(c, P("x*y"));
  REQUIRE(q.has_value());
  CHECK(q->is_constant());
  CHECK(prim.terms().front().coeff == Rational(1));
}

TEST_CASE("evaluation errors") {
  CHECK_THROWS_AS(eval(P("1/(x - 1)"), {{"x", 1.0}}), Error);
  try {
    eval(P("1/(x - 1)"), {{"x", 1.0}});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DivisionByZero);
  }
  try {
    eval(P("ln(x)"), {{"x", -1.0}});
    FAIL("expected a domain error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DomainError);
  }
  try {
    eval(P("x + q"), {{"x", 1.0}});
    FAIL("expected an unbound variable");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnboundVariable);
  }
}

TEST_CASE("box samples are deterministic and start at the center") {
  Box b;
  b.ranges["y"] = {2.0, 4.0};
  const auto a = b.sample_points({"x", "y"});
  const auto c = b.sample_points({"x", "y"});
  REQUIRE(a.size() == static_cast<std::size_t>(kDefaultSamples));
  CHECK(a == c);
  CHECK(a[0].at("x") == 0.0);
  CHECK(a[0].at("y") == 3.0);
  for (const auto& p : a) CHECK((p.at("y") >= 2.0 && p.at("y") <= 4.0));
  Box other = b;
  other.seed = 7;
  CHECK(other.sample_points({"x", "y"})[1] != a[1]);
}
