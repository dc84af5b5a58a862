#include <doctest.h>

#include <random>

#include "cartan/errors.hpp"
#include "cartan/eval.hpp"
#include "cartan/forms.hpp"
#include "cartan/parse.hpp"
#include "support.hpp"

using namespace cartan;
using testing_support::rand_field;
using testing_support::rand_form;
using testing_support::rand_poly;

namespace {
int parity(int a, int b) { return (a * b) % 2 == 0 ? 1 : -1; }
}  // namespace

TEST_CASE("sort sign") {
  MultiIndex a{2, 0, 1};
  CHECK(sort_sign(a) == 1);
  CHECK(a == MultiIndex{0, 1, 2});
  MultiIndex b{1, 0};
  CHECK(sort_sign(b) == -1);
  MultiIndex c{1, 1};
  CHECK(sort_sign(c) == 0);
}

TEST_CASE("d squared vanishes on random forms") {
  const auto chart = make_chart({"x", "y", "z", "u"});
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 60; ++trial) {
    const auto a = rand_form(rng, chart, trial % 3);
    CHECK(ext_d(ext_d(a)).is_zero());
  }
}

TEST_CASE("graded Leibniz rules") {
  const auto chart = make_chart({"x", "y", "z", "u"});
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    const int p = trial % 2 + 1, q = (trial / 2) % 2 + 1;
    const auto a = rand_form(rng, chart, p), b = rand_form(rng, chart, q);
    const auto X = rand_field(rng, chart);
    CHECK(wedge(a, b) == Expr(parity(p, q)) * wedge(b, a));
    CHECK(ext_d(wedge(a, b)) == wedge(ext_d(a), b) + Expr(p % 2 ? -1 : 1) * wedge(a, ext_d(b)));
    CHECK(interior(X, wedge(a, b)) == wedge(interior(X, a), b) + Expr(p % 2 ? -1 : 1) * wedge(a, interior(X, b)));
    CHECK(interior(X, interior(X, wedge(a, b))).is_zero());
  }
}

TEST_CASE("interior product pairs with differentials") {
  const auto chart = make_chart({"x", "y", "z"});
  const auto dx = DiffForm::differential(chart, "x");
  const auto dy = DiffForm::differential(chart, "y");
  const auto X = VecField(chart, {parse_expr("a"), parse_expr("b"), parse_expr("c")});
  CHECK(interior(X, wedge(dx, dy)) == parse_expr("a") * dy - parse_expr("b") * dx);
  CHECK(interior(VecField::coordinate(chart, "y"), DiffForm::volume(chart)) ==
        -DiffForm::monomial(chart, std::vector<std::string>{"x", "z"}));
}

TEST_CASE("Lie derivative of functions is the contraction of df") {
  const auto chart = make_chart({"x", "y", "z"});
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const auto X = rand_field(rng, chart);
    const Expr f = rand_poly(rng, chart->names(), 3);
    const auto df = ext_d(DiffForm::scalar(chart, f));
    CHECK(DiffForm::scalar(chart, lie_derivative(X, f)) == interior(X, df));
  }
}

TEST_CASE("Lie bracket against a finite-difference oracle") {
  const auto chart = make_chart({"x", "y", "z"});
  std::mt19937_64 rng(24);
  const double h = 1e-5;
  const Point p{{"x", 0.3}, {"y", -0.2}, {"z", 0.5}};
  for (int trial = 0; trial < 20; ++trial) {
    const auto X = rand_field(rng, chart), Y = rand_field(rng, chart);
    const auto br = lie_bracket(X, Y);
    for (std::size_t i = 0; i < 3; ++i) {
      // X(Y^i) - Y(X^i) with directional central differences.
      auto directional = [&](const VecField& V, const Expr& f) {
        Point a = p, b = p;
        for (std::size_t j = 0; j < 3; ++j) {
          const double vj = eval(V[j], p);
          a[chart->name(j)] += h * vj;
          b[chart->name(j)] -= h * vj;
        }
        return (eval(f, a) - eval(f, b)) / (2 * h);
      };
      const double want = directional(X, Y[i]) - directional(Y, X[i]);
      CHECK(eval(br[i], p) == doctest::Approx(want).epsilon(1e-6).scale(1.0));
    }
    CHECK((br + lie_bracket(Y, X)).is_zero());
  }
}

TEST_CASE("Hodge star on Euclidean charts") {
  const auto chart = make_chart({"x", "y", "z"});
  const auto dx = DiffForm::differential(chart, "x");
  const auto dy = DiffForm::differential(chart, "y");
  const auto dz = DiffForm::differential(chart, "z");
  CHECK(hodge_star(dx) == wedge(dy, dz));
  CHECK(hodge_star(dy) == wedge(dz, dx));
  CHECK(hodge_star(wedge(dx, dy)) == dz);
  CHECK(hodge_star(DiffForm::scalar(chart, Expr(1))) == DiffForm::volume(chart));
  const auto c4 = make_chart({"a", "b", "c", "d"});
  std::mt19937_64 rng(25);
  for (int p = 0; p <= 4; ++p) {
    const auto f = rand_form(rng, c4, p);
    CHECK(hodge_star(hodge_star(f)) == Expr(parity(p, 4 - p)) * f);
  }
  const VecField X(chart, {parse_expr("y"), parse_expr("-x"), Expr(2)});
  CHECK(dual_one_form(X) == DiffForm::one_form(chart, X.components()));
}

TEST_CASE("pullback commutes with d") {
  const auto src = make_chart({"s", "t"});
  const auto dst = make_chart({"x", "y", "z"});
  std::mt19937_64 rng(26);
  for (int trial = 0; trial < 20; ++trial) {
    ChartMap phi{src, dst, {rand_poly(rng, {"s", "t"}), rand_poly(rng, {"s", "t"}), rand_poly(rng, {"s", "t"})}};
    const auto a = rand_form(rng, dst, trial % 2);
    CHECK(ext_d(pullback(phi, a)) == pullback(phi, ext_d(a)));
  }
}

TEST_CASE("jet pullback becomes the pullback after substitution") {
  const BundleChart b({"x1", "x2"}, {"z1", "z2"}, {"w"});
  std::mt19937_64 rng(27);
  for (int trial = 0; trial < 20; ++trial) {
    std::map<std::string, Expr, std::less<>> vals{
        {"z1", rand_poly(rng, {"x1", "x2"})}, {"z2", rand_poly(rng, {"x1", "x2"})}, {"w", rand_poly(rng, {"x1", "x2"})}};
    const SectionMap phi(b, vals);
    const auto a = rand_form(rng, b.chart(), 2, 4);
    const auto formal = jet_pullback(b, a);
    const auto sub = phi.jet_substitution();
    CHECK(formal.map_coefficients([&](const Expr& c) { return subs(c, sub); }) == pullback(phi, a));
  }
}

TEST_CASE("chart errors") {
  const auto c1 = make_chart({"x", "y"});
  const auto c2 = make_chart({"u", "v"});
  try {
    wedge(DiffForm::differential(c1, "x"), DiffForm::differential(c2, "u"));
    FAIL("expected a chart mismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ChartMismatch);
  }
  const BundleChart b({"x"}, {"z"});
  CHECK_THROWS_AS(SectionMap(b, {{"z", parse_expr("x + z")}}), Error);
  CHECK_THROWS_AS(SectionMap(b, {{"q", parse_expr("x")}}), Error);
}
