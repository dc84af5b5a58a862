#include <doctest.h>

#include <random>

#include "cartan/errors.hpp"
#include "cartan/liouville.hpp"
#include "cartan/parse.hpp"
#include "support.hpp"

using namespace cartan;

namespace {

LiouvilleSetup setup(std::vector<std::string> phase, std::vector<const char*> field) {
  LiouvilleSetup s;
  s.phase = std::move(phase);
  for (const char* f : field) s.field.push_back(parse_expr(f));
  return s;
}

Expr divergence(const LiouvilleSetup& s) {
  Expr d;
  for (std::size_t i = 0; i < s.phase.size(); ++i) d += diff(s.field[i], s.phase[i]);
  return d;
}

}  // namespace

TEST_CASE("volume-preserving fields") {
  struct Case {
    std::vector<std::string> phase;
    std::vector<const char*> field;
  };
  const std::vector<Case> cases{
      {{"q", "p"}, {"-p", "q"}},
      {{"a", "b", "c"}, {"b^2 + c", "c^2 - a", "a*b"}},
      {{"a", "b", "c"}, {"a - b*c", "b + a^2", "-2*c"}},
  };
  for (const auto& c : cases) {
    auto s = setup(c.phase, c.field);
    REQUIRE(divergence(s).is_zero());
    const auto p = build_theta(s);
    CHECK(p.classification.degree_case == DegreeCase::MaximalDegree);
    CHECK(interior(s.z, ext_d(s.theta)).is_zero());
    CHECK(verify_hodge_identity(s));
    CHECK_FALSE(verify_hodge_identity(s, -s.sign));
    CHECK(ext_d(s.sigma) == s.omega);
    CHECK(ext_d(s.gamma) == interior(VecField(s.phase_chart, s.field), s.omega));
    CHECK(is_liouville(VecField(s.phase_chart, s.field), s.omega));
  }
}

TEST_CASE("rotation theta") {
  auto s = setup({"q", "p"}, {"-p", "q"});
  build_theta(s);
  // sigma = (q dp - p dq)/2 and gamma = -(q^2 + p^2)/2.
  const auto c = s.phase_chart;
  const DiffForm sigma = DiffForm::one_form(c, {parse_expr("-p/2"), parse_expr("q/2")});
  CHECK(s.sigma == sigma);
  CHECK(s.gamma == DiffForm::scalar(c, parse_expr("-(q^2 + p^2)/2")));
}

TEST_CASE("is_liouville agrees with the divergence") {
  std::mt19937_64 rng(7);
  const ChartPtr c = make_chart({"a", "b", "c"});
  const DiffForm omega = DiffForm::volume(c);
  int liouville = 0;
  for (int i = 0; i < 40; ++i) {
    VecField x = testing_support::rand_field(rng, c);
    if (i % 2 == 0) {
      // Divergence-free: drop c from the first two components and cancel
      // their divergence with the third.
      const Expr x0 = subs(x[0], {{"c", Expr(0)}}), x1 = subs(x[1], {{"c", Expr(0)}});
      x = VecField(c, {x0, x1, -((diff(x0, "a") + diff(x1, "b")) * Expr::symbol("c"))});
    }
    Expr div;
    for (std::size_t j = 0; j < 3; ++j) div += diff(x[j], c->name(j));
    CHECK(is_liouville(x, omega) == div.is_zero());
    if (div.is_zero()) ++liouville;
  }
  CHECK(liouville >= 20);
}

TEST_CASE("homotopy operator inverts d on exact forms") {
  std::mt19937_64 rng(11);
  const ChartPtr c = make_chart({"u", "v", "w"});
  for (int i = 0; i < 50; ++i) {
    const DiffForm beta = ext_d(testing_support::rand_form(rng, c, i % 2));
    if (beta.is_zero()) continue;
    CHECK(ext_d(homotopy_antiderivative(beta)) == beta);
  }
  CHECK_THROWS_AS(homotopy_antiderivative(DiffForm::one_form(c, {parse_expr("v"), Expr(0), Expr(0)})), Error);
}

TEST_CASE("non-Liouville field") {
  auto s = setup({"q", "p"}, {"q", "p"});
  try {
    build_theta(s);
    FAIL("expected NotClosed");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotClosed);
  }
  const ChartPtr c = make_chart({"q", "p"});
  CHECK_FALSE(is_liouville(VecField(c, {parse_expr("q"), parse_expr("p")}), DiffForm::volume(c)));
}

TEST_CASE("zero field gives theta = sigma") {
  auto s = setup({"q", "p", "r"}, {"0", "0", "0"});
  build_theta(s);
  CHECK(s.gamma.is_zero());
  DiffForm sigma_ext(s.extended_chart, 2);
  for (const auto& [idx, coeff] : s.sigma.terms()) {
    MultiIndex shifted;
    for (int i : idx) shifted.push_back(i + 1);
    sigma_ext.add(shifted, coeff);
  }
  CHECK(s.theta == sigma_ext);
}

TEST_CASE("non-polynomial coefficient") {
  const ChartPtr c = make_chart({"q", "p"});
  const DiffForm beta = DiffForm::one_form(c, {parse_expr("cos(q)"), Expr(0)});
  try {
    homotopy_antiderivative(beta);
    FAIL("expected NonPolynomialCoefficient");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonPolynomialCoefficient);
  }
}
