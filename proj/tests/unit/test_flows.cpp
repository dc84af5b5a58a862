#include <doctest.h>

#include <cmath>
#include <iomanip>
#include <sstream>

#include "cartan/errors.hpp"
#include "cartan/flows.hpp"
#include "cartan/parse.hpp"

using namespace cartan;

namespace {

Expr P(const char* s) { return parse_expr(s); }

const double kB[3][2] = {{0.5, -0.25}, {1.0, 0.75}, {-0.5, 0.3}};

std::string dec(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// dz^a + B_a1 dx1 + B_a2 dx2 with numeric B.
VariationalProblem constant_ex1() {
  const BundleChart b({"x1", "x2"}, {"z1", "z2", "z3"});
  std::vector<DiffForm> alpha;
  for (int a = 0; a < 3; ++a) {
    std::vector<Expr> c(5);
    c[0] = parse_expr(dec(kB[a][0]));
    c[1] = parse_expr(dec(kB[a][1]));
    c[2 + a] = Expr(1);
    alpha.push_back(DiffForm::one_form(b.chart(), c));
  }
  return build_problem(b, alpha, Box{});
}

double exp_error(double step) {
  const ChartPtr c = make_chart({"x"});
  const VecField x(c, {P("x")});
  FlowOptions o;
  o.step = step;
  return std::fabs(flow_endpoint(x, {1.0}, 1.0, o)[0] - std::exp(1.0));
}

}  // namespace

TEST_CASE("rk4 step halving on the exponential flow") {
  const double e1 = exp_error(0.1), e2 = exp_error(0.05), e3 = exp_error(0.025);
  CHECK(e1 / e2 >= 8.0);
  CHECK(e2 / e3 >= 8.0);
  CHECK(exp_error(1e-3) < 1e-12);
}

TEST_CASE("rotation flow matches the closed form") {
  const ChartPtr c = make_chart({"x", "y"});
  const VecField rot(c, {P("-y"), P("x")});
  for (double t : {0.3, 1.0, -2.5}) {
    const State e = flow_endpoint(rot, {1.0, 0.5}, t);
    CHECK(e[0] == doctest::Approx(std::cos(t) - 0.5 * std::sin(t)).epsilon(1e-11));
    CHECK(e[1] == doctest::Approx(std::sin(t) + 0.5 * std::cos(t)).epsilon(1e-11));
  }
  const auto path = flow(rot, {1.0, 0.0}, 0.01, FlowOptions{});
  CHECK(path.size() == 11);
}

TEST_CASE("flow leaving the box") {
  const ChartPtr c = make_chart({"x"});
  const VecField x(c, {Expr(1)});
  FlowOptions o;
  o.bounds = Box{};
  try {
    flow_endpoint(x, {0.0}, 2.0, o);
    FAIL("expected BoxExit");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BoxExit);
  }
  CHECK(flow_endpoint(x, {0.0}, 0.5, o)[0] == doctest::Approx(0.5));
}

TEST_CASE("commutation defect") {
  const ChartPtr c = make_chart({"x", "y"});
  const VecField a(c, {Expr(1), Expr(0)}), b(c, {Expr(0), P("1 + x^2")});
  const VecField d(c, {Expr(0), Expr(1)});
  CHECK(commutation_defect(a, d, {0.2, 0.1}, 0.5) < 1e-12);
  // [a, b] = 2x d/dy, so the defect is about t^2 |2x| at first order.
  CHECK(commutation_defect(a, b, {0.2, 0.1}, 0.5) > 0.05);
}

TEST_CASE("constant-coefficient sweep reproduces z = -B x") {
  const auto p = constant_ex1();
  REQUIRE(p.classification.q == 2);
  const Distribution d = annihilator(p.eta, p.box);
  std::map<std::string, Expr, std::less<>> seed;
  for (int a = 0; a < 3; ++a)
    seed["z" + std::to_string(a + 1)] =
        parse_expr("-(" + dec(kB[a][0]) + ")*x1 - (" + dec(kB[a][1]) + ")*x2");
  GridSpec g;
  g.lo = {-1.0, -1.0};
  g.hi = {1.0, 1.0};
  g.counts = {21, 21};
  g.anchor = {0.0, 0.0};
  g.step = 1e-3;
  g.tolerance = 1e-8;
  const SampledPatch patch = sweep_section(p, d, SectionMap(p.bundle, seed), g);
  REQUIRE(patch.nodes.size() == 441);
  double worst = 0.0;
  for (std::size_t i = 0; i < patch.nodes.size(); ++i) {
    const auto& y = patch.nodes[i];
    CHECK(y[0] == doctest::Approx(-1.0 + 0.1 * static_cast<double>(i / 21)));
    CHECK(y[1] == doctest::Approx(-1.0 + 0.1 * static_cast<double>(i % 21)));
    for (int a = 0; a < 3; ++a) worst = std::max(worst, std::fabs(y[2 + a] + kB[a][0] * y[0] + kB[a][1] * y[1]));
    for (int a = 0; a < 3; ++a)
      for (int m = 0; m < 2; ++m) worst = std::max(worst, std::fabs(patch.jets[i][a * 2 + m] + kB[a][m]));
  }
  CHECK(worst < 1e-8);
  CHECK(patch.max_residual < 1e-8);
  CHECK(patch.to_csv().rfind("# provenance,", 0) == 0);
}

TEST_CASE("too few flow axes") {
  const auto p = constant_ex1();
  const Distribution d = annihilator(p.eta, p.box);
  std::map<std::string, Expr, std::less<>> seed;
  for (int a = 0; a < 3; ++a)
    seed["z" + std::to_string(a + 1)] =
        parse_expr("-(" + dec(kB[a][0]) + ")*x1 - (" + dec(kB[a][1]) + ")*x2");
  GridSpec g;
  g.lo = {-0.5, -0.5};
  g.hi = {0.5, 0.5};
  g.counts = {5, 5};
  g.flow_axes = {"x1"};
  g.tolerance = 1e-8;
  // One flow axis against a rank-two distribution is not transversal.
  CHECK_THROWS_AS(sweep_section(p, d, SectionMap(p.bundle, seed), g), Error);
}

TEST_CASE("seed tangent to the characteristic direction") {
  // Maximal degree on (x1, x2 | z | w) whose characteristic field points along x2.
  const BundleChart b({"x1", "x2"}, {"z"}, {"w"});
  const auto c = b.chart();
  DiffForm theta(c, 2);
  theta.add({2, 0}, P("w"));
  theta.add({0, 1}, P("z^2/2 + w^2/2"));
  const auto p = build_problem(b, theta, Box{});
  REQUIRE(p.classification.degree_case == DegreeCase::MaximalDegree);
  const Distribution d = annihilator(p.eta, p.box);
  REQUIRE(d.rank() == 1);
  GridSpec g;
  g.lo = {0.0, 0.0};
  g.hi = {1.0, 1.0};
  g.counts = {3, 1};
  try {
    sweep_section(p, d, SectionMap(b, {{"z", P("0")}, {"w", P("0")}}), g);
    FAIL("expected TangencyViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TangencyViolation);
  }
}

TEST_CASE("off-shell seed trips the residual check") {
  const auto p = constant_ex1();
  const Distribution d = annihilator(p.eta, p.box);
  // Any point seed sweeps onto an integral surface, so perturb through the
  // tolerance instead: a negative tolerance rejects every node.
  std::map<std::string, Expr, std::less<>> seed{{"z1", Expr(0)}, {"z2", Expr(0)}, {"z3", Expr(0)}};
  GridSpec g;
  g.lo = {0.0, 0.0};
  g.hi = {1.0, 1.0};
  g.counts = {2, 2};
  g.tolerance = -1.0;
  try {
    sweep_section(p, d, SectionMap(p.bundle, seed), g);
    FAIL("expected ResidualTooLarge");
  } catch (const ResidualTooLargeError& e) {
    CHECK(e.node().size() == 5);
  }
}
