// Acceptance run: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>

#include "cartan/decomp.hpp"
#include "cartan/errors.hpp"
#include "cartan/fixtures.hpp"
#include "cartan/flows.hpp"
#include "cartan/liouville.hpp"
#include "cartan/parse.hpp"
#include "cartan/varprin.hpp"
#include "support.hpp"

using namespace cartan;
using testing_support::rand_form;
using testing_support::rand_poly;

namespace {

constexpr int kInstances = 50;

struct Outcome {
  bool ok = true;
  std::string note;
};

std::vector<std::string> names(const char* stem, std::size_t n) {
  std::vector<std::string> v;
  for (std::size_t i = 1; i <= n; ++i) v.push_back(stem + std::to_string(i));
  return v;
}

std::vector<DiffForm> normal_factors(std::mt19937_64& rng, const BundleChart& b, std::size_t h) {
  const auto vars = b.chart()->names();
  std::vector<DiffForm> out;
  const std::size_t rows = b.k() + 1;
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<Expr> c(b.n());
    for (std::size_t j = 0; j < b.k(); ++j) c[j] = rand_poly(rng, vars, 1, 2);
    if (i < rows - h) {
      c[b.k() + i] = Expr(1);
      for (std::size_t m = 0; m < b.s(); ++m) c[b.k() + b.p() + m] = rand_poly(rng, vars, 1, 2);
    }
    out.push_back(DiffForm::one_form(b.chart(), c));
  }
  return out;
}

Outcome fixture_outcome(const char* name, std::initializer_list<const char*> required) {
  const auto r = run_fixture(name);
  Outcome o;
  o.ok = r.pass();
  int errata = 0;
  for (const auto& i : r.items) {
    if (!i.pass) o.note += " failed:" + i.item;
    if (i.status == "erratum") ++errata;
  }
  for (const char* item : required) {
    if (!r.find(item)) {
      o.ok = false;
      o.note += " missing:" + std::string(item);
    }
  }
  o.note += " items=" + std::to_string(r.items.size()) + " errata=" + std::to_string(errata);
  return o;
}

Outcome structural() {
  std::mt19937_64 rng(20240601);
  int dd = 0, anti = 0, l5 = 0, l6 = 0, minors = 0, maxdeg = 0, bad = 0;
  const ChartPtr c = make_chart({"u", "v", "w", "x"});
  for (int i = 0; i < kInstances; ++i) {
    if (ext_d(ext_d(rand_form(rng, c, i % 3))).is_zero()) ++dd; else ++bad;
    const int p = 1 + i % 2;
    const DiffForm a = rand_form(rng, c, p), b = rand_form(rng, c, 1 + (i / 2) % 2);
    const VecField x = testing_support::rand_field(rng, c);
    const DiffForm lhs = interior(x, wedge(a, b));
    const DiffForm rhs = wedge(interior(x, a), b) + Expr(p % 2 ? -1 : 1) * wedge(a, interior(x, b));
    if (lhs == rhs) ++anti; else ++bad;
  }
  for (int i = 0; i < kInstances; ++i) {
    const std::size_t k = 2 + i % 2, h = static_cast<std::size_t>(i) % k;
    const BundleChart bc(names("x", k), names("z", k + 1 - h));
    const FactorSet fs = make_factor_set(bc, normal_factors(rng, bc, h));
    const DiffForm eta = fs.eta();
    const auto chi = chi_forms(fs);
    bool ok = true;
    for (std::size_t s = 0; s < bc.p(); ++s) ok = ok && interior(VecField::coordinate(bc.chart(), bc.fiber_z()[s]), eta) == chi[s];
    if (ok) ++l5; else ++bad;
  }
  for (int i = 0; i < kInstances; ++i) {
    const std::size_t k = 1 + i % 2, s = 1 + (i / 2) % 2;
    const BundleChart bc(names("x", k), names("z", k + 1), names("w", s));
    const FactorSet fs = make_factor_set(bc, normal_factors(rng, bc, 0));
    const DiffForm eta = fs.eta();
    const auto chi = chi_forms(fs);
    const auto lm = fs.L();
    bool ok = true;
    for (std::size_t m = 0; m < s; ++m) {
      DiffForm sum(bc.chart(), static_cast<int>(k));
      for (std::size_t j = 0; j < k + 1; ++j) sum += lm[j][bc.p() + m] * chi[j];
      ok = ok && interior(VecField::coordinate(bc.chart(), bc.fiber_w()[m]), eta) == sum;
    }
    if (ok) ++l6; else ++bad;
  }
  for (int i = 0; i < kInstances; ++i) {
    const std::size_t k = 1 + i % 3;
    const bool non_proper = i % 4 == 3;
    const std::size_t h = non_proper ? 0 : static_cast<std::size_t>(i / 3) % k;
    const BundleChart bc(names("x", k), names("z", k + 1 - h), non_proper ? names("w", 1) : std::vector<std::string>{});
    const FactorSet fs = make_factor_set(bc, normal_factors(rng, bc, h));
    const auto chi = chi_forms(fs);
    const ExprMatrix pm = jet_matrix(fs);
    bool ok = true;
    for (std::size_t a = 0; a < bc.p(); ++a) ok = ok && omega_coefficient(bc, chi[a]) == signed_minor(pm, a);
    if (ok) ++minors; else ++bad;
  }
  for (int i = 0; maxdeg < kInstances && i < 4 * kInstances; ++i) {
    const std::size_t k = 1 + i % 2;
    const BundleChart bc(names("x", k), {"z"}, {"w"});
    auto theta = rand_form(rng, bc.chart(), static_cast<int>(k), 4);
    const int iz = static_cast<int>(k);
    theta.add(k == 1 ? MultiIndex{iz} : MultiIndex{iz, 1}, Expr(20) * Expr::symbol("w"));
    try {
      const auto p = build_problem(bc, theta, Box{});
      const VecField w = characteristic_field_maximal_degree(p);
      if (interior(w, ext_d(theta)).is_zero()) ++maxdeg; else ++bad;
    } catch (const Error&) {
    }
  }
  Outcome o;
  o.ok = bad == 0 && std::min({dd, anti, l5, l6, minors, maxdeg}) >= kInstances;
  std::ostringstream os;
  os << " dd=" << dd << " interior=" << anti << " chi=" << l5 << " w-chi=" << l6 << " minors=" << minors
     << " iWdtheta=" << maxdeg;
  o.note = os.str();
  return o;
}

Outcome characteristic_spans() {
  Outcome o;
  for (const char* name : {"example1", "example2"}) {
    const auto spec = fixture_problem(name);
    const auto p = build(spec);
    if (p.classification.proper != Tri::True) continue;
    const Box box = spec.effective_box();
    const Distribution cd = characteristic_distribution(make_ideal(p.psi), box);
    const Distribution ann = annihilator(p.eta, box);
    const std::size_t want = p.bundle.n() - p.bundle.k() - 1;
    const bool ok = cd.rank() == want && ann.rank() == want && same_span(cd.basis, ann.basis, box);
    o.ok = o.ok && ok;
    o.note += " " + std::string(name) + ":rank=" + std::to_string(cd.rank()) + "/" + std::to_string(want);
  }
  return o;
}

Outcome liouville() {
  struct Case {
    std::vector<std::string> phase;
    std::vector<const char*> field;
  };
  const std::vector<Case> cases{
      {{"q", "p"}, {"-p", "q"}},
      {{"a", "b", "c"}, {"b^2 + c", "c^2 - a", "a*b"}},
      {{"a", "b", "c"}, {"a - b*c", "b + a^2", "-2*c"}},
  };
  Outcome o;
  for (const auto& c : cases) {
    LiouvilleSetup s;
    s.phase = c.phase;
    for (const char* f : c.field) s.field.push_back(parse_expr(f));
    try {
      build_theta(s);
      const bool ok = interior(s.z, ext_d(s.theta)).is_zero() && verify_hodge_identity(s);
      o.ok = o.ok && ok;
      o.note += ok ? " ok" : " fail";
    } catch (const Error& e) {
      o.ok = false;
      o.note += std::string(" ") + e.what();
    }
  }
  return o;
}

std::string dec(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

Outcome numeric() {
  const double bm[3][2] = {{0.5, -0.25}, {1.0, 0.75}, {-0.5, 0.3}};
  const BundleChart b({"x1", "x2"}, {"z1", "z2", "z3"});
  std::vector<DiffForm> alpha;
  std::map<std::string, Expr, std::less<>> seed;
  for (int a = 0; a < 3; ++a) {
    std::vector<Expr> c(5);
    c[0] = parse_expr(dec(bm[a][0]));
    c[1] = parse_expr(dec(bm[a][1]));
    c[2 + a] = Expr(1);
    alpha.push_back(DiffForm::one_form(b.chart(), c));
    seed["z" + std::to_string(a + 1)] = parse_expr("-(" + dec(bm[a][0]) + ")*x1 - (" + dec(bm[a][1]) + ")*x2");
  }
  const auto p = build_problem(b, alpha, Box{});
  GridSpec g;
  g.lo = {-1.0, -1.0};
  g.hi = {1.0, 1.0};
  g.counts = {21, 21};
  g.anchor = {0.0, 0.0};
  g.step = 1e-3;
  g.tolerance = 1e-8;
  const auto patch = sweep_section(p, annihilator(p.eta, p.box), SectionMap(b, seed), g);
  double dev = 0.0;
  for (const auto& y : patch.nodes)
    for (int a = 0; a < 3; ++a) dev = std::max(dev, std::fabs(y[2 + a] + bm[a][0] * y[0] + bm[a][1] * y[1]));

  const ChartPtr c = make_chart({"x"});
  const VecField x(c, {Expr::symbol("x")});
  auto err = [&](double step) {
    FlowOptions o;
    o.step = step;
    return std::fabs(flow_endpoint(x, {1.0}, 1.0, o)[0] - std::exp(1.0));
  };
  const double ratio = err(0.1) / err(0.05);

  Outcome o;
  o.ok = patch.nodes.size() == 441 && patch.max_residual < 1e-8 && dev < 1e-8 && ratio >= 8.0;
  std::ostringstream os;
  os << std::setprecision(3) << " nodes=" << patch.nodes.size() << " residual=" << patch.max_residual
     << " deviation=" << dev << " halving=" << ratio;
  o.note = os.str();
  return o;
}

Outcome determinism() {
  auto suite = [] {
    std::string all;
    for (const auto& n : fixture_names()) all += run_fixture(n).to_json();
    return all;
  };
  const std::string a = suite(), b = suite();
  Outcome o;
  o.ok = a == b;
  o.note = " bytes=" + std::to_string(a.size());
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit;  // seconds, 0 = none
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "example1-goldens", 5.0,
       [] { return fixture_outcome("example1", {"eta", "psi1", "psi2", "psi3", "delta1", "delta2", "delta3", "P", "annihilator"}); }},
      {2, "example2-goldens", 5.0,
       [] { return fixture_outcome("example2", {"delta_epsilon", "P", "annihilator", "delta1_display"}); }},
      {3, "example3-goldens", 10.0,
       [] {
         return fixture_outcome("example3", {"psi1", "psi2", "psi3", "psi4", "psi4_combination", "vertical_field",
                                             "tangency_elimination"});
       }},
      {4, "structural-identities", 0.0, structural},
      {5, "characteristic-equals-annihilator", 0.0, characteristic_spans},
      {6, "liouville-suite", 5.0, liouville},
      {7, "numeric-reduction", 30.0, numeric},
      {8, "determinism", 0.0, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.note = std::string(" exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.limit == 0.0 || secs < c.limit;
    const bool pass = o.ok && in_time;
    if (!pass) ++failures;
    std::printf("%s [%d] %s time=%.3fs", pass ? "PASS" : "FAIL", c.id, c.name, secs);
    if (c.limit > 0.0) std::printf(" limit=%.0fs", c.limit);
    std::printf("%s\n", o.note.c_str());
  }
  return failures == 0 ? 0 : 1;
}
