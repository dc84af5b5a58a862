#include "cartan/fixtures.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "cartan/errors.hpp"
#include "cartan/parse.hpp"

namespace cartan {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;
using Subst = std::map<std::string, Expr, std::less<>>;

constexpr std::pair<std::string_view, std::string_view> kFixtures[] = {
#include "cartan_fixture_data.inc"
};

std::string matrix_str(const ExprMatrix& m) {
  std::string s = "[";
  for (std::size_t i = 0; i < m.size(); ++i) {
    s += i ? "; " : "";
    for (std::size_t j = 0; j < m[i].size(); ++j) s += (j ? ", " : "") + m[i][j].str();
  }
  return s + "]";
}

// Permutations of `items`, each with its sign.
void for_each_permutation(std::vector<int> items, const std::function<void(const std::vector<int>&, int)>& fn) {
  std::sort(items.begin(), items.end());
  do {
    MultiIndex copy(items.begin(), items.end());
    const int sign = sort_sign(copy);
    fn(items, sign);
  } while (std::next_permutation(items.begin(), items.end()));
}

class Runner {
 public:
  Runner(const json& doc, ProblemSpec spec) : doc_(doc), spec_(std::move(spec)) {
    box_ = spec_.effective_box();
    if (doc_.contains("definitions"))
      for (const auto& [k, v] : doc_["definitions"].items()) defs_[k] = parse_expr(v.get<std::string>());
    if (doc_.contains("errata"))
      for (const auto& e : doc_["errata"]) errata_[e.at("item").get<std::string>()] = e;
  }

  FixtureReport run() {
    FixtureReport r;
    r.name = spec_.name;
    r.title = doc_.value("title", "");
    r.seed = box_.seed;
    try {
      p_ = build(spec_);
    } catch (const std::exception& e) {
      r.items.push_back({"build", "build", "mismatch", false, e.what(), "", ""});
      return r;
    }
    for (const auto& g : doc_.value("golden", json::array())) {
      FixtureItem it;
      it.item = g.at("item").get<std::string>();
      it.kind = g.at("kind").get<std::string>();
      try {
        check(g, it);
      } catch (const std::exception& e) {
        it.status = "mismatch";
        it.pass = false;
        it.detail = std::string("error: ") + e.what();
      }
      r.items.push_back(std::move(it));
    }
    return r;
  }

 private:
  Expr golden_expr(const json& j) const {
    if (j.is_number_integer()) return Expr(j.get<int>());
    return subs(parse_expr(j.get<std::string>()), defs_);
  }

  DiffForm golden_form(const json& terms) const {
    return parse_form_spec(terms.dump(), chart()).map_coefficients([&](const Expr& c) { return subs(c, defs_); });
  }

  const ChartPtr& chart() const { return p_->bundle.chart(); }

  static std::size_t suffix_index(const std::string& of, std::string_view stem) {
    if (of.rfind(stem, 0) != 0) throw Error(ErrorKind::InvalidArgument, "unknown target '" + of + "'");
    const int i = std::stoi(of.substr(stem.size()));
    if (i < 1) throw Error(ErrorKind::InvalidArgument, "index in '" + of + "' must be positive");
    return static_cast<std::size_t>(i - 1);
  }

  DiffForm engine_form(const std::string& of) const {
    if (of == "eta") return p_->eta;
    return p_->psi.at(suffix_index(of, "psi"));
  }

  const CriticalEquations& equations() {
    if (!eq_) eq_ = critical_equations(*p_);
    return *eq_;
  }

  const json* erratum(const std::string& item) const {
    auto it = errata_.find(item);
    return it == errata_.end() ? nullptr : &it->second;
  }

  static void finish(FixtureItem& it, bool equal, const json* err, const std::function<bool(const json&)>& explains,
                     const std::string& printed, const std::string& engine) {
    if (equal && !err) {
      it.status = "match";
      it.pass = true;
      return;
    }
    it.printed = printed;
    it.engine = engine;
    if (equal) {
      it.status = "mismatch";
      it.detail = "display matches the engine but an erratum is recorded";
      return;
    }
    if (err && explains(*err)) {
      it.status = "erratum";
      it.pass = true;
      it.detail = err->value("note", "");
      return;
    }
    it.status = "mismatch";
    it.detail = err ? "recorded erratum does not account for the difference" : "display differs from the engine";
  }

  void check(const json& g, FixtureItem& it) {
    const std::string& kind = it.kind;
    const json* err = erratum(it.item);
    if (kind == "form") {
      const DiffForm engine = engine_form(g.at("of"));
      const DiffForm printed = golden_form(g.at("terms"));
      finish(it, engine == printed, err, [&](const json& e) {
        return e.value("kind", "") == "correction" && printed + golden_form(e.at("terms")) == engine;
      }, printed.str(), engine.str());
    } else if (kind == "wedge") {
      const DiffForm engine = engine_form(g.at("of"));
      std::vector<DiffForm> fs;
      for (const auto& i : g.at("factors")) fs.push_back(spec_.factors.at(i.get<std::size_t>() - 1));
      const DiffForm printed = Expr(g.at("sign").get<int>()) * wedge_all(fs);
      finish(it, engine == printed, err, [](const json&) { return false; }, printed.str(), engine.str());
    } else if (kind == "combination") {
      const DiffForm engine = engine_form(g.at("of"));
      DiffForm sum(chart(), engine.degree());
      const auto& cs = g.at("coefficients");
      const auto& ts = g.at("terms_of");
      for (std::size_t i = 0; i < cs.size(); ++i) sum += golden_expr(cs[i]) * engine_form(ts.at(i));
      finish(it, engine == sum, err, [](const json&) { return false; }, sum.str(), engine.str());
    } else if (kind == "expr") {
      const auto& eq = equations();
      const std::size_t a = suffix_index(g.at("of"), "delta");
      const Expr engine = eq.delta.at(a);
      const Expr printed = golden_expr(g.at("value"));
      finish(it, engine == printed, err, [&](const json& e) {
        if (e.value("kind", "") == "correction") return printed + golden_expr(e.at("value")) == engine;
        if (e.value("kind", "") == "transposed") {
          const Expr m = transposed_minor(eq.P, a);
          return printed == m || printed == -m;
        }
        return false;
      }, printed.str(), engine.str());
    } else if (kind == "matrix") {
      const ExprMatrix& engine = equations().P;
      ExprMatrix printed;
      for (const auto& row : g.at("rows")) {
        printed.emplace_back();
        for (const auto& c : row) printed.back().push_back(golden_expr(c));
      }
      finish(it, engine == printed, err, [&](const json& e) {
        return e.value("kind", "") == "transposed" && transpose_top(printed) == engine;
      }, matrix_str(printed), matrix_str(engine));
    } else if (kind == "epsilon_delta") {
      check_epsilon(g, it);
    } else if (kind == "span") {
      check_span(g, it);
    } else if (kind == "classification") {
      check_classification(g, it);
    } else if (kind == "characteristic_span") {
      check_characteristic_span(it);
    } else if (kind == "tangency") {
      check_tangency(g, it);
    } else {
      throw Error(ErrorKind::InvalidArgument, "unknown golden kind '" + kind + "'");
    }
  }

  // Square top block transposed, remaining rows kept.
  static ExprMatrix transpose_top(const ExprMatrix& m) {
    if (m.empty()) return m;
    const std::size_t k = m[0].size();
    if (m.size() < k) return m;
    ExprMatrix out = m;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) out[i][j] = m[j][i];
    return out;
  }

  static Expr transposed_minor(const ExprMatrix& p, std::size_t a) {
    ExprMatrix q = transpose_top(p);
    q.erase(q.begin() + static_cast<std::ptrdiff_t>(a));
    return determinant(q);
  }

  void check_epsilon(const json& g, FixtureItem& it) {
    const auto& eq = equations();
    std::vector<std::vector<Expr>> cols;
    for (const auto& c : g.at("columns")) {
      cols.emplace_back();
      for (const auto& e : c) cols.back().push_back(golden_expr(e));
    }
    std::vector<Expr> extra;
    if (g.contains("extra_row"))
      for (const auto& e : g["extra_row"]) extra.push_back(golden_expr(e));
    const Expr scale = golden_expr(g.value("scale", json("1")));
    const std::size_t p = cols.at(0).size();
    const std::size_t k = cols.size();

    std::vector<int> fiber(p), base(k);
    std::iota(fiber.begin(), fiber.end(), 0);
    std::iota(base.begin(), base.end(), 0);
    bool ok = true;
    std::string printed_all, engine_all;
    for (std::size_t a = 0; a < p; ++a) {
      Expr sum;
      for_each_permutation(fiber, [&](const std::vector<int>& s, int sgn) {
        if (s[0] != static_cast<int>(a)) return;
        if (extra.empty()) {
          Expr t(sgn);
          for (std::size_t j = 1; j < p; ++j) t *= cols.at(j - 1)[static_cast<std::size_t>(s[j])];
          sum += t;
          return;
        }
        for_each_permutation(base, [&](const std::vector<int>& tau, int sgn2) {
          Expr t(sgn * sgn2);
          for (std::size_t j = 1; j < p; ++j) t *= cols.at(static_cast<std::size_t>(tau[j - 1]))[static_cast<std::size_t>(s[j])];
          for (std::size_t j = p - 1; j < k; ++j) t *= extra.at(static_cast<std::size_t>(tau[j]));
          sum += t;
        });
      });
      const Expr want = scale * eq.delta.at(a);
      if (sum != want) ok = false;
      printed_all += (a ? " | " : "") + sum.str();
      engine_all += (a ? " | " : "") + want.str();
    }
    finish(it, ok, erratum(it.item), [](const json&) { return false; }, printed_all, engine_all);
    if (it.pass) it.detail = "epsilon form = " + scale.str() + " x signed minor";
  }

  void check_span(const json& g, FixtureItem& it) {
    const std::string of = g.at("of");
    std::vector<VecField> golden;
    for (const auto& f : g.at("fields")) {
      std::vector<Expr> comps(chart()->dim());
      for (const auto& [coord, e] : f.items()) {
        auto i = chart()->index_of(coord);
        if (!i) throw Error(ErrorKind::InvalidArgument, "unknown coordinate '" + coord + "'");
        comps[*i] = golden_expr(e);
      }
      golden.emplace_back(chart(), std::move(comps));
    }
    std::vector<VecField> engine;
    if (of == "annihilator") {
      engine = annihilator(p_->eta, box_).basis;
    } else if (of == "vertical") {
      engine = check_proper(*p_, box_).vertical_annihilators;
    } else {
      throw Error(ErrorKind::InvalidArgument, "unknown distribution '" + of + "'");
    }
    const bool equal = engine.size() == golden.size() && same_span(engine, golden, box_);
    auto join = [](const std::vector<VecField>& v) {
      std::string s;
      for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " | " : "") + v[i].str();
      return s;
    };
    finish(it, equal, erratum(it.item), [](const json&) { return false; }, join(golden), join(engine));
    it.detail = "rank " + std::to_string(engine.size()) + ", span compared at " + std::to_string(box_.samples) +
                " samples" + (it.detail.empty() ? "" : "; " + it.detail);
  }

  void check_classification(const json& g, FixtureItem& it) {
    const Classification& c = p_->classification;
    std::ostringstream os;
    os << "case=" << degree_case_name(c.degree_case) << " proper=" << tri_name(c.proper) << " q=" << c.q
       << " h=" << c.h << " r=" << c.r;
    std::ostringstream want;
    want << "case=" << g.at("degree_case").get<std::string>()
         << " proper=" << (g.at("proper").get<bool>() ? "True" : "False") << " q=" << g.at("q").get<int>()
         << " h=" << g.at("h").get<int>();
    const bool equal = degree_case_name(c.degree_case) == g.at("degree_case").get<std::string>() &&
                       c.proper == (g.at("proper").get<bool>() ? Tri::True : Tri::False) &&
                       c.q == g.at("q").get<int>() && c.h == g.at("h").get<int>();
    finish(it, equal, erratum(it.item), [](const json&) { return false; }, want.str(), os.str());
    if (it.pass) it.detail = os.str();
  }

  void check_characteristic_span(FixtureItem& it) {
    const Distribution ann = annihilator(p_->eta, box_);
    const Distribution cd = characteristic_distribution(make_ideal(p_->psi), box_);
    const int expected = static_cast<int>(p_->bundle.n() - p_->bundle.k()) - 1;
    const bool equal = static_cast<int>(ann.rank()) == expected && cd.rank() == ann.rank() &&
                       same_span(cd.basis, ann.basis, box_);
    it.status = equal ? "match" : "mismatch";
    it.pass = equal;
    it.detail = "rank N(eta)=" + std::to_string(ann.rank()) + ", rank D(J)=" + std::to_string(cd.rank()) +
                ", n-k-1=" + std::to_string(expected);
  }

  // Tangency system T f = 0 of a section on a polynomial instantiation: its
  // k x k minors must agree with the engine's critical equations.
  void check_tangency(const json& g, FixtureItem& it) {
    const auto& eq = equations();
    const auto& b = p_->bundle;
    Subst inst;
    for (const auto& [k, v] : g.at("instantiation").items()) inst[k] = parse_expr(v.get<std::string>());
    std::map<std::string, Expr, std::less<>> values;
    for (const auto& [k, v] : g.at("section").items()) values[k] = parse_expr(v.get<std::string>());
    const SectionMap phi(b, values);
    const Subst jets = phi.jet_substitution();
    auto on_section = [&](const Expr& e) { return subs(subs(e, inst), jets); };

    ExprMatrix rows;
    for (const auto& row : g.at("rows")) {
      rows.emplace_back();
      for (const auto& c : row) rows.back().push_back(on_section(golden_expr(c)));
    }
    std::vector<Expr> delta;
    for (const auto& d : eq.delta) delta.push_back(on_section(d));
    const std::size_t k = b.k();
    if (rows.size() != k + 1 || delta.size() != rows.size())
      throw Error(ErrorKind::InvalidArgument, "tangency check needs k+1 rows");

    Box pts = box_;
    pts.samples = g.value("points", 20);
    const std::set<std::string> base(b.base().begin(), b.base().end());
    double worst = 0.0;
    int used = 0;
    for (const auto& x : pts.sample_points(base)) {
      const NumMatrix t = evaluate(rows, x);
      for (std::size_t a = 0; a < t.size(); ++a) {
        NumMatrix minor = t;
        minor.erase(minor.begin() + static_cast<std::ptrdiff_t>(a));
        Eigen::MatrixXd m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
        for (std::size_t r = 0; r < k; ++r)
          for (std::size_t c = 0; c < k; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = minor[r][c];
        const double det = m.determinant();
        const double elim = (a % 2 == 0 ? 1.0 : -1.0) * det;
        worst = std::max(worst, std::abs(elim - eval(delta[a], x)));
      }
      ++used;
    }
    const double tol = 1e-9;
    it.pass = worst < tol;
    it.status = it.pass ? "match" : "mismatch";
    std::ostringstream os;
    os << "max |minor - delta| = " << worst << " over " << used << " points";
    it.detail = os.str();
  }

  const json& doc_;
  ProblemSpec spec_;
  Box box_;
  Subst defs_;
  std::map<std::string, json> errata_;
  std::optional<VariationalProblem> p_;
  std::optional<CriticalEquations> eq_;
};

}  // namespace

bool FixtureReport::pass() const {
  return !items.empty() && std::all_of(items.begin(), items.end(), [](const FixtureItem& i) { return i.pass; });
}

const FixtureItem* FixtureReport::find(std::string_view item) const {
  for (const auto& i : items)
    if (i.item == item) return &i;
  return nullptr;
}

std::string FixtureReport::to_json() const {
  ojson j;
  j["fixture"] = name;
  j["title"] = title;
  j["seed"] = seed;
  j["pass"] = pass();
  j["items"] = ojson::array();
  for (const auto& i : items) {
    ojson e;
    e["item"] = i.item;
    e["kind"] = i.kind;
    e["status"] = i.status;
    e["pass"] = i.pass;
    e["detail"] = i.detail;
    if (!i.printed.empty() || !i.engine.empty()) {
      e["printed"] = i.printed;
      e["engine"] = i.engine;
    }
    j["items"].push_back(std::move(e));
  }
  return j.dump(2);
}

std::string FixtureReport::to_text() const {
  std::ostringstream os;
  os << name << ": " << title << " (seed " << seed << ")\n";
  for (const auto& i : items) {
    os << (i.pass ? "PASS " : "FAIL ") << i.item << " [" << i.status << "]";
    if (!i.detail.empty()) os << " " << i.detail;
    os << "\n";
    if (!i.printed.empty() || !i.engine.empty()) {
      os << "    printed: " << i.printed << "\n";
      os << "    engine:  " << i.engine << "\n";
    }
  }
  os << (pass() ? "all items pass" : "some items failed") << "\n";
  return os.str();
}

std::vector<std::string> fixture_names() {
  std::vector<std::string> out;
  for (const auto& [name, text] : kFixtures) out.emplace_back(name);
  return out;
}

std::string_view fixture_source(std::string_view name) {
  for (const auto& [n, text] : kFixtures)
    if (n == name) return text;
  throw Error(ErrorKind::InvalidArgument, "unknown fixture '" + std::string(name) + "'");
}

ProblemSpec fixture_problem(std::string_view name) { return parse_problem(fixture_source(name)); }

FixtureReport run_fixture_source(std::string_view json_text, const std::optional<std::uint64_t>& seed) {
  const json doc = json::parse(json_text);
  ProblemSpec spec = parse_problem(json_text);
  if (seed) spec.options.box.seed = *seed;
  Runner runner(doc, std::move(spec));
  return runner.run();
}

FixtureReport run_fixture(std::string_view name) { return run_fixture_source(fixture_source(name)); }

}  // namespace cartan
