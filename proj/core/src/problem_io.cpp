#include "cartan/problem_io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

#include "cartan/errors.hpp"
#include "cartan/parse.hpp"

namespace cartan {

using json = nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
  throw ParseError(where + ": " + msg, 0, 0);
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError("JSON syntax error at line " + std::to_string(line) + ", column " + std::to_string(col), col, line);
  }
}

Expr expr_at(const json& j, const std::string& where) {
  if (j.is_number_integer()) return Expr(static_cast<int>(j.get<long long>()));
  if (!j.is_string()) fail(where, "expected an expression string");
  try {
    return parse_expr(j.get<std::string>());
  } catch (const ParseError& e) {
    throw ParseError(where + ": " + e.what(), e.position(), 0);
  }
}

std::vector<std::string> names_at(const json& j, const std::string& where) {
  std::vector<std::string> out;
  if (j.is_null()) return out;
  if (!j.is_array()) fail(where, "expected an array of names");
  for (const auto& v : j) {
    if (!v.is_string()) fail(where, "expected coordinate names");
    out.push_back(v.get<std::string>());
  }
  return out;
}

DiffForm form_at(const json& j, const ChartPtr& chart, const std::string& where) {
  if (!j.is_array()) fail(where, "expected a list of {coeff, index} terms");
  std::optional<DiffForm> out;
  for (std::size_t t = 0; t < j.size(); ++t) {
    const std::string w = where + "[" + std::to_string(t) + "]";
    const json& term = j[t];
    if (!term.is_object() || !term.contains("index")) fail(w, "term needs \"coeff\" and \"index\"");
    const Expr c = term.contains("coeff") ? expr_at(term["coeff"], w + ".coeff") : Expr(1);
    const auto idx_names = names_at(term["index"], w + ".index");
    MultiIndex idx;
    for (const auto& name : idx_names) {
      auto i = chart->index_of(name);
      if (!i) fail(w + ".index", "unknown coordinate '" + name + "'");
      idx.push_back(static_cast<int>(*i));
    }
    if (!out) out = DiffForm(chart, static_cast<int>(idx.size()));
    if (static_cast<int>(idx.size()) != out->degree()) fail(w + ".index", "term degree differs from the form degree");
    out->add(std::move(idx), c);
  }
  if (!out) fail(where, "empty form");
  return *out;
}

std::pair<double, double> range_at(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) fail(where, "expected [lo, hi]");
  const double lo = j[0].get<double>(), hi = j[1].get<double>();
  if (!(lo < hi)) fail(where, "empty range");
  return {lo, hi};
}

std::uint64_t seed_at(const json& j, const std::string& where) {
  if (j.is_number_unsigned() || j.is_number_integer()) return j.get<std::uint64_t>();
  if (j.is_string()) {
    try {
      return std::stoull(j.get<std::string>(), nullptr, 0);
    } catch (const std::exception&) {
    }
  }
  fail(where, "expected an integer seed");
}

void collect(const DiffForm& f, std::set<std::string>& out) {
  for (const auto& [idx, c] : f.terms()) collect_symbols(c, out);
}

}  // namespace

Box ProblemSpec::effective_box() const {
  Box b = options.box;
  if (options.parameter_box) {
    for (const auto& s : parameters())
      if (!b.ranges.contains(s)) b.ranges[s] = *options.parameter_box;
  }
  return b;
}

std::set<std::string> ProblemSpec::parameters() const {
  std::set<std::string> syms;
  if (theta) collect(*theta, syms);
  for (const auto& f : factors) collect(f, syms);
  if (liouville)
    for (const auto& e : liouville->field) collect_symbols(e, syms);
  std::set<std::string> out;
  for (const auto& s : syms) {
    bool coord = bundle && bundle->chart()->contains(s);
    if (liouville) {
      coord = coord || s == liouville->time;
      for (const auto& p : liouville->phase) coord = coord || s == p;
    }
    if (!coord) out.insert(s);
  }
  return out;
}

DiffForm parse_form_spec(std::string_view json_text, const ChartPtr& chart) {
  return form_at(parse_json(json_text), chart, "form");
}

ProblemSpec parse_problem(std::string_view json_text) {
  const json j = parse_json(json_text);
  if (!j.is_object()) fail("problem", "top level must be an object");
  ProblemSpec spec;
  if (j.contains("name")) spec.name = j["name"].get<std::string>();

  if (j.contains("chart")) {
    const json& c = j["chart"];
    if (!c.is_object()) fail("chart", "expected an object");
    try {
      spec.bundle.emplace(names_at(c.value("base", json::array()), "chart.base"),
                          names_at(c.value("fiber_z", json::array()), "chart.fiber_z"),
                          names_at(c.value("fiber_w", json::array()), "chart.fiber_w"));
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      fail("chart", e.what());
    }
  }
  if (j.contains("theta") && j.contains("factors")) fail("problem", "give either theta or factors, not both");
  if (j.contains("theta")) {
    if (!spec.bundle) fail("theta", "a chart is required");
    spec.theta = form_at(j["theta"], spec.bundle->chart(), "theta");
  }
  if (j.contains("factors")) {
    if (!spec.bundle) fail("factors", "a chart is required");
    const json& fs = j["factors"];
    if (!fs.is_array()) fail("factors", "expected a list of one-forms");
    for (std::size_t i = 0; i < fs.size(); ++i) {
      const std::string w = "factors[" + std::to_string(i) + "]";
      DiffForm f = form_at(fs[i], spec.bundle->chart(), w);
      if (f.degree() != 1) fail(w, "factors must be one-forms");
      spec.factors.push_back(std::move(f));
    }
  }
  if (j.contains("liouville")) {
    const json& l = j["liouville"];
    if (!l.is_object()) fail("liouville", "expected an object");
    LiouvilleSetup s;
    s.phase = names_at(l.value("phase", json::array()), "liouville.phase");
    if (l.contains("time")) s.time = l["time"].get<std::string>();
    const json& f = l.value("field", json::array());
    if (!f.is_array() || f.size() != s.phase.size()) fail("liouville.field", "need one component per phase coordinate");
    for (std::size_t i = 0; i < f.size(); ++i) s.field.push_back(expr_at(f[i], "liouville.field[" + std::to_string(i) + "]"));
    spec.liouville = std::move(s);
  }
  if (!spec.theta && spec.factors.empty() && !spec.liouville) fail("problem", "needs theta, factors or liouville");

  if (j.contains("options")) {
    const json& o = j["options"];
    if (!o.is_object()) fail("options", "expected an object");
    if (o.contains("box")) {
      const json& b = o["box"];
      if (b.is_array()) {
        std::tie(spec.options.box.lo, spec.options.box.hi) = range_at(b, "options.box");
      } else if (b.is_object()) {
        for (const auto& [key, val] : b.items()) {
          const auto r = range_at(val, "options.box." + key);
          if (key == "default") {
            std::tie(spec.options.box.lo, spec.options.box.hi) = r;
          } else {
            spec.options.box.ranges[key] = r;
          }
        }
      } else {
        fail("options.box", "expected [lo, hi] or an object of ranges");
      }
    }
    if (o.contains("parameter_box")) spec.options.parameter_box = range_at(o["parameter_box"], "options.parameter_box");
    if (o.contains("seed")) spec.options.box.seed = seed_at(o["seed"], "options.seed");
    if (o.contains("samples")) spec.options.box.samples = o["samples"].get<int>();
    if (o.contains("step")) spec.options.step = o["step"].get<double>();
    if (o.contains("tolerance")) spec.options.tolerance = o["tolerance"].get<double>();
    if (!(spec.options.step > 0)) fail("options.step", "must be positive");
  }
  if (spec.liouville) spec.liouville->box = spec.effective_box();
  return spec;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ProblemSpec load_problem(const std::string& path) { return parse_problem(read_file(path)); }

VariationalProblem build(const ProblemSpec& spec) {
  if (!spec.bundle) throw Error(ErrorKind::InvalidArgument, "problem has no chart");
  if (spec.theta) return build_problem(*spec.bundle, *spec.theta, spec.effective_box());
  if (!spec.factors.empty()) return build_problem(*spec.bundle, spec.factors, spec.effective_box());
  throw Error(ErrorKind::InvalidArgument, "problem has neither theta nor factors");
}

SectionSpec parse_section(std::string_view json_text) {
  const json j = parse_json(json_text);
  if (!j.is_object() || !j.contains("section") || !j["section"].is_object()) fail("section", "expected {\"section\": {...}}");
  SectionSpec s;
  for (const auto& [key, val] : j["section"].items()) s.values[key] = expr_at(val, "section." + key);
  if (j.contains("parameters")) {
    for (const auto& [key, val] : j["parameters"].items()) {
      if (!val.is_number()) fail("parameters." + key, "expected a number");
      s.parameters[key] = val.get<double>();
    }
  }
  if (j.contains("grid")) {
    const json& g = j["grid"];
    GridSpec grid;
    auto nums = [&](const char* key) {
      std::vector<double> v;
      if (!g.contains(key)) return v;
      for (const auto& x : g[key]) v.push_back(x.get<double>());
      return v;
    };
    grid.lo = nums("lo");
    grid.hi = nums("hi");
    grid.anchor = nums("anchor");
    if (g.contains("counts"))
      for (const auto& x : g["counts"]) grid.counts.push_back(x.get<int>());
    grid.flow_axes = names_at(g.value("flow_axes", json::array()), "grid.flow_axes");
    grid.sweep_order = names_at(g.value("sweep_order", json::array()), "grid.sweep_order");
    if (g.contains("step")) grid.step = g["step"].get<double>();
    if (g.contains("tolerance")) grid.tolerance = g["tolerance"].get<double>();
    s.grid = std::move(grid);
  }
  return s;
}

SectionSpec load_section(const std::string& path) { return parse_section(read_file(path)); }

}  // namespace cartan
