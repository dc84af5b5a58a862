// cartan_vp: command-line front end for the variational-ideal engine.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "cartan/errors.hpp"
#include "cartan/fixtures.hpp"
#include "cartan/flows.hpp"
#include "cartan/ideals.hpp"
#include "cartan/liouville.hpp"
#include "cartan/problem_io.hpp"
#include "cartan/varprin.hpp"

namespace {

using cartan::Expr;
using ojson = nlohmann::ordered_json;

enum Exit { kOk = 0, kCheckFailed = 1, kInputError = 2, kComputeError = 3 };

struct Options {
  std::string command;
  std::string spec_path;
  std::string section_path;
  std::string out_path;
  std::string format = "json";
  std::string example;
  std::optional<double> step;
  std::optional<double> tol;
  std::optional<std::string> seed;
  std::optional<std::string> box;
};

std::uint64_t parse_seed(const std::string& s) {
  std::size_t used = 0;
  const auto v = std::stoull(s, &used, 0);
  if (used != s.size()) throw cartan::ParseError("bad seed '" + s + "'", 0);
  return v;
}

std::pair<double, double> parse_range(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw cartan::ParseError("--box expects \"lo,hi\"", 0);
  const double lo = std::stod(s.substr(0, comma));
  const double hi = std::stod(s.substr(comma + 1));
  if (!(lo < hi)) throw cartan::ParseError("--box range is empty", 0);
  return {lo, hi};
}

// Seed precedence: spec file, then CARTAN_VP_SEED, then --seed.
std::uint64_t resolve_seed(const Options& o, std::uint64_t from_spec) {
  std::uint64_t seed = from_spec;
  if (const char* env = std::getenv("CARTAN_VP_SEED"); env && *env) seed = parse_seed(env);
  if (o.seed) seed = parse_seed(*o.seed);
  return seed;
}

cartan::ProblemSpec load_spec(const Options& o) {
  if (o.spec_path.empty()) throw cartan::ParseError("--spec is required", 0);
  cartan::ProblemSpec spec = cartan::load_problem(o.spec_path);
  spec.options.box.seed = resolve_seed(o, spec.options.box.seed);
  if (o.box) std::tie(spec.options.box.lo, spec.options.box.hi) = parse_range(*o.box);
  if (o.step) spec.options.step = *o.step;
  if (o.tol) spec.options.tolerance = *o.tol;
  if (spec.liouville) spec.liouville->box = spec.effective_box();
  return spec;
}

cartan::VariationalProblem build_any(cartan::ProblemSpec& spec) {
  if (spec.liouville) return cartan::build_theta(*spec.liouville);
  return cartan::build(spec);
}

ojson point_json(const cartan::Point& p) {
  ojson j = ojson::object();
  for (const auto& [k, v] : p) j[k] = v;
  return j;
}

ojson fields_json(const std::vector<cartan::VecField>& fs) {
  ojson arr = ojson::array();
  for (const auto& f : fs) {
    ojson o = ojson::object();
    for (std::size_t i = 0; i < f.size(); ++i)
      if (!f[i].is_zero()) o[f.chart()->name(i)] = f[i].str();
    arr.push_back(std::move(o));
  }
  return arr;
}

ojson matrix_json(const cartan::ExprMatrix& m) {
  ojson arr = ojson::array();
  for (const auto& row : m) {
    ojson r = ojson::array();
    for (const auto& e : row) r.push_back(e.str());
    arr.push_back(std::move(r));
  }
  return arr;
}

ojson header(const Options& o, const cartan::ProblemSpec& spec) {
  ojson j;
  j["command"] = o.command;
  j["problem"] = spec.name;
  j["seed"] = spec.options.box.seed;
  j["box"] = {spec.options.box.lo, spec.options.box.hi};
  if (spec.bundle) {
    j["chart"] = {{"base", spec.bundle->base()}, {"fiber_z", spec.bundle->fiber_z()}, {"fiber_w", spec.bundle->fiber_w()}};
  }
  return j;
}

ojson classification_json(const cartan::Classification& c) {
  return {{"degree_case", cartan::degree_case_name(c.degree_case)},
          {"proper", cartan::tri_name(c.proper)},
          {"k", c.k}, {"n", c.n}, {"h", c.h}, {"q", c.q}, {"r", c.r}, {"vertical_dim", c.vertical_dim}};
}

ojson distribution_json(const cartan::Distribution& d) {
  ojson j;
  j["rank"] = d.rank();
  j["basis"] = fields_json(d.basis);
  j["exact"] = d.exact;
  j["pivot_rows"] = d.pivot_rows;
  j["pivot_cols"] = d.pivot_cols;
  j["certificate"] = {{"seed", d.certificate.seed}, {"samples", d.certificate.points.size()}, {"ranks", d.certificate.ranks}};
  return j;
}

ojson frobenius_json(const cartan::FrobeniusResult& f) {
  ojson j;
  j["verdict"] = cartan::verdict_name(f.verdict);
  j["numerically_integrable"] = f.numerically_integrable;
  if (f.verdict == cartan::FrobeniusResult::Verdict::NotIntegrable) {
    j["pair"] = {f.i, f.j};
    j["witness"] = point_json(f.witness);
    j["magnitude"] = f.magnitude;
  }
  return j;
}

// Text rendering: nested keys flattened to "a.b: value" lines.
void flatten(const ojson& j, const std::string& prefix, std::ostream& os) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, os);
  } else if (j.is_array() && !j.empty() && (j[0].is_object() || j[0].is_array())) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "[" + std::to_string(i) + "]", os);
  } else {
    os << prefix << ": " << (j.is_string() ? j.get<std::string>() : j.dump()) << "\n";
  }
}

struct Result {
  ojson json;
  std::string text;  // preformatted text, else flattened json
  std::string csv;
  int code = kOk;
};

Result cmd_analyze(const Options& o) {
  auto spec = load_spec(o);
  const auto p = build_any(spec);
  const auto box = p.box;
  Result r;
  r.json = header(o, spec);
  r.json["classification"] = classification_json(p.classification);
  if (p.factors) {
    const auto v = cartan::classify(*p.factors, box);
    r.json["factors"] = {{"nondegenerate", v.nondegenerate}, {"compatible", v.compatible}, {"adapted", v.adapted},
                         {"vertical_dim", v.vertical_dim}, {"normalized", p.normalized.has_value()}};
  }
  const auto ann = cartan::annihilator(p.eta, box);
  r.json["eta"] = p.eta.str();
  r.json["annihilator"] = distribution_json(ann);
  r.json["vertical_annihilators"] = fields_json(cartan::check_proper(p, box).vertical_annihilators);
  r.json["frobenius"] = frobenius_json(cartan::frobenius_check(ann, box));
  return r;
}

Result cmd_el(const Options& o) {
  auto spec = load_spec(o);
  const auto p = build_any(spec);
  const auto ce = cartan::critical_equations(p);
  Result r;
  r.json = header(o, spec);
  r.json["classification"] = classification_json(p.classification);
  ojson eqs = ojson::array();
  std::ostringstream text;
  for (std::size_t a = 0; a < ce.delta.size(); ++a) {
    eqs.push_back({{"index", a + 1}, {"delta", ce.delta[a].str()},
                   {"pullback", a < ce.pullback_coeffs.size() ? ce.pullback_coeffs[a].str() : ""}});
    text << "Delta_" << a + 1 << " = " << ce.delta[a].str() << "\n";
  }
  r.json["equations"] = std::move(eqs);
  if (!ce.P.empty()) {
    r.json["P"] = matrix_json(ce.P);
    text << "P = " << r.json["P"].dump() << "\n";
  }
  r.json["constant"] = ce.constant.get_str();
  r.json["consistent"] = ce.consistent;
  r.json["jet_symbols"] = ce.jet_symbols;
  text << "pullback = " << ce.constant.get_str() << " x Delta, consistent: " << (ce.consistent ? "yes" : "no") << "\n";
  r.text = text.str();
  if (!ce.consistent) r.code = kCheckFailed;
  return r;
}

Result cmd_annihilator(const Options& o) {
  auto spec = load_spec(o);
  const auto p = build_any(spec);
  Result r;
  r.json = header(o, spec);
  r.json["annihilator"] = distribution_json(cartan::annihilator(p.eta, p.box));
  return r;
}

Result cmd_frobenius(const Options& o) {
  auto spec = load_spec(o);
  const auto p = build_any(spec);
  const auto ann = cartan::annihilator(p.eta, p.box);
  const auto f = cartan::frobenius_check(ann, p.box);
  Result r;
  r.json = header(o, spec);
  r.json["rank"] = ann.rank();
  r.json["frobenius"] = frobenius_json(f);
  if (f.verdict == cartan::FrobeniusResult::Verdict::NotIntegrable) r.code = kCheckFailed;
  return r;
}

cartan::SectionSpec load_section_file(const Options& o) {
  if (o.section_path.empty()) throw cartan::ParseError("--section is required", 0);
  return cartan::load_section(o.section_path);
}

Result cmd_integrate(const Options& o) {
  auto spec = load_spec(o);
  const auto p = build_any(spec);
  const auto sec = load_section_file(o);
  if (!sec.grid) throw cartan::ParseError("section file needs a \"grid\" block", 0);
  cartan::GridSpec grid = *sec.grid;
  if (o.step) grid.step = *o.step;
  if (o.tol) grid.tolerance = *o.tol;
  const cartan::SectionMap seed(p.bundle, sec.values);
  const auto d = cartan::annihilator(p.eta, p.box);
  const auto patch = cartan::sweep_section(p, d, seed, grid, sec.parameters);
  Result r;
  r.json = header(o, spec);
  r.json["provenance"] = ojson::parse(patch.provenance);
  r.json["nodes"] = patch.nodes.size();
  r.json["max_residual"] = patch.max_residual;
  ojson rows = ojson::array();
  for (std::size_t i = 0; i < patch.nodes.size(); ++i)
    rows.push_back({{"node", patch.nodes[i]}, {"jets", patch.jets[i]}, {"residuals", patch.residuals[i]}});
  r.json["rows"] = std::move(rows);
  r.csv = patch.to_csv();
  return r;
}

Result cmd_verify(const Options& o) {
  auto spec = load_spec(o);
  const auto p = build_any(spec);
  const auto sec = load_section_file(o);
  const cartan::SectionMap phi(p.bundle, sec.values);
  const auto rep = cartan::verify_critical(p, phi);
  Result r;
  r.json = header(o, spec);
  r.json["critical"] = rep.critical;
  r.json["cross_check"] = rep.cross_check;
  ojson res = ojson::array();
  for (const auto& e : rep.residuals) res.push_back(e.str());
  r.json["residuals"] = std::move(res);
  if (!rep.critical || !rep.cross_check) r.code = kCheckFailed;
  return r;
}

Result cmd_liouville(const Options& o) {
  auto spec = load_spec(o);
  if (!spec.liouville) throw cartan::ParseError("liouville: spec has no \"liouville\" block", 0);
  auto& s = *spec.liouville;
  Result r;
  r.json = header(o, spec);
  r.json["phase"] = s.phase;
  try {
    const auto p = cartan::build_theta(s);
    const bool characteristic = cartan::interior(s.z, cartan::ext_d(s.theta)).is_zero();
    const bool hodge = cartan::verify_hodge_identity(s);
    r.json["is_liouville"] = true;
    r.json["sigma"] = s.sigma.str();
    r.json["gamma"] = s.gamma.str();
    r.json["sign"] = s.sign;
    r.json["theta"] = s.theta.str();
    r.json["field_Z"] = s.z.str();
    r.json["characteristic"] = characteristic;
    r.json["hodge_identity"] = hodge;
    r.json["classification"] = classification_json(p.classification);
    if (!characteristic || !hodge) r.code = kCheckFailed;
  } catch (const cartan::Error& e) {
    if (e.kind() != cartan::ErrorKind::NotClosed) throw;
    r.json["is_liouville"] = false;
    r.json["message"] = e.what();
    r.code = kCheckFailed;
  }
  return r;
}

Result cmd_example(const Options& o) {
  std::optional<std::uint64_t> seed;
  const char* env = std::getenv("CARTAN_VP_SEED");
  if (o.seed || (env && *env)) seed = resolve_seed(o, cartan::kDefaultSeed);
  const auto rep = cartan::run_fixture_source(cartan::fixture_source(o.example), seed);
  Result r;
  r.json = ojson::parse(rep.to_json());
  r.text = rep.to_text();
  if (!rep.pass()) r.code = kCheckFailed;
  return r;
}

ojson error_json(const cartan::Error& e) {
  ojson j;
  j["error"] = cartan::error_kind_name(e.kind());
  j["message"] = e.what();
  if (const auto* pe = dynamic_cast<const cartan::ParseError*>(&e)) {
    if (pe->line() > 0) j["line"] = pe->line();
    if (pe->position() > 0) j["column"] = pe->position();
  }
  if (const auto* nc = dynamic_cast<const cartan::NonConstantRankError*>(&e)) {
    ojson w = ojson::array();
    for (const auto& [pt, rank] : nc->witnesses()) w.push_back({{"point", point_json(pt)}, {"rank", rank}});
    j["witnesses"] = std::move(w);
  }
  if (const auto* rt = dynamic_cast<const cartan::ResidualTooLargeError*>(&e)) {
    j["node"] = rt->node();
    j["value"] = rt->value();
  }
  return j;
}

void emit(const Options& o, const std::string& body) {
  if (o.out_path.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream out(o.out_path, std::ios::binary);
  if (!out) throw cartan::Error(cartan::ErrorKind::InvalidArgument, "cannot write '" + o.out_path + "'");
  out << body;
}

std::string render(const Options& o, const Result& r) {
  if (o.format == "csv") {
    if (r.csv.empty()) throw cartan::Error(cartan::ErrorKind::InvalidArgument, "csv output is only available for integrate");
    return r.csv;
  }
  if (o.format == "text") {
    if (!r.text.empty()) return r.text;
    std::ostringstream os;
    flatten(r.json, "", os);
    return os.str();
  }
  return r.json.dump(2) + "\n";
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Variational Cartan ideals: analysis, critical equations and section reconstruction"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--spec", o.spec_path, "problem file (JSON)");
  app.add_option("--section", o.section_path, "section file (JSON) for integrate and verify");
  app.add_option("--out", o.out_path, "write the report here instead of stdout");
  app.add_option("--format", o.format, "json | text | csv")->check(CLI::IsMember({"json", "text", "csv"}));
  app.add_option("--step", o.step, "integration step");
  app.add_option("--tol", o.tol, "residual tolerance");
  app.add_option("--seed", o.seed, "sampling seed (overrides spec and CARTAN_VP_SEED)");
  app.add_option("--box", o.box, "default sampling range \"lo,hi\"");

  const std::pair<const char*, const char*> commands[] = {
      {"analyze", "classify the principle, annihilator basis, Frobenius verdict"},
      {"el", "critical equations Delta_a"},
      {"annihilator", "basis of N(d theta)"},
      {"frobenius", "involutivity of N(d theta)"},
      {"integrate", "sweep a seed section into a sampled critical patch (CSV)"},
      {"verify", "residuals of a candidate section"},
      {"liouville", "theta for a Liouville field and its checks"},
      {"example", "run a shipped fixture"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    if (std::string_view(name) == "example") sub->add_option("name", o.example, "fixture name")->required();
    sub->callback([&o, name = std::string(name)] { o.command = name; });
  }
  CLI11_PARSE(app, argc, argv);
  if (o.command == "integrate" && o.format == "json" && !app.get_option("--format")->count()) o.format = "csv";

  Result r;
  try {
    if (o.command == "analyze") r = cmd_analyze(o);
    else if (o.command == "el") r = cmd_el(o);
    else if (o.command == "annihilator") r = cmd_annihilator(o);
    else if (o.command == "frobenius") r = cmd_frobenius(o);
    else if (o.command == "integrate") r = cmd_integrate(o);
    else if (o.command == "verify") r = cmd_verify(o);
    else if (o.command == "liouville") r = cmd_liouville(o);
    else r = cmd_example(o);
    emit(o, render(o, r));
  } catch (const cartan::Error& e) {
    const bool input = e.kind() == cartan::ErrorKind::ParseError || e.kind() == cartan::ErrorKind::ChartMismatch ||
                       e.kind() == cartan::ErrorKind::InvalidArgument;
    if (o.format == "json") {
      std::cout << error_json(e).dump(2) << "\n";
    } else {
      std::cerr << "error: " << cartan::error_kind_name(e.kind()) << ": " << e.what() << "\n";
    }
    return input ? kInputError : kComputeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return r.code;
}
