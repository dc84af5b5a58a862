#include <doctest.h>

#include <string>

#include "cartan/errors.hpp"
#include "cartan/parse.hpp"
#include "cartan/problem_io.hpp"

using namespace cartan;

namespace {

std::string message_of(std::string_view text) {
  try {
    parse_problem(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("json syntax errors report line and column") {
  const std::string text = "{\n  \"chart\": {\"base\": [\"x\"]},\n  \"theta\": [ ,]\n}";
  try {
    parse_problem(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.position() == 14);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("semantic errors name the field") {
  CHECK(message_of(R"({"chart": {"base": ["x"], "fiber_z": ["z"], "fiber_w": ["w"]},
                      "theta": [{"coeff": "x +* z", "index": ["z"]}]})")
            .rfind("theta[0].coeff", 0) == 0);
  CHECK(message_of(R"({"chart": {"base": ["x"], "fiber_z": ["z"], "fiber_w": ["w"]},
                      "theta": [{"coeff": "1", "index": ["y"]}]})")
            .rfind("theta[0].index", 0) == 0);
  CHECK(message_of(R"({"theta": [{"coeff": "1", "index": ["x"]}]})").rfind("theta", 0) == 0);
  CHECK(message_of(R"({"chart": {"base": ["x"]}})").rfind("chart", 0) == 0);
  CHECK(message_of(R"({"chart": {"base": ["x"], "fiber_z": ["z"], "fiber_w": ["w"]}})").rfind("problem", 0) == 0);
  CHECK(message_of(R"({"chart": {"base": ["x"], "fiber_z": ["z"], "fiber_w": ["w"]},
                      "theta": [{"index": ["z"]}], "options": {"box": [1, 0]}})")
            .rfind("options.box", 0) == 0);
  CHECK(message_of(R"({"liouville": {"phase": ["q", "p"], "field": ["p"]}})").rfind("liouville.field", 0) == 0);
  CHECK(message_of(R"({"chart": {"base": ["x"], "fiber_z": ["z"], "fiber_w": ["w"]},
                      "theta": [{"index": ["z"]}], "options": {"seed": "abc"}})")
            .rfind("options.seed", 0) == 0);
}

TEST_CASE("options") {
  const auto spec = parse_problem(R"({"chart": {"base": ["x"], "fiber_z": ["z"], "fiber_w": ["w"]},
    "theta": [{"coeff": "a*w", "index": ["z"]}, {"coeff": "-z^2/2", "index": ["x"]}],
    "options": {"box": {"default": [-2, 2], "x": [0, 1]}, "parameter_box": [0.5, 1.5],
                "seed": "0x10", "samples": 16, "step": 0.01}})");
  const Box b = spec.effective_box();
  CHECK(b.lo == -2.0);
  CHECK(b.hi == 2.0);
  CHECK(b.range("x") == std::pair<double, double>{0.0, 1.0});
  CHECK(b.range("a") == std::pair<double, double>{0.5, 1.5});
  CHECK(b.range("z") == std::pair<double, double>{-2.0, 2.0});
  CHECK(b.seed == 16);
  CHECK(b.samples == 16);
  CHECK(spec.options.step == 0.01);
  CHECK(spec.parameters() == std::set<std::string>{"a"});
  const auto p = build(spec);
  CHECK(p.classification.degree_case == DegreeCase::MaximalDegree);
}

TEST_CASE("factors and liouville specs") {
  const auto f = parse_problem(R"({"chart": {"base": ["x"], "fiber_z": ["z1", "z2"]},
    "factors": [[{"coeff": "1", "index": ["z1"]}, {"coeff": "b", "index": ["x"]}],
                [{"coeff": "1", "index": ["z2"]}]]})");
  CHECK(f.factors.size() == 2);
  CHECK(f.factors[0].coeff({0}) == parse_expr("b"));

  const auto l = parse_problem(R"({"liouville": {"phase": ["q", "p"], "field": ["-p", "q"], "time": "s"}})");
  REQUIRE(l.liouville);
  CHECK(l.liouville->time == "s");
  CHECK(l.liouville->field[1] == parse_expr("q"));
  CHECK_THROWS_AS(build(l), Error);
}

TEST_CASE("section files") {
  const auto s = parse_section(R"({"section": {"z": "-b*x", "w": 0},
    "parameters": {"b": 2.5},
    "grid": {"lo": [0, 0], "hi": [1, 2], "counts": [3, 5], "anchor": [0, 1],
             "flow_axes": ["x"], "step": 0.002, "tolerance": 1e-7}})");
  CHECK(s.values.at("z") == parse_expr("-b*x"));
  CHECK(s.values.at("w").is_zero());
  CHECK(s.parameters.at("b") == 2.5);
  REQUIRE(s.grid);
  CHECK(s.grid->counts == std::vector<int>{3, 5});
  CHECK(s.grid->anchor == std::vector<double>{0.0, 1.0});
  CHECK(s.grid->flow_axes == std::vector<std::string>{"x"});
  CHECK(s.grid->step == 0.002);
  CHECK(s.grid->tolerance == 1e-7);
  CHECK_THROWS_AS(parse_section(R"({"z": "x"})"), ParseError);
  CHECK_THROWS_AS(parse_section(R"({"section": {"z": "x"}, "parameters": {"b": "two"}})"), ParseError);
}

TEST_CASE("form specs and files") {
  const ChartPtr c = make_chart({"x", "y"});
  const DiffForm f = parse_form_spec(R"([{"coeff": "y", "index": ["x", "y"]}, {"coeff": "1", "index": ["y", "x"]}])", c);
  CHECK(f.coeff({0, 1}) == parse_expr("y - 1"));
  try {
    read_file("/nonexistent/problem.json");
    FAIL("expected InvalidArgument");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidArgument);
  }
}
