#pragma once

// JSON problem files: chart, theta or factors, Liouville input, options;
// and section files used to verify or seed critical sections.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cartan/flows.hpp"
#include "cartan/forms.hpp"
#include "cartan/liouville.hpp"
#include "cartan/varprin.hpp"

namespace cartan {

struct ProblemOptions {
  Box box;
  /// Range applied to every symbol that is not a chart coordinate.
  std::optional<std::pair<double, double>> parameter_box;
  double step = kDefaultStep;
  double tolerance = 1e-6;
};

struct ProblemSpec {
  std::string name;
  std::optional<BundleChart> bundle;
  std::optional<DiffForm> theta;
  std::vector<DiffForm> factors;
  std::optional<LiouvilleSetup> liouville;
  ProblemOptions options;

  /// Box with per-parameter ranges filled in.
  Box effective_box() const;
  /// Free symbols of the input forms that are not chart coordinates.
  std::set<std::string> parameters() const;
};

/// Throws ParseError carrying line and column (1-based) for JSON syntax
/// errors, and the offending field for semantic errors.
ProblemSpec parse_problem(std::string_view json_text);
ProblemSpec load_problem(const std::string& path);

VariationalProblem build(const ProblemSpec& spec);

/// Parses [{"coeff": "...", "index": ["x1", ...]}, ...].
DiffForm parse_form_spec(std::string_view json_text, const ChartPtr& chart);

struct SectionSpec {
  std::map<std::string, Expr, std::less<>> values;
  std::optional<GridSpec> grid;
  Point parameters;
};

SectionSpec parse_section(std::string_view json_text);
SectionSpec load_section(const std::string& path);

std::string read_file(const std::string& path);

}  // namespace cartan
