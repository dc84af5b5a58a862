#pragma once

// Numeric integration of vector fields and reconstruction of critical
// sections by sweeping seed data along the characteristic distribution.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cartan/eval.hpp"
#include "cartan/forms.hpp"
#include "cartan/ideals.hpp"
#include "cartan/varprin.hpp"

namespace cartan {

using State = std::vector<double>;

inline constexpr double kDefaultStep = 1e-3;

struct FlowOptions {
  double step = kDefaultStep;
  /// When set, leaving the box aborts with BoxExit. Unlisted coordinates use
  /// the box default range.
  std::optional<Box> bounds;
};

/// Field compiled against its chart's coordinate order.
class CompiledField {
 public:
  CompiledField() = default;
  CompiledField(const VecField& field, const Point& parameters = {});
  void operator()(std::span<const double> x, std::span<double> out) const;
  std::size_t dim() const { return comps_.size(); }

 private:
  std::vector<CompiledExpr> comps_;
};

/// Classical RK4 with ceil(|t|/step) equal steps; returns every visited point.
std::vector<State> flow(const VecField& field, const State& start, double t, const FlowOptions& opts = {},
                        const Point& parameters = {});
State flow_endpoint(const VecField& field, const State& start, double t, const FlowOptions& opts = {},
                    const Point& parameters = {});

/// Generic RK4 driver on an arbitrary right-hand side.
using Rhs = std::function<void(std::span<const double>, std::span<double>)>;
State integrate_rk4(const Rhs& rhs, State y, double t, double step);

/// |flow_X(t) o flow_Y(t) - flow_Y(t) o flow_X(t)| at the point.
double commutation_defect(const VecField& x, const VecField& y, const State& point, double t,
                          const FlowOptions& opts = {}, const Point& parameters = {});
double commutation_defect(const Distribution& d, const State& point, double t, const FlowOptions& opts = {},
                          const Point& parameters = {});

struct GridSpec {
  std::vector<double> lo, hi;  // per base axis
  std::vector<int> counts;     // nodes per axis (>= 1)
  /// Base point of the seed slice; defaults to lo.
  std::vector<double> anchor;
  /// Base axes swept by the flows; default: the first r axes.
  std::vector<std::string> flow_axes;
  /// Order in which the flow axes are composed; default ascending.
  std::vector<std::string> sweep_order;
  double step = kDefaultStep;
  double tolerance = 1e-6;
};

struct SampledPatch {
  std::vector<std::string> base;
  std::vector<std::string> fiber;
  std::vector<int> counts;
  std::vector<State> nodes;                    // full chart coordinates, lattice order
  std::vector<std::vector<double>> jets;       // fiber x base derivatives, row-major
  std::vector<std::vector<double>> residuals;  // one entry per critical equation
  double max_residual = 0.0;
  std::string provenance;                      // JSON text

  std::string to_csv() const;
};

/// Sweeps the seed section (evaluated on the slice through the anchor spanned
/// by the non-flow axes) along transversal fields of `d`, adapted so that
/// their base part is a unit vector on each flow axis (and, for non-proper
/// problems, their w part vanishes). Residuals of the critical equations are
/// checked at every node.
SampledPatch sweep_section(const VariationalProblem& p, const Distribution& d, const SectionMap& seed,
                           const GridSpec& grid, const Point& parameters = {});

}  // namespace cartan
