#include "cartan/flows.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "cartan/errors.hpp"
#include "cartan/symlinalg.hpp"

namespace cartan {

namespace {

void check_bounds(const State& y, const ChartPtr& chart, const std::optional<Box>& bounds) {
  if (!bounds) return;
  for (std::size_t i = 0; i < y.size(); ++i) {
    auto [lo, hi] = bounds->range(chart->name(i));
    if (y[i] < lo || y[i] > hi) {
      throw Error(ErrorKind::BoxExit, "trajectory left the box through " + chart->name(i));
    }
  }
}

int step_count(double t, double step) {
  if (!(step > 0.0)) throw Error(ErrorKind::InvalidArgument, "step must be positive");
  return t == 0.0 ? 0 : static_cast<int>(std::ceil(std::fabs(t) / step - 1e-12));
}

void rk4_step(const Rhs& rhs, State& y, double h, State& k1, State& k2, State& k3, State& k4, State& tmp) {
  const std::size_t n = y.size();
  rhs(y, k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
  rhs(tmp, k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
  rhs(tmp, k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
  rhs(tmp, k4);
  for (std::size_t i = 0; i < n; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

// Transversal fields X_j = Y c_j adapted to a set of constraint rows, with
// their Jacobians, evaluated numerically from the distribution basis.
class AdaptedFields {
 public:
  AdaptedFields(const Distribution& d, std::vector<std::size_t> rows, const Point& params)
      : n_(d.chart->dim()), q_(d.rank()), rows_(std::move(rows)) {
    const auto& names = d.chart->names();
    for (const auto& y : d.basis) {
      std::vector<CompiledExpr> comps;
      std::vector<CompiledExpr> jac;
      for (std::size_t i = 0; i < n_; ++i) {
        comps.emplace_back(y[i], names, params);
        for (std::size_t l = 0; l < n_; ++l) jac.emplace_back(diff(y[i], names[l]), names, params);
      }
      fields_.push_back(std::move(comps));
      jacobians_.push_back(std::move(jac));
    }
  }

  std::size_t constraints() const { return rows_.size(); }

  Eigen::MatrixXd basis_at(std::span<const double> x) const {
    Eigen::MatrixXd y(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(q_));
    for (std::size_t c = 0; c < q_; ++c)
      for (std::size_t i = 0; i < n_; ++i) y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = fields_[c][i](x);
    return y;
  }

  // Returns false when the constraint block is singular. The block is
  // column-equilibrated first; `scale` undoes that: K^-1 v = scale .* lu.solve(v).
  bool coefficients(const Eigen::MatrixXd& y, std::size_t j, Eigen::VectorXd& c, Eigen::FullPivLU<Eigen::MatrixXd>& lu,
                    Eigen::VectorXd& scale) const {
    Eigen::MatrixXd k(static_cast<Eigen::Index>(rows_.size()), static_cast<Eigen::Index>(q_));
    for (std::size_t r = 0; r < rows_.size(); ++r) k.row(static_cast<Eigen::Index>(r)) = y.row(static_cast<Eigen::Index>(rows_[r]));
    scale = Eigen::VectorXd::Ones(k.cols());
    for (Eigen::Index col = 0; col < k.cols(); ++col) {
      const double nrm = k.col(col).norm();
      if (nrm > 0.0) {
        scale(col) = 1.0 / nrm;
        k.col(col) *= scale(col);
      }
    }
    lu.compute(k);
    if (!lu.isInvertible() || std::fabs(lu.determinant()) < 1e-12) return false;
    Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows_.size()));
    e(static_cast<Eigen::Index>(j)) = 1.0;
    c = scale.cwiseProduct(lu.solve(e));
    return true;
  }

  Eigen::VectorXd field(std::span<const double> x, std::size_t j) const {
    Eigen::MatrixXd y = basis_at(x);
    Eigen::VectorXd c, scale;
    Eigen::FullPivLU<Eigen::MatrixXd> lu;
    if (!coefficients(y, j, c, lu, scale)) throw Error(ErrorKind::EvaluationFailure, "transversal fields degenerate along the flow");
    return y * c;
  }

  // Field value and Jacobian dX/dx.
  void field_and_jacobian(std::span<const double> x, std::size_t j, Eigen::VectorXd& value, Eigen::MatrixXd& jac) const {
    Eigen::MatrixXd y = basis_at(x);
    Eigen::VectorXd c, scale;
    Eigen::FullPivLU<Eigen::MatrixXd> lu;
    if (!coefficients(y, j, c, lu, scale)) throw Error(ErrorKind::EvaluationFailure, "transversal fields degenerate along the flow");
    value = y * c;
    jac.setZero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
    for (std::size_t l = 0; l < n_; ++l) {
      Eigen::MatrixXd dy(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(q_));
      for (std::size_t b = 0; b < q_; ++b)
        for (std::size_t i = 0; i < n_; ++i)
          dy(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b)) = jacobians_[b][i * n_ + l](x);
      Eigen::VectorXd dk_c(static_cast<Eigen::Index>(rows_.size()));
      const Eigen::VectorXd dyc = dy * c;
      for (std::size_t r = 0; r < rows_.size(); ++r) dk_c(static_cast<Eigen::Index>(r)) = dyc(static_cast<Eigen::Index>(rows_[r]));
      const Eigen::VectorXd dc = -scale.cwiseProduct(lu.solve(dk_c));
      jac.col(static_cast<Eigen::Index>(l)) = dyc + y * dc;
    }
  }

 private:
  std::size_t n_, q_;
  std::vector<std::size_t> rows_;
  std::vector<std::vector<CompiledExpr>> fields_;
  std::vector<std::vector<CompiledExpr>> jacobians_;
};

// Flow of the adapted field j carrying tangent vectors along (variational
// equations). `tangents` holds m vectors of length n.
void flow_with_tangents(const AdaptedFields& af, std::size_t j, State& x, std::vector<State>& tangents, double t,
                        double step) {
  const std::size_t n = x.size();
  const std::size_t m = tangents.size();
  if (m == 0) {
    Rhs rhs = [&](std::span<const double> y, std::span<double> out) {
      const Eigen::VectorXd v = af.field(y, j);
      for (std::size_t i = 0; i < n; ++i) out[i] = v(static_cast<Eigen::Index>(i));
    };
    x = integrate_rk4(rhs, x, t, step);
    return;
  }
  State big(n * (1 + m));
  std::copy(x.begin(), x.end(), big.begin());
  for (std::size_t a = 0; a < m; ++a) std::copy(tangents[a].begin(), tangents[a].end(), big.begin() + static_cast<std::ptrdiff_t>(n * (1 + a)));
  Rhs rhs = [&](std::span<const double> y, std::span<double> out) {
    Eigen::VectorXd v;
    Eigen::MatrixXd jac;
    af.field_and_jacobian(y.subspan(0, n), j, v, jac);
    for (std::size_t i = 0; i < n; ++i) out[i] = v(static_cast<Eigen::Index>(i));
    for (std::size_t a = 0; a < m; ++a) {
      Eigen::Map<const Eigen::VectorXd> d(y.data() + n * (1 + a), static_cast<Eigen::Index>(n));
      Eigen::VectorXd jd = jac * d;
      for (std::size_t i = 0; i < n; ++i) out[n * (1 + a) + i] = jd(static_cast<Eigen::Index>(i));
    }
  };
  big = integrate_rk4(rhs, big, t, step);
  std::copy(big.begin(), big.begin() + static_cast<std::ptrdiff_t>(n), x.begin());
  for (std::size_t a = 0; a < m; ++a)
    std::copy(big.begin() + static_cast<std::ptrdiff_t>(n * (1 + a)), big.begin() + static_cast<std::ptrdiff_t>(n * (2 + a)), tangents[a].begin());
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

CompiledField::CompiledField(const VecField& field, const Point& parameters) {
  for (std::size_t i = 0; i < field.size(); ++i) comps_.emplace_back(field[i], field.chart()->names(), parameters);
}

void CompiledField::operator()(std::span<const double> x, std::span<double> out) const {
  for (std::size_t i = 0; i < comps_.size(); ++i) out[i] = comps_[i](x);
}

State integrate_rk4(const Rhs& rhs, State y, double t, double step) {
  const int steps = step_count(t, step);
  if (steps == 0) return y;
  const double h = t / steps;
  State k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()), tmp(y.size());
  try {
    for (int s = 0; s < steps; ++s) rk4_step(rhs, y, h, k1, k2, k3, k4, tmp);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::DivisionByZero || e.kind() == ErrorKind::DomainError)
      throw Error(ErrorKind::EvaluationFailure, std::string("field evaluation failed: ") + e.what());
    throw;
  }
  return y;
}

std::vector<State> flow(const VecField& field, const State& start, double t, const FlowOptions& opts,
                        const Point& parameters) {
  if (start.size() != field.size()) throw Error(ErrorKind::ChartMismatch, "start point dimension");
  const CompiledField f(field, parameters);
  const int steps = step_count(t, opts.step);
  std::vector<State> path{start};
  check_bounds(start, field.chart(), opts.bounds);
  if (steps == 0) return path;
  const double h = t / steps;
  Rhs rhs = [&](std::span<const double> y, std::span<double> out) { f(y, out); };
  State y = start;
  State k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()), tmp(y.size());
  path.reserve(static_cast<std::size_t>(steps) + 1);
  for (int s = 0; s < steps; ++s) {
    try {
      rk4_step(rhs, y, h, k1, k2, k3, k4, tmp);
    } catch (const Error& e) {
      throw Error(ErrorKind::EvaluationFailure, std::string("field evaluation failed: ") + e.what());
    }
    for (double v : y)
      if (!std::isfinite(v)) throw Error(ErrorKind::EvaluationFailure, "trajectory is not finite");
    check_bounds(y, field.chart(), opts.bounds);
    path.push_back(y);
  }
  return path;
}

State flow_endpoint(const VecField& field, const State& start, double t, const FlowOptions& opts,
                    const Point& parameters) {
  return flow(field, start, t, opts, parameters).back();
}

double commutation_defect(const VecField& x, const VecField& y, const State& point, double t, const FlowOptions& opts,
                          const Point& parameters) {
  const State a = flow_endpoint(x, flow_endpoint(y, point, t, opts, parameters), t, opts, parameters);
  const State b = flow_endpoint(y, flow_endpoint(x, point, t, opts, parameters), t, opts, parameters);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double commutation_defect(const Distribution& d, const State& point, double t, const FlowOptions& opts,
                          const Point& parameters) {
  if (d.rank() < 2) throw Error(ErrorKind::InvalidArgument, "commutation defect needs two basis fields");
  return commutation_defect(d.basis[0], d.basis[1], point, t, opts, parameters);
}

std::string SampledPatch::to_csv() const {
  std::ostringstream os;
  std::string prov = provenance;
  std::string quoted = "\"";
  for (char c : prov) {
    if (c == '"') quoted += "\"\"";
    else quoted += c;
  }
  quoted += "\"";
  os << "# provenance," << quoted << "\n";
  bool first = true;
  for (const auto& b : base) {
    os << (first ? "" : ",") << b;
    first = false;
  }
  for (const auto& f : fiber) os << "," << f;
  const std::size_t nres = residuals.empty() ? 0 : residuals.front().size();
  for (std::size_t a = 0; a < nres; ++a) os << ",residual_" << (a + 1);
  os << "\n";
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = 0; j < nodes[i].size(); ++j) os << (j ? "," : "") << fmt(nodes[i][j]);
    for (double r : residuals[i]) os << "," << fmt(r);
    os << "\n";
  }
  return os.str();
}

SampledPatch sweep_section(const VariationalProblem& p, const Distribution& d, const SectionMap& seed,
                           const GridSpec& grid, const Point& parameters) {
  const BundleChart& b = p.bundle;
  if (!same_chart(d.chart, b.chart())) throw Error(ErrorKind::ChartMismatch, "distribution chart differs from problem chart");
  if (!(seed.bundle() == b)) throw Error(ErrorKind::ChartMismatch, "seed section lives on a different bundle chart");
  const std::size_t k = b.k(), n = b.n();
  if (grid.lo.size() != k || grid.hi.size() != k || grid.counts.size() != k)
    throw Error(ErrorKind::InvalidArgument, "grid needs lo, hi and counts for every base axis");
  for (int c : grid.counts)
    if (c < 1) throw Error(ErrorKind::InvalidArgument, "grid counts must be positive");
  const bool non_proper = p.classification.proper == Tri::False;
  const std::size_t q = d.rank();

  // Flow axes.
  std::vector<std::size_t> flow_axes;
  if (!grid.flow_axes.empty()) {
    for (const auto& name : grid.flow_axes) {
      auto i = b.chart()->index_of(name);
      if (!i || *i >= k) throw Error(ErrorKind::InvalidArgument, "flow axis '" + name + "' is not a base coordinate");
      flow_axes.push_back(*i);
    }
    std::sort(flow_axes.begin(), flow_axes.end());
  } else {
    const std::size_t r = q >= (non_proper ? b.s() : 0) ? q - (non_proper ? b.s() : 0) : 0;
    for (std::size_t i = 0; i < std::min(r, k); ++i) flow_axes.push_back(i);
  }
  std::vector<std::size_t> seed_axes;
  for (std::size_t i = 0; i < k; ++i)
    if (std::find(flow_axes.begin(), flow_axes.end(), i) == flow_axes.end()) seed_axes.push_back(i);

  std::vector<std::size_t> rows = flow_axes;
  if (non_proper)
    for (std::size_t m = 0; m < b.s(); ++m) rows.push_back(k + b.p() + m);

  State anchor = grid.anchor.empty() ? grid.lo : grid.anchor;
  if (anchor.size() != k) throw Error(ErrorKind::InvalidArgument, "anchor needs one value per base axis");

  // Seed compilation: fiber values and their base derivatives.
  const auto& base_names = b.base();
  std::vector<CompiledExpr> seed_vals, seed_ders;
  for (const auto& v : seed.fiber_values()) {
    seed_vals.emplace_back(v, base_names, parameters);
    for (const auto& x : base_names) seed_ders.emplace_back(diff(v, x), base_names, parameters);
  }
  const std::size_t nf = seed_vals.size();
  auto seed_point = [&](const State& x) {
    State y(n);
    std::copy(x.begin(), x.end(), y.begin());
    for (std::size_t a = 0; a < nf; ++a) y[k + a] = seed_vals[a](x);
    return y;
  };
  auto seed_tangent = [&](const State& x, std::size_t axis) {
    State t(n, 0.0);
    t[axis] = 1.0;
    for (std::size_t a = 0; a < nf; ++a) t[k + a] = seed_ders[a * k + axis](x);
    return t;
  };

  AdaptedFields af(d, rows, parameters);
  {
    // Transversality at the anchor seed.
    const State y0 = seed_point(anchor);
    Eigen::MatrixXd basis = af.basis_at(y0);
    // Basis fields carry cleared denominators; compare directions, not sizes.
    Eigen::MatrixXd unit = basis;
    for (Eigen::Index c = 0; c < unit.cols(); ++c)
      if (unit.col(c).norm() > 0.0) unit.col(c).normalize();
    Eigen::MatrixXd base_proj = unit.topRows(static_cast<Eigen::Index>(k));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(base_proj);
    int base_rank = 0;
    const auto& sv = svd.singularValues();
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > kZeroThreshold * std::max(1.0, sv(0))) ++base_rank;
    if (flow_axes.empty() || static_cast<std::size_t>(base_rank) < flow_axes.size() || rows.size() != q) {
      throw Error(ErrorKind::NonTransversalDistribution,
                  "transversal part of the distribution has rank " + std::to_string(base_rank) + ", need " +
                      std::to_string(std::max<std::size_t>(flow_axes.size(), 1)) + " with " + std::to_string(q) +
                      " basis fields");
    }
    Eigen::VectorXd c, scale;
    Eigen::FullPivLU<Eigen::MatrixXd> lu;
    if (!af.coefficients(basis, 0, c, lu, scale)) {
      throw Error(ErrorKind::TangencyViolation, "seed slice is tangent to the characteristic distribution at the anchor");
    }
  }

  std::vector<std::size_t> order = flow_axes;
  if (!grid.sweep_order.empty()) {
    order.clear();
    for (const auto& name : grid.sweep_order) {
      auto i = b.chart()->index_of(name);
      if (!i || std::find(flow_axes.begin(), flow_axes.end(), *i) == flow_axes.end())
        throw Error(ErrorKind::InvalidArgument, "sweep axis '" + name + "' is not a flow axis");
      order.push_back(*i);
    }
    if (order.size() != flow_axes.size()) throw Error(ErrorKind::InvalidArgument, "sweep order must list every flow axis");
  }
  auto field_index = [&](std::size_t axis) {
    return static_cast<std::size_t>(std::find(flow_axes.begin(), flow_axes.end(), axis) - flow_axes.begin());
  };

  // Lattice.
  auto coord = [&](std::size_t axis, int i) {
    const int c = grid.counts[axis];
    return c == 1 ? grid.lo[axis] : grid.lo[axis] + (grid.hi[axis] - grid.lo[axis]) * i / (c - 1);
  };
  std::size_t total = 1;
  for (int c : grid.counts) total *= static_cast<std::size_t>(c);
  auto unflatten = [&](std::size_t flat) {
    std::vector<int> idx(k);
    for (std::size_t a = k; a-- > 0;) {
      idx[a] = static_cast<int>(flat % static_cast<std::size_t>(grid.counts[a]));
      flat /= static_cast<std::size_t>(grid.counts[a]);
    }
    return idx;
  };

  // Residual expressions in chart coordinates and jet symbols.
  std::vector<Expr> equations;
  try {
    equations = critical_equations(p).delta;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NormalFormRequired) throw;
    for (const auto& psi : p.psi) equations.push_back(omega_coefficient(b, psi));
  }
  std::vector<std::string> slots = b.chart()->names();
  const auto fiber = b.fiber();
  for (const auto& y : fiber)
    for (const auto& x : base_names) slots.push_back(jet_symbol(y, x));
  std::vector<CompiledExpr> residual_fns;
  for (const auto& e : equations) residual_fns.emplace_back(e, slots, parameters);

  SampledPatch patch;
  patch.base = base_names;
  patch.fiber = fiber;
  patch.counts = grid.counts;
  patch.nodes.resize(total);
  patch.jets.resize(total);
  patch.residuals.resize(total);

  // Jets from k tangent vectors: fiber block times inverse base block.
  auto jets_from = [&](const std::vector<State>& tangents) {
    Eigen::MatrixXd base(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    Eigen::MatrixXd fib(static_cast<Eigen::Index>(nf), static_cast<Eigen::Index>(k));
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t i = 0; i < k; ++i) base(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = tangents[c][i];
      for (std::size_t a = 0; a < nf; ++a) fib(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c)) = tangents[c][k + a];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(base);
    if (!lu.isInvertible()) throw Error(ErrorKind::TangencyViolation, "swept tangents are not transversal to the fibers");
    const Eigen::MatrixXd j = fib * lu.inverse();
    std::vector<double> out(nf * k);
    for (std::size_t a = 0; a < nf; ++a)
      for (std::size_t m = 0; m < k; ++m) out[a * k + m] = j(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(m));
    return out;
  };
  auto tangents_at = [&](const State& y, const std::vector<State>& transported) {
    std::vector<State> t(k);
    for (std::size_t fa : flow_axes) {
      const Eigen::VectorXd v = af.field(y, field_index(fa));
      t[fa].assign(v.data(), v.data() + v.size());
    }
    for (std::size_t s = 0; s < seed_axes.size(); ++s) t[seed_axes[s]] = transported[s];
    return t;
  };

  if (seed_axes.empty()) {
    // Point seed: sweep axis by axis, reusing partial paths.
    struct Partial {
      State y;
      std::vector<int> idx;  // -1 where not yet fixed
    };
    std::vector<Partial> current{{seed_point(anchor), std::vector<int>(k, -1)}};
    for (std::size_t axis : order) {
      std::vector<Partial> next;
      const std::size_t j = field_index(axis);
      for (const auto& part : current) {
        const int c = grid.counts[axis];
        // Forward from the anchor through increasing lattice values, then backward.
        State y = part.y;
        double at = anchor[axis];
        std::vector<Partial> fwd, bwd;
        for (int i = 0; i < c; ++i) {
          const double target = coord(axis, i);
          if (target < anchor[axis]) continue;
          std::vector<State> none;
          flow_with_tangents(af, j, y, none, target - at, grid.step);
          at = target;
          Partial np{y, part.idx};
          np.idx[axis] = i;
          fwd.push_back(std::move(np));
        }
        y = part.y;
        at = anchor[axis];
        for (int i = c - 1; i >= 0; --i) {
          const double target = coord(axis, i);
          if (target >= anchor[axis]) continue;
          std::vector<State> none;
          flow_with_tangents(af, j, y, none, target - at, grid.step);
          at = target;
          Partial np{y, part.idx};
          np.idx[axis] = i;
          bwd.push_back(std::move(np));
        }
        std::reverse(bwd.begin(), bwd.end());
        for (auto& x : bwd) next.push_back(std::move(x));
        for (auto& x : fwd) next.push_back(std::move(x));
      }
      current = std::move(next);
    }
    for (auto& part : current) {
      std::size_t flat = 0;
      for (std::size_t a = 0; a < k; ++a) flat = flat * static_cast<std::size_t>(grid.counts[a]) + static_cast<std::size_t>(part.idx[a]);
      patch.nodes[flat] = part.y;
    }
    for (std::size_t flat = 0; flat < total; ++flat) patch.jets[flat] = jets_from(tangents_at(patch.nodes[flat], {}));
  } else {
    // Seed slice of positive dimension: shoot from the slice so that the
    // swept point lands on the lattice node.
    const std::size_t h = seed_axes.size();
    for (std::size_t flat = 0; flat < total; ++flat) {
      const auto idx = unflatten(flat);
      State target(k);
      for (std::size_t a = 0; a < k; ++a) target[a] = coord(a, idx[a]);
      State s(h);
      for (std::size_t i = 0; i < h; ++i) s[i] = target[seed_axes[i]];
      State y;
      std::vector<State> tang;
      bool converged = false;
      for (int iter = 0; iter < 30; ++iter) {
        State x0 = anchor;
        for (std::size_t i = 0; i < h; ++i) x0[seed_axes[i]] = s[i];
        y = seed_point(x0);
        tang.clear();
        for (std::size_t i = 0; i < h; ++i) tang.push_back(seed_tangent(x0, seed_axes[i]));
        for (std::size_t axis : order)
          flow_with_tangents(af, field_index(axis), y, tang, target[axis] - anchor[axis], grid.step);
        Eigen::VectorXd res(static_cast<Eigen::Index>(h));
        Eigen::MatrixXd jac(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(h));
        for (std::size_t i = 0; i < h; ++i) {
          res(static_cast<Eigen::Index>(i)) = y[seed_axes[i]] - target[seed_axes[i]];
          for (std::size_t c = 0; c < h; ++c) jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = tang[c][seed_axes[i]];
        }
        if (res.norm() < 1e-13) {
          converged = true;
          break;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
        if (!lu.isInvertible()) throw Error(ErrorKind::TangencyViolation, "seed slice is tangent to the swept fields");
        const Eigen::VectorXd ds = lu.solve(res);
        for (std::size_t i = 0; i < h; ++i) s[i] -= ds(static_cast<Eigen::Index>(i));
        if (ds.norm() < 1e-14) {
          converged = true;
          break;
        }
      }
      if (!converged) throw Error(ErrorKind::EvaluationFailure, "shooting onto the lattice did not converge");
      patch.nodes[flat] = y;
      patch.jets[flat] = jets_from(tangents_at(y, tang));
    }
  }

  for (std::size_t flat = 0; flat < total; ++flat) {
    State slot_vals = patch.nodes[flat];
    slot_vals.insert(slot_vals.end(), patch.jets[flat].begin(), patch.jets[flat].end());
    auto& res = patch.residuals[flat];
    for (const auto& f : residual_fns) {
      const double v = std::fabs(f(slot_vals));
      res.push_back(v);
      patch.max_residual = std::max(patch.max_residual, v);
      if (!(v <= grid.tolerance)) {
        throw ResidualTooLargeError("critical-equation residual " + fmt(v) + " exceeds tolerance", patch.nodes[flat], v);
      }
    }
  }

  nlohmann::ordered_json prov;
  prov["seed_section"] = nlohmann::ordered_json::object();
  for (std::size_t a = 0; a < nf; ++a) prov["seed_section"][fiber[a]] = seed.fiber_values()[a].str();
  std::vector<std::string> fa, sa, so;
  for (auto i : flow_axes) fa.push_back(base_names[i]);
  for (auto i : seed_axes) sa.push_back(base_names[i]);
  for (auto i : order) so.push_back(base_names[i]);
  prov["flow_axes"] = fa;
  prov["seed_axes"] = sa;
  prov["sweep_order"] = so;
  prov["fields"] = nlohmann::ordered_json::array();
  for (const auto& y : d.basis) prov["fields"].push_back(y.str());
  prov["step"] = grid.step;
  prov["tolerance"] = grid.tolerance;
  prov["anchor"] = anchor;
  prov["counts"] = grid.counts;
  patch.provenance = prov.dump();
  return patch;
}

}  // namespace cartan
