#include "cartan/ideals.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cartan/errors.hpp"

namespace cartan {

namespace {

// All ascending multi-indices of the given length over n coordinates.
std::vector<MultiIndex> combinations(int n, int len) {
  std::vector<MultiIndex> out;
  if (len < 0 || len > n) return out;
  MultiIndex idx(static_cast<std::size_t>(len));
  for (int i = 0; i < len; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (;;) {
    out.push_back(idx);
    int i = len - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - len + i) --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < len; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

struct Reducer {
  DiffForm form;
  MultiIndex pivot;
  Rational lead;
};

// Highest multi-index carrying a nonzero rational constant coefficient.
std::optional<std::pair<MultiIndex, Rational>> constant_pivot(const DiffForm& f) {
  for (auto it = f.terms().rbegin(); it != f.terms().rend(); ++it) {
    if (auto c = it->second.constant_value()) return std::make_pair(it->first, *c);
  }
  return std::nullopt;
}

DiffForm reduce(DiffForm f, const std::vector<Reducer>& basis) {
  for (const auto& r : basis) {
    const Expr c = f.coeff(r.pivot);
    if (c.is_zero()) continue;
    f = f - (c * Expr(Rational(1) / r.lead)) * r.form;
  }
  return f;
}

std::vector<Point> span_points(const std::vector<VecField>& fields, const Box& box) {
  std::set<std::string> vars;
  for (const auto& f : fields)
    for (const auto& c : f.components()) collect_symbols(c, vars);
  return box.sample_points(vars);
}

NumMatrix columns_at(const std::vector<VecField>& fields, const Point& p, std::size_t n) {
  NumMatrix m(n, std::vector<double>(fields.size()));
  for (std::size_t j = 0; j < fields.size(); ++j)
    for (std::size_t i = 0; i < n; ++i) m[i][j] = eval(fields[j][i], p);
  return m;
}

}  // namespace

const char* verdict_name(FrobeniusResult::Verdict v) {
  switch (v) {
    case FrobeniusResult::Verdict::Integrable: return "Integrable";
    case FrobeniusResult::Verdict::NotIntegrable: return "NotIntegrable";
    case FrobeniusResult::Verdict::Unknown: return "Unknown";
  }
  return "?";
}

CartanIdeal make_ideal(std::vector<DiffForm> generators) {
  if (generators.empty()) throw Error(ErrorKind::InvalidArgument, "an ideal needs at least one generator");
  CartanIdeal out;
  out.chart = generators.front().chart();
  for (auto& g : generators) {
    if (!same_chart(g.chart(), out.chart)) throw Error(ErrorKind::ChartMismatch, "generators on different charts");
    if (g.degree() < 1) throw Error(ErrorKind::DegreeMismatch, "generators must have degree >= 1");
    if (g.is_zero()) throw Error(ErrorKind::ZeroEta, "zero generator");
  }
  out.generators = std::move(generators);
  return out;
}

bool ideal_contains(const CartanIdeal& ideal, const DiffForm& form) {
  if (form.is_zero()) return true;
  const int e = form.degree();
  const int n = static_cast<int>(ideal.chart->dim());
  std::vector<Reducer> basis;
  for (const auto& g : ideal.generators) {
    const int extra = e - g.degree();
    if (extra < 0) continue;
    for (const auto& idx : combinations(n, extra)) {
      DiffForm prod = wedge(DiffForm::monomial(ideal.chart, idx), g);
      prod = reduce(std::move(prod), basis);
      if (prod.is_zero()) continue;
      auto piv = constant_pivot(prod);
      if (!piv) continue;
      basis.push_back(Reducer{std::move(prod), piv->first, piv->second});
    }
  }
  return reduce(form, basis).is_zero();
}

CartanIdeal complete_to_differential(const CartanIdeal& ideal) {
  CartanIdeal out = ideal;
  for (std::size_t i = 0; i < out.generators.size(); ++i) {
    if (static_cast<std::size_t>(out.generators[i].degree()) >= out.chart->dim()) continue;
    DiffForm dg = ext_d(out.generators[i]);
    if (!ideal_contains(out, dg)) out.generators.push_back(std::move(dg));
  }
  out.closed = true;
  return out;
}

IntegralReport is_integral_section(const CartanIdeal& ideal, const SectionMap& phi) {
  IntegralReport rep;
  for (std::size_t i = 0; i < ideal.generators.size(); ++i) {
    DiffForm r = pullback(phi, ideal.generators[i]);
    if (!r.is_zero()) {
      rep.integral = false;
      rep.residuals.emplace_back(i, std::move(r));
    }
  }
  return rep;
}

ExprMatrix contraction_matrix(const DiffForm& form, const std::vector<std::size_t>& columns) {
  const auto& chart = form.chart();
  std::vector<std::size_t> cols = columns;
  if (cols.empty())
    for (std::size_t j = 0; j < chart->dim(); ++j) cols.push_back(j);
  const auto rows = combinations(static_cast<int>(chart->dim()), form.degree() - 1);
  ExprMatrix m(rows.size(), std::vector<Expr>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    DiffForm ic = interior(VecField::coordinate(chart, chart->name(cols[c])), form);
    for (std::size_t r = 0; r < rows.size(); ++r) m[r][c] = ic.coeff(rows[r]);
  }
  return m;
}

Distribution kernel_of_forms(const std::vector<DiffForm>& forms, const Box& box,
                             const std::vector<std::size_t>& columns) {
  if (forms.empty()) throw Error(ErrorKind::InvalidArgument, "no defining forms");
  const auto& chart = forms.front().chart();
  ExprMatrix m;
  for (const auto& f : forms) {
    if (!same_chart(f.chart(), chart)) throw Error(ErrorKind::ChartMismatch, "defining forms on different charts");
    if (f.degree() < 1) throw Error(ErrorKind::DegreeMismatch, "cannot contract a 0-form");
    ExprMatrix part = contraction_matrix(f, columns);
    for (auto& row : part) {
      if (std::all_of(row.begin(), row.end(), [](const Expr& e) { return e.is_zero(); })) continue;
      m.push_back(std::move(row));
    }
  }
  std::vector<std::size_t> cols = columns;
  if (cols.empty())
    for (std::size_t j = 0; j < chart->dim(); ++j) cols.push_back(j);
  if (m.empty()) m.push_back(std::vector<Expr>(cols.size()));

  Nullspace ns = nullspace(m, box);
  Distribution d;
  d.chart = chart;
  d.box = box;
  d.certificate.seed = box.seed;
  d.certificate.points = ns.survey.points;
  d.certificate.ranks = ns.survey.ranks;
  d.pivot_rows = ns.pivot_rows;
  d.pivot_cols = ns.pivot_cols;
  d.exact = ns.exact;
  for (auto& v : ns.basis) {
    std::vector<Expr> comps(chart->dim());
    for (std::size_t c = 0; c < cols.size(); ++c) comps[cols[c]] = v[c];
    d.basis.emplace_back(chart, std::move(comps));
  }
  return d;
}

Distribution annihilator(const DiffForm& eta, const Box& box) {
  if (eta.is_zero()) throw Error(ErrorKind::ZeroEta, "annihilator of the zero form");
  return kernel_of_forms({eta}, box);
}

Distribution characteristic_distribution(const CartanIdeal& ideal, const Box& box) {
  const int deg = ideal.generators.front().degree();
  for (const auto& g : ideal.generators) {
    if (g.degree() != deg) throw Error(ErrorKind::UnequalGeneratorDegrees, "generators of unequal degree");
  }
  return kernel_of_forms(ideal.generators, box);
}

FrobeniusResult frobenius_check(const Distribution& d, const Box& box) {
  FrobeniusResult res;
  const std::size_t r = d.rank();
  if (r < 2) return res;
  const std::size_t n = d.chart->dim();
  // Pivot rows of the n x r basis matrix, chosen where it is best conditioned
  // at the box center.
  ExprMatrix basis(n, std::vector<Expr>(r));
  for (std::size_t j = 0; j < r; ++j)
    for (std::size_t i = 0; i < n; ++i) basis[i][j] = d.basis[j][i];
  ExprMatrix transposed(r, std::vector<Expr>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < r; ++j) transposed[j][i] = basis[i][j];
  Nullspace ns = nullspace(transposed, box);
  const auto& rows = ns.pivot_cols;  // pivot coordinates
  ExprMatrix block(r);
  for (std::size_t a = 0; a < r; ++a)
    for (std::size_t b = 0; b < r; ++b) block[a].push_back(basis[static_cast<std::size_t>(rows[a])][b]);
  const Expr det = determinant(block);

  bool unknown = false;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = i + 1; j < r; ++j) {
      VecField br = lie_bracket(d.basis[i], d.basis[j]);
      VecField resid = det * br;
      for (std::size_t k = 0; k < r; ++k) {
        ExprMatrix mk = block;
        for (std::size_t a = 0; a < r; ++a) mk[a][k] = br[static_cast<std::size_t>(rows[a])];
        resid = resid - determinant(mk) * d.basis[k];
      }
      if (resid.is_zero()) continue;
      // Not canonically zero: sample it.
      for (std::size_t c = 0; c < n; ++c) {
        if (resid[c].is_zero()) continue;
        ZeroVerdict v = is_zero(resid[c], box);
        if (v.nonzero()) {
          res.verdict = FrobeniusResult::Verdict::NotIntegrable;
          res.i = i;
          res.j = j;
          res.bracket = br;
          res.witness = v.witness;
          res.magnitude = v.magnitude;
          return res;
        }
      }
      if (!unknown) {
        unknown = true;
        res.i = i;
        res.j = j;
        res.bracket = br;
      }
    }
  }
  if (unknown) {
    res.verdict = FrobeniusResult::Verdict::Unknown;
    res.numerically_integrable = true;
  }
  return res;
}

std::vector<DiffForm> complete_ideal_generators(const Distribution& d) {
  const std::size_t n = d.chart->dim();
  if (d.rank() == n) return {};
  ExprMatrix m;
  for (const auto& y : d.basis) m.push_back(y.components());
  if (m.empty()) m.push_back(std::vector<Expr>(n));
  Nullspace ns = nullspace(m, d.box);
  std::vector<DiffForm> out;
  for (const auto& v : ns.basis) out.push_back(DiffForm::one_form(d.chart, v));
  return out;
}

bool same_span(const std::vector<VecField>& a, const std::vector<VecField>& b, const Box& box) {
  if (a.empty() || b.empty()) return a.empty() && b.empty();
  const std::size_t n = a.front().size();
  std::vector<VecField> all = a;
  all.insert(all.end(), b.begin(), b.end());
  for (const auto& p : span_points(all, box)) {
    const int ra = numeric_rank(columns_at(a, p, n));
    const int rb = numeric_rank(columns_at(b, p, n));
    const int rab = numeric_rank(columns_at(all, p, n));
    if (ra != rb || ra != rab) return false;
  }
  return true;
}

bool in_span(const VecField& v, const std::vector<VecField>& basis, const Box& box) {
  const std::size_t n = v.size();
  std::vector<VecField> all = basis;
  all.push_back(v);
  for (const auto& p : span_points(all, box)) {
    if (numeric_rank(columns_at(all, p, n)) != numeric_rank(columns_at(basis, p, n))) return false;
  }
  return true;
}

}  // namespace cartan
