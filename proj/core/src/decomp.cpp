#include "cartan/decomp.hpp"

#include <algorithm>
#include <cmath>

#include "cartan/errors.hpp"
#include "cartan/ideals.hpp"

namespace cartan {

namespace {

std::vector<Expr> row_of(const DiffForm& a) { return a.components(); }

}  // namespace

ExprMatrix FactorSet::L() const {
  ExprMatrix out;
  const std::size_t k = bundle.k();
  for (const auto& a : alpha) {
    auto c = row_of(a);
    out.emplace_back(c.begin() + static_cast<std::ptrdiff_t>(k), c.end());
  }
  return out;
}

ExprMatrix FactorSet::M() const {
  ExprMatrix out;
  const std::size_t k = bundle.k();
  for (const auto& a : alpha) {
    auto c = row_of(a);
    out.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(k));
  }
  return out;
}

FactorSet make_factor_set(const BundleChart& bundle, std::vector<DiffForm> alpha) {
  if (alpha.size() != bundle.k() + 1) {
    throw Error(ErrorKind::DegreeMismatch, "expected " + std::to_string(bundle.k() + 1) + " factors, got " +
                                               std::to_string(alpha.size()));
  }
  for (const auto& a : alpha) {
    if (a.degree() != 1) throw Error(ErrorKind::DegreeMismatch, "factors must be one-forms");
    if (!same_chart(a.chart(), bundle.chart())) throw Error(ErrorKind::ChartMismatch, "factor on a different chart");
  }
  FactorSet fs{bundle, std::move(alpha)};
  for (std::size_t i = 0; i < fs.alpha.size(); ++i) fs.source_rows.push_back(static_cast<int>(i));
  return fs;
}

Def8Verdict classify(const FactorSet& fs, const Box& box) {
  Def8Verdict v;
  ExprMatrix coeffs;
  for (const auto& a : fs.alpha) coeffs.push_back(a.components());
  RankSurvey s = survey_rank(coeffs, box);
  v.nondegenerate = true;
  for (std::size_t i = 0; i < s.ranks.size(); ++i) {
    if (s.ranks[i] != static_cast<int>(fs.alpha.size())) {
      v.nondegenerate = false;
      v.witnesses.emplace_back(s.points[i], s.ranks[i]);
      break;
    }
  }
  if (!v.nondegenerate) return v;

  std::vector<std::size_t> fiber_cols;
  for (std::size_t j = fs.bundle.k(); j < fs.bundle.n(); ++j) fiber_cols.push_back(j);
  try {
    Distribution vert = kernel_of_forms({fs.eta()}, box, fiber_cols);
    v.compatible = true;
    v.vertical_dim = static_cast<int>(vert.rank());
    v.adapted = vert.rank() == 0;
  } catch (const NonConstantRankError& e) {
    v.compatible = false;
    v.witnesses = e.witnesses();
  }
  return v;
}

FactorSet normalize(const FactorSet& fs, const Box& box) {
  const std::size_t k = fs.bundle.k();
  const std::size_t rows = fs.alpha.size();
  const std::size_t pivot_cols = fs.bundle.p();  // pivots restricted to the z block
  ExprMatrix a;
  for (const auto& f : fs.alpha) a.push_back(f.components());

  std::set<std::string> vars;
  for (const auto& row : a)
    for (const auto& e : row) collect_symbols(e, vars);
  const Point center = box.center(vars);

  FactorSet out = fs;
  out.operations.clear();
  Expr multiplier(1);
  std::vector<int> row_pivot(rows, -1);
  std::vector<char> col_used(pivot_cols, 0);
  const std::size_t want = std::min(pivot_cols, rows);
  for (std::size_t step = 0; step < want; ++step) {
    double best = -1.0;
    std::size_t bi = rows, bj = 0;
    for (std::size_t i = 0; i < rows; ++i) {
      if (row_pivot[i] >= 0) continue;
      for (std::size_t j = 0; j < pivot_cols; ++j) {
        if (col_used[j]) continue;
        const Expr& e = a[i][k + j];
        if (e.is_zero()) continue;
        double mag = 0.0;
        try {
          mag = std::fabs(eval(e, center));
        } catch (const Error&) {
          continue;
        }
        if (mag <= best) continue;
        if (!is_zero(e, box).nonzero()) continue;
        best = mag;
        bi = i;
        bj = j;
      }
    }
    if (bi == rows) break;
    row_pivot[bi] = static_cast<int>(bj);
    col_used[bj] = 1;
    const Expr piv = a[bi][k + bj];
    if (!(piv.is_constant() && piv.constant_value() == Rational(1))) {
      const Expr inv = reciprocal(piv);
      for (auto& e : a[bi]) e = e * inv;
      multiplier = multiplier * inv;
      out.operations.push_back("scale factor " + std::to_string(bi + 1) + " by 1/(" + piv.str() + ")");
    }
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == bi) continue;
      const Expr f = a[i][k + bj];
      if (f.is_zero()) continue;
      for (std::size_t j = 0; j < a[i].size(); ++j) a[i][j] = a[i][j] - f * a[bi][j];
      out.operations.push_back("factor " + std::to_string(i + 1) + " -= (" + f.str() + ") * factor " +
                               std::to_string(bi + 1));
    }
  }
  const std::size_t found = static_cast<std::size_t>(std::count_if(row_pivot.begin(), row_pivot.end(), [](int c) { return c >= 0; }));
  if (found < want) {
    throw Error(ErrorKind::RankDeficientL, "fiber block has rank " + std::to_string(found) + " < " + std::to_string(want));
  }

  // Pivoted factors ordered by pivot column, then the rest in input order.
  std::vector<std::size_t> order;
  for (std::size_t c = 0; c < pivot_cols; ++c)
    for (std::size_t i = 0; i < rows; ++i)
      if (row_pivot[i] == static_cast<int>(c)) order.push_back(i);
  for (std::size_t i = 0; i < rows; ++i)
    if (row_pivot[i] < 0) order.push_back(i);
  std::vector<std::size_t> perm = order;
  int inversions = 0;
  for (std::size_t i = 0; i < perm.size(); ++i)
    for (std::size_t j = i + 1; j < perm.size(); ++j)
      if (perm[i] > perm[j]) ++inversions;
  if (inversions % 2) {
    multiplier = -multiplier;
  }
  if (inversions) out.operations.push_back("reorder factors by pivot column");

  out.alpha.clear();
  out.pivot_fiber.clear();
  out.source_rows.clear();
  for (std::size_t i : order) {
    out.alpha.push_back(DiffForm::one_form(fs.bundle.chart(), a[i]));
    if (row_pivot[i] >= 0) out.pivot_fiber.push_back(row_pivot[i]);
    out.source_rows.push_back(fs.source_rows.empty() ? static_cast<int>(i) : fs.source_rows[i]);
  }
  out.multiplier = multiplier;
  out.normalized = true;
  return out;
}

std::vector<DiffForm> chi_forms(const FactorSet& fs) {
  std::vector<DiffForm> out;
  const std::size_t m = fs.alpha.size();
  for (std::size_t s = 0; s < m; ++s) {
    std::vector<DiffForm> rest;
    for (std::size_t i = 0; i < m; ++i)
      if (i != s) rest.push_back(fs.alpha[i]);
    DiffForm w = rest.empty() ? DiffForm::scalar(fs.bundle.chart(), Expr(1)) : wedge_all(rest);
    out.push_back(s % 2 == 0 ? w : -w);
  }
  return out;
}

ExprMatrix jet_matrix(const FactorSet& fs) {
  const auto& b = fs.bundle;
  const auto fiber = b.fiber();
  ExprMatrix lm = fs.L();
  ExprMatrix mm = fs.M();
  ExprMatrix p(fs.alpha.size(), std::vector<Expr>(b.k()));
  for (std::size_t i = 0; i < fs.alpha.size(); ++i) {
    for (std::size_t j = 0; j < b.k(); ++j) {
      Expr e = mm[i][j];
      for (std::size_t a = 0; a < fiber.size(); ++a) {
        if (lm[i][a].is_zero()) continue;
        e += lm[i][a] * Expr::symbol(jet_symbol(fiber[a], b.base()[j]));
      }
      p[i][j] = e;
    }
  }
  return p;
}

Expr signed_minor(const ExprMatrix& p, std::size_t a) {
  ExprMatrix sub;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (i != a) sub.push_back(p[i]);
  Expr d = determinant(sub);
  return a % 2 == 0 ? d : -d;
}

NormalBlocks normal_blocks(const FactorSet& fs) {
  if (!fs.normalized) throw Error(ErrorKind::NormalFormRequired, "factor set is not normalized");
  NormalBlocks nb;
  const ExprMatrix mm = fs.M();
  const ExprMatrix lm = fs.L();
  const std::size_t piv = fs.pivot_fiber.size();
  for (std::size_t i = 0; i < fs.alpha.size(); ++i) {
    if (i < piv) {
      nb.B.push_back(mm[i]);
      nb.G.emplace_back(lm[i].begin() + static_cast<std::ptrdiff_t>(fs.bundle.p()), lm[i].end());
    } else {
      nb.C.push_back(mm[i]);
    }
  }
  return nb;
}

}  // namespace cartan
