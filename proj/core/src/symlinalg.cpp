#include "cartan/symlinalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>

#include "cartan/errors.hpp"

namespace cartan {

namespace {

using Mask = std::uint32_t;

Expr det_rec(const ExprMatrix& m, std::size_t row, Mask used, std::map<Mask, Expr>& memo) {
  const std::size_t n = m.size();
  if (row == n) return Expr(1);
  if (auto it = memo.find(used); it != memo.end()) return it->second;
  Expr sum;
  int sign = 1;
  for (std::size_t c = 0; c < n; ++c) {
    if (used & (Mask{1} << c)) continue;
    if (!m[row][c].is_zero()) {
      Expr minor = det_rec(m, row + 1, used | (Mask{1} << c), memo);
      if (!minor.is_zero()) sum += sign > 0 ? m[row][c] * minor : -(m[row][c] * minor);
    }
    sign = -sign;
  }
  memo.emplace(used, sum);
  return sum;
}

Eigen::MatrixXd to_eigen(const NumMatrix& m) {
  const auto rows = static_cast<Eigen::Index>(m.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(m[0].size());
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return out;
}

std::set<std::string> matrix_symbols(const ExprMatrix& m) {
  std::set<std::string> out;
  for (const auto& row : m)
    for (const auto& e : row) collect_symbols(e, out);
  return out;
}

}  // namespace

Expr determinant(const ExprMatrix& m) {
  if (m.empty()) return Expr(1);
  if (m.size() > 24) throw Error(ErrorKind::InvalidArgument, "determinant: matrix too large");
  for (const auto& row : m)
    if (row.size() != m.size()) throw Error(ErrorKind::InvalidArgument, "determinant of a non-square matrix");
  std::map<Mask, Expr> memo;
  return det_rec(m, 0, 0, memo);
}

int numeric_rank(const NumMatrix& m, double rel_tol) {
  if (m.empty() || m[0].empty()) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(m));
  const auto& s = svd.singularValues();
  const double cut = rel_tol * std::max(1.0, s.size() ? s(0) : 0.0);
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cut) ++r;
  return r;
}

NumMatrix evaluate(const ExprMatrix& m, const Point& point) {
  NumMatrix out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    out[i].reserve(m[i].size());
    for (const auto& e : m[i]) out[i].push_back(eval(e, point));
  }
  return out;
}

bool RankSurvey::constant() const {
  int seen = -1;
  for (int r : ranks) {
    if (r < 0) continue;
    if (seen >= 0 && r != seen) return false;
    seen = r;
  }
  return true;
}

int RankSurvey::rank() const {
  for (int r : ranks)
    if (r >= 0) return r;
  return -1;
}

RankSurvey survey_rank(const ExprMatrix& m, const Box& box) {
  RankSurvey s;
  s.points = box.sample_points(matrix_symbols(m));
  for (const auto& p : s.points) {
    int r = -1;
    try {
      r = numeric_rank(evaluate(m, p));
    } catch (const Error&) {
    }
    s.ranks.push_back(r);
  }
  return s;
}

std::vector<Expr> simplify_vector(std::vector<Expr> v, const Expr& divisor) {
  if (!(divisor.is_constant() && divisor.constant_value() == Rational(1)) && !divisor.is_zero()) {
    std::vector<Expr> q;
    bool ok = true;
    for (const auto& e : v) {
      auto d = exact_divide(e, divisor);
      if (!d) {
        ok = false;
        break;
      }
      q.push_back(*d);
    }
    if (ok) v = std::move(q);
  }
  // Common monomial content and rational gcd.
  std::optional<Expr> common;
  for (const auto& e : v) {
    if (e.is_zero()) continue;
    auto [content, prim] = content_split(e);
    const Term& t = content.terms().front();
    if (!common) {
      Rational c = abs(t.coeff);
      common = Expr::from_terms({Term{t.mono, c}});
      continue;
    }
    const Term& ct = common->terms().front();
    std::map<Atom, int> a(ct.mono.begin(), ct.mono.end());
    std::map<Atom, int> b(t.mono.begin(), t.mono.end());
    Monomial g;
    for (const auto& [atom, ex] : a) {
      auto it = b.find(atom);
      const int other = it == b.end() ? 0 : it->second;
      // gcd of Laurent monomials: minimum exponent; keep only when both
      // share the sign so the quotient stays polynomial-like.
      if ((ex > 0 && other > 0) || (ex < 0 && other < 0)) {
        const int m = ex > 0 ? std::min(ex, other) : std::max(ex, other);
        g.emplace_back(atom, m);
      }
    }
    mpz_class num, den;
    mpz_gcd(num.get_mpz_t(), ct.coeff.get_num_mpz_t(), t.coeff.get_num_mpz_t());
    mpz_lcm(den.get_mpz_t(), ct.coeff.get_den_mpz_t(), t.coeff.get_den_mpz_t());
    Rational gc(num, den);
    gc.canonicalize();
    common = Expr::from_terms({Term{g, gc}});
  }
  if (!common) return v;
  const Expr inv = reciprocal(*common);
  for (auto& e : v) e = e * inv;
  for (const auto& e : v) {
    if (e.is_zero()) continue;
    if (e.terms().front().coeff < 0)
      for (auto& x : v) x = -x;
    break;
  }
  return v;
}

Nullspace nullspace(const ExprMatrix& m, const Box& box) {
  Nullspace out;
  const std::size_t rows = m.size();
  const std::size_t cols = rows == 0 ? 0 : m[0].size();
  out.survey = survey_rank(m, box);
  if (!out.survey.constant()) {
    std::vector<std::pair<Point, int>> witnesses;
    const int first = out.survey.rank();
    bool have_first = false;
    for (std::size_t i = 0; i < out.survey.points.size(); ++i) {
      const int r = out.survey.ranks[i];
      if (r < 0) continue;
      if (r == first && have_first) continue;
      if (r == first) have_first = true;
      witnesses.emplace_back(out.survey.points[i], r);
      if (witnesses.size() >= 4) break;
    }
    throw NonConstantRankError("rank is not constant on the sampling box", std::move(witnesses));
  }
  const int rank = out.survey.rank();
  if (rank < 0) throw Error(ErrorKind::EvaluationFailure, "matrix could not be evaluated at any sample point");
  out.rank = rank;

  // Full pivoting on the value at the first evaluable sample (the box center
  // unless evaluation fails there).
  std::size_t at = 0;
  while (out.survey.ranks[at] < 0) ++at;
  NumMatrix a = evaluate(m, out.survey.points[at]);
  std::vector<int> row_perm(rows), col_used(cols, 0), row_used(rows, 0);
  for (int step = 0; step < rank; ++step) {
    double best = -1.0;
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < rows; ++i) {
      if (row_used[i]) continue;
      for (std::size_t j = 0; j < cols; ++j) {
        if (col_used[j]) continue;
        if (std::fabs(a[i][j]) > best) {
          best = std::fabs(a[i][j]);
          bi = i;
          bj = j;
        }
      }
    }
    row_used[bi] = 1;
    col_used[bj] = 1;
    out.pivot_rows.push_back(static_cast<int>(bi));
    out.pivot_cols.push_back(static_cast<int>(bj));
    for (std::size_t i = 0; i < rows; ++i) {
      if (row_used[i] || a[i][bj] == 0.0) continue;
      const double f = a[i][bj] / a[bi][bj];
      for (std::size_t j = 0; j < cols; ++j) a[i][j] -= f * a[bi][j];
    }
  }
  std::sort(out.pivot_rows.begin(), out.pivot_rows.end());
  std::sort(out.pivot_cols.begin(), out.pivot_cols.end());

  ExprMatrix block(static_cast<std::size_t>(rank));
  for (int i = 0; i < rank; ++i)
    for (int j = 0; j < rank; ++j)
      block[static_cast<std::size_t>(i)].push_back(m[static_cast<std::size_t>(out.pivot_rows[static_cast<std::size_t>(i)])]
                                                     [static_cast<std::size_t>(out.pivot_cols[static_cast<std::size_t>(j)])]);
  out.pivot_minor = determinant(block);
  if (rank > 0 && !is_zero(out.pivot_minor, box).nonzero()) {
    throw Error(ErrorKind::EvaluationFailure, "pivot minor could not be certified nonzero");
  }

  for (std::size_t f = 0; f < cols; ++f) {
    if (col_used[f]) continue;
    std::vector<Expr> v(cols);
    v[f] = out.pivot_minor;
    for (int i = 0; i < rank; ++i) {
      ExprMatrix mi = block;
      for (int r = 0; r < rank; ++r)
        mi[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)] =
            m[static_cast<std::size_t>(out.pivot_rows[static_cast<std::size_t>(r)])][f];
      v[static_cast<std::size_t>(out.pivot_cols[static_cast<std::size_t>(i)])] = -determinant(mi);
    }
    v = simplify_vector(std::move(v), out.pivot_minor);
    for (std::size_t r = 0; r < rows && out.exact; ++r) {
      Expr s;
      for (std::size_t j = 0; j < cols; ++j)
        if (!v[j].is_zero() && !m[r][j].is_zero()) s += m[r][j] * v[j];
      if (!s.is_zero()) out.exact = false;
    }
    out.basis.push_back(std::move(v));
  }
  return out;
}

std::vector<double> solve_dense(const NumMatrix& a, const std::vector<double>& b) {
  const Eigen::MatrixXd A = to_eigen(a);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < b.size(); ++i) rhs(static_cast<Eigen::Index>(i)) = b[i];
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible()) return {};
  Eigen::VectorXd x = lu.solve(rhs);
  return {x.data(), x.data() + x.size()};
}

}  // namespace cartan
