#pragma once

// Linear algebra over the expression field, with numeric rank certification.

#include <vector>

#include "cartan/eval.hpp"
#include "cartan/expr.hpp"

namespace cartan {

using ExprMatrix = std::vector<std::vector<Expr>>;
using NumMatrix = std::vector<std::vector<double>>;

Expr determinant(const ExprMatrix& m);

/// Numeric rank: singular values above rel_tol * max(1, sigma_max).
int numeric_rank(const NumMatrix& m, double rel_tol = kZeroThreshold);
NumMatrix evaluate(const ExprMatrix& m, const Point& point);

/// Rank at every sample point of the box; the points are returned alongside.
struct RankSurvey {
  std::vector<Point> points;
  std::vector<int> ranks;  // -1 where evaluation failed
  bool constant() const;
  int rank() const;  // rank at the first successfully evaluated point
};
RankSurvey survey_rank(const ExprMatrix& m, const Box& box);

struct Nullspace {
  std::vector<std::vector<Expr>> basis;
  std::vector<int> pivot_rows;
  std::vector<int> pivot_cols;
  Expr pivot_minor;
  int rank = 0;
  /// Every basis vector solves the system exactly (canonical zero residual).
  bool exact = true;
  RankSurvey survey;
};

/// Right nullspace of m. The rank is certified constant on the box (else
/// NonConstantRankError); pivots are chosen by full pivoting on the value at
/// the box center and the pivot minor is certified nonzero. Basis vectors
/// come from Cramer's rule on the pivot block, then cleared of common factors.
Nullspace nullspace(const ExprMatrix& m, const Box& box);

/// Divides out the common monomial/rational content of a vector (and the
/// given divisor when it divides every entry exactly); leading nonzero entry
/// made positive.
std::vector<Expr> simplify_vector(std::vector<Expr> v, const Expr& divisor = Expr(1));

/// Solves the square system a x = b in floating point; empty when singular.
std::vector<double> solve_dense(const NumMatrix& a, const std::vector<double>& b);

}  // namespace cartan
