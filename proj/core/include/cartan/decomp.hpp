#pragma once

// Decomposable (k+1)-forms given by their one-form factors.

#include <string>
#include <vector>

#include "cartan/eval.hpp"
#include "cartan/forms.hpp"
#include "cartan/symlinalg.hpp"

namespace cartan {

struct FactorSet {
  FactorSet(BundleChart b, std::vector<DiffForm> a) : bundle(std::move(b)), alpha(std::move(a)) {}

  BundleChart bundle;
  std::vector<DiffForm> alpha;

  // Filled by normalize().
  bool normalized = false;
  std::vector<int> pivot_fiber;  // fiber column carrying the unit pivot of factor j
  std::vector<int> source_rows;  // original factor each normalized factor descends from
  Expr multiplier = Expr(1);     // wedge of normalized factors = multiplier * original eta
  std::vector<std::string> operations;

  std::size_t k() const { return bundle.k(); }
  /// (k+1) x (p+s) block of fiber coefficients.
  ExprMatrix L() const;
  /// (k+1) x k block of base coefficients.
  ExprMatrix M() const;
  DiffForm eta() const { return wedge_all(alpha); }
};

FactorSet make_factor_set(const BundleChart& bundle, std::vector<DiffForm> alpha);

struct Def8Verdict {
  bool nondegenerate = false;
  bool compatible = false;
  bool adapted = false;
  int vertical_dim = 0;
  std::vector<std::pair<Point, int>> witnesses;  // points where a rank test failed, with the rank seen
};

Def8Verdict classify(const FactorSet& fs, const Box& box);

/// Row-reduces the fiber block to unit pivots (restricted to the z block),
/// orders factors so factor j carries the j-th pivot, and records the change
/// of eta as a multiplier. Throws RankDeficientL.
FactorSet normalize(const FactorSet& fs, const Box& box);

/// chi_s = (-1)^(s-1) times the wedge of all factors but the s-th.
std::vector<DiffForm> chi_forms(const FactorSet& fs);

/// P_ij = coefficient of dx^j in the formal pullback of factor i.
ExprMatrix jet_matrix(const FactorSet& fs);

/// (-1)^a det of P with row a removed (a zero-based).
Expr signed_minor(const ExprMatrix& p, std::size_t a);

/// Normal form blocks: B (base part of the pivoted factors), C (base part of
/// the remaining factors), G (w part of the pivoted factors).
struct NormalBlocks {
  ExprMatrix B, C, G;
};
NormalBlocks normal_blocks(const FactorSet& normalized);

}  // namespace cartan
