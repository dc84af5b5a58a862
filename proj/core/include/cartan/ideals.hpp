#pragma once

// Cartan ideals, annihilators and characteristic distributions.

#include <cstdint>
#include <optional>
#include <vector>

#include "cartan/eval.hpp"
#include "cartan/forms.hpp"
#include "cartan/symlinalg.hpp"

namespace cartan {

struct CartanIdeal {
  ChartPtr chart;
  std::vector<DiffForm> generators;
  bool closed = false;
};

/// Validates the generators (nonzero, degree >= 1, common chart).
CartanIdeal make_ideal(std::vector<DiffForm> generators);

/// Membership by reduction against generator multiples whose leading term
/// has a constant coefficient. A reduction that stalls counts as not a member.
bool ideal_contains(const CartanIdeal& ideal, const DiffForm& form);

CartanIdeal complete_to_differential(const CartanIdeal& ideal);

struct IntegralReport {
  bool integral = true;
  std::vector<std::pair<std::size_t, DiffForm>> residuals;  // generator index, pulled-back form
};
IntegralReport is_integral_section(const CartanIdeal& ideal, const SectionMap& phi);

struct RankCertificate {
  std::uint64_t seed = kDefaultSeed;
  std::vector<Point> points;
  std::vector<int> ranks;
};

struct Distribution {
  ChartPtr chart;
  std::vector<VecField> basis;
  Box box;
  RankCertificate certificate;
  std::vector<int> pivot_rows;
  std::vector<int> pivot_cols;
  bool exact = true;  // basis annihilates the defining forms canonically

  std::size_t rank() const { return basis.size(); }
};

/// Coefficient matrix of Y -> i_Y form; rows follow the (deg-1) multi-indices
/// in ascending order, columns the chart coordinates (or `columns` if given).
ExprMatrix contraction_matrix(const DiffForm& form, const std::vector<std::size_t>& columns = {});

/// Joint kernel of Y -> i_Y g over the given forms, optionally restricted to
/// fields supported on `columns`.
Distribution kernel_of_forms(const std::vector<DiffForm>& forms, const Box& box,
                             const std::vector<std::size_t>& columns = {});

Distribution annihilator(const DiffForm& eta, const Box& box);
Distribution characteristic_distribution(const CartanIdeal& ideal, const Box& box);

struct FrobeniusResult {
  enum class Verdict { Integrable, NotIntegrable, Unknown } verdict = Verdict::Integrable;
  /// Set when the symbolic residual is not canonically zero but every sample
  /// is below threshold.
  bool numerically_integrable = false;
  std::size_t i = 0, j = 0;  // offending pair
  VecField bracket;
  Point witness;
  double magnitude = 0.0;
};
FrobeniusResult frobenius_check(const Distribution& d, const Box& box);

/// One-forms whose joint kernel is the span of the distribution.
std::vector<DiffForm> complete_ideal_generators(const Distribution& d);

/// Span equality of two field lists at every sample point of the box.
bool same_span(const std::vector<VecField>& a, const std::vector<VecField>& b, const Box& box);

/// Whether v lies in span(basis) at every sample point.
bool in_span(const VecField& v, const std::vector<VecField>& basis, const Box& box);

const char* verdict_name(FrobeniusResult::Verdict v);

}  // namespace cartan
