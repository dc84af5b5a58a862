#pragma once

// Variational principles defined by a k-form on a fibered chart.

#include <optional>
#include <string>
#include <vector>

#include "cartan/decomp.hpp"
#include "cartan/eval.hpp"
#include "cartan/forms.hpp"
#include "cartan/ideals.hpp"

namespace cartan {

enum class Tri { True, False, Unknown };
const char* tri_name(Tri t);

enum class DegreeCase { MaximalDegree, MaximallyCharacteristic, Intermediate, NonProper };
const char* degree_case_name(DegreeCase c);

struct Classification {
  Tri proper = Tri::Unknown;
  DegreeCase degree_case = DegreeCase::MaximallyCharacteristic;
  int k = 0;
  int n = 0;
  int h = 0;  // 2k + 1 - n
  int q = 0;  // dim N(eta)
  int r = 0;  // transversal part of N(eta)
  int vertical_dim = 0;
};

struct VariationalProblem {
  explicit VariationalProblem(BundleChart b) : bundle(std::move(b)) {}

  BundleChart bundle;
  std::optional<DiffForm> theta;
  std::optional<FactorSet> factors;
  std::optional<FactorSet> normalized;
  DiffForm eta;
  std::vector<VecField> vertical;
  std::vector<DiffForm> psi;
  Classification classification;
  Box box;
};

VariationalProblem build_problem(const BundleChart& bundle, const DiffForm& theta, const Box& box);
VariationalProblem build_problem(const BundleChart& bundle, const std::vector<DiffForm>& factors, const Box& box);

/// Replaces the vertical basis (and the Psi list) by a custom one.
void set_vertical_basis(VariationalProblem& p, std::vector<VecField> vertical);

struct ProperResult {
  Tri verdict = Tri::Unknown;
  std::vector<VecField> vertical_annihilators;
};
ProperResult check_proper(const VariationalProblem& p, const Box& box);

struct CriticalEquations {
  std::vector<Expr> delta;            // the critical equations, in jet symbols
  std::vector<Expr> pullback_coeffs;  // coefficient of omega in the formal pullback of each Psi
  ExprMatrix P;                       // decomposable case only
  Rational constant = 1;              // pullback coefficient = constant * delta
  bool consistent = true;
  std::vector<std::string> jet_symbols;
};
CriticalEquations critical_equations(const VariationalProblem& p);

/// Characteristic field of a maximal-degree problem; with `normalized` the
/// first base component is scaled to 1.
VecField characteristic_field_maximal_degree(const VariationalProblem& p, bool normalized = false);

struct VerifyReport {
  bool critical = true;
  std::vector<Expr> residuals;  // coefficient of omega in the pullback of each Psi
  bool cross_check = true;      // agrees with the jet-symbol equations after substitution
};
VerifyReport verify_critical(const VariationalProblem& p, const SectionMap& phi);

/// Formal pullback coefficient of a base-degree form along a section.
Expr omega_coefficient(const BundleChart& bundle, const DiffForm& form);

}  // namespace cartan
