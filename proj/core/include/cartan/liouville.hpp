#pragma once

// Liouville dynamics: a phase-space field preserving a volume form, lifted to
// a maximal-degree variational problem on time x phase space.

#include <string>
#include <vector>

#include "cartan/forms.hpp"
#include "cartan/varprin.hpp"

namespace cartan {

struct LiouvilleSetup {
  std::vector<std::string> phase;  // p^1..p^m
  std::vector<Expr> field;         // X components
  std::string time = "t";
  Box box;

  // Filled by build_theta.
  ChartPtr phase_chart;
  ChartPtr extended_chart;  // (t, p^1..p^m)
  DiffForm omega;           // dp^1 ^ ... ^ dp^m on the phase chart
  DiffForm sigma;
  DiffForm gamma;
  DiffForm theta;           // on the extended chart
  int sign = 1;             // coefficient of gamma ^ dt in theta
  VecField z;               // d/dt + X on the extended chart
};

bool is_liouville(const VecField& x, const DiffForm& omega);

/// Poincare homotopy operator about the origin, exact on polynomial
/// coefficients. Throws NotClosed, NonPolynomialCoefficient.
DiffForm homotopy_antiderivative(const DiffForm& beta);

/// Builds sigma, gamma and theta = sigma + s gamma ^ dt, choosing s so that
/// i_Z d(theta) = 0. Returns the maximal-degree problem with base
/// (t, p^1..p^{m-2}) and fiber (p^{m-1}, p^m).
VariationalProblem build_theta(LiouvilleSetup& setup);

/// d(theta) == *(dual of Z) for the recorded sign (or `sign_override`).
bool verify_hodge_identity(const LiouvilleSetup& setup, int sign_override = 0);

}  // namespace cartan
