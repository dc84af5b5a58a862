#include "cartan/varprin.hpp"

#include "cartan/errors.hpp"

namespace cartan {

namespace {

MultiIndex base_block(std::size_t k) {
  MultiIndex idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = static_cast<int>(i);
  return idx;
}

std::vector<VecField> default_vertical(const BundleChart& b) {
  std::vector<VecField> out;
  for (const auto& y : b.fiber()) out.push_back(VecField::coordinate(b.chart(), y));
  return out;
}

void classify_problem(VariationalProblem& p) {
  const int k = static_cast<int>(p.bundle.k());
  const int n = static_cast<int>(p.bundle.n());
  Classification& c = p.classification;
  c.k = k;
  c.n = n;
  c.h = 2 * k + 1 - n;
  const Distribution ann = annihilator(p.eta, p.box);
  c.q = static_cast<int>(ann.rank());
  const ProperResult pr = check_proper(p, p.box);
  c.proper = pr.verdict;
  c.vertical_dim = static_cast<int>(pr.vertical_annihilators.size());
  c.r = c.q - c.vertical_dim;
  if (k == n - 2) {
    c.degree_case = DegreeCase::MaximalDegree;
  } else if (n == 2 * k + 1) {
    c.degree_case = DegreeCase::MaximallyCharacteristic;
  } else if (n < 2 * k + 1) {
    c.degree_case = DegreeCase::Intermediate;
  } else {
    c.degree_case = DegreeCase::NonProper;
  }
}

void finish(VariationalProblem& p) {
  if (p.eta.is_zero()) throw Error(ErrorKind::ZeroEta, "d(theta) vanishes identically");
  p.vertical = default_vertical(p.bundle);
  p.psi.clear();
  for (const auto& v : p.vertical) p.psi.push_back(interior(v, p.eta));
  classify_problem(p);
}

void check_degrees(const BundleChart& b, int k) {
  const int n = static_cast<int>(b.n());
  if (k != static_cast<int>(b.k())) {
    throw Error(ErrorKind::DegreeMismatch, "form degree " + std::to_string(k) + " differs from base dimension " +
                                               std::to_string(b.k()));
  }
  if (k >= n - 1) throw Error(ErrorKind::DegreeMismatch, "degree k must satisfy k <= n - 2");
}

// The rational c with a = c * b, if any.
std::optional<Rational> rational_ratio(const Expr& a, const Expr& b) {
  if (b.is_zero()) return a.is_zero() ? std::optional<Rational>(Rational(1)) : std::nullopt;
  const Rational c = a.is_zero() ? Rational(0) : a.terms().front().coeff / b.terms().front().coeff;
  if (a - Expr(c) * b != Expr()) return std::nullopt;
  return c;
}

}  // namespace

const char* tri_name(Tri t) {
  switch (t) {
    case Tri::True: return "true";
    case Tri::False: return "false";
    case Tri::Unknown: return "unknown";
  }
  return "?";
}

const char* degree_case_name(DegreeCase c) {
  switch (c) {
    case DegreeCase::MaximalDegree: return "MaximalDegree";
    case DegreeCase::MaximallyCharacteristic: return "MaximallyCharacteristic";
    case DegreeCase::Intermediate: return "Intermediate";
    case DegreeCase::NonProper: return "NonProper";
  }
  return "?";
}

VariationalProblem build_problem(const BundleChart& bundle, const DiffForm& theta, const Box& box) {
  if (!same_chart(theta.chart(), bundle.chart())) throw Error(ErrorKind::ChartMismatch, "theta is not on the bundle chart");
  check_degrees(bundle, theta.degree());
  VariationalProblem p{bundle};
  p.box = box;
  p.theta = theta;
  p.eta = ext_d(theta);
  finish(p);
  return p;
}

VariationalProblem build_problem(const BundleChart& bundle, const std::vector<DiffForm>& factors, const Box& box) {
  check_degrees(bundle, static_cast<int>(factors.size()) - 1);
  VariationalProblem p{bundle};
  p.box = box;
  p.factors = make_factor_set(bundle, factors);
  p.eta = p.factors->eta();
  if (p.eta.is_zero()) throw Error(ErrorKind::ZeroEta, "the factors wedge to zero");
  try {
    p.normalized = normalize(*p.factors, box);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::RankDeficientL) throw;
  }
  finish(p);
  return p;
}

void set_vertical_basis(VariationalProblem& p, std::vector<VecField> vertical) {
  for (const auto& v : vertical) {
    if (!same_chart(v.chart(), p.bundle.chart())) throw Error(ErrorKind::ChartMismatch, "vertical field chart");
    for (std::size_t i = 0; i < p.bundle.k(); ++i)
      if (!v[i].is_zero()) throw Error(ErrorKind::InvalidArgument, "field has a base component");
  }
  p.vertical = std::move(vertical);
  p.psi.clear();
  for (const auto& v : p.vertical) p.psi.push_back(interior(v, p.eta));
}

ProperResult check_proper(const VariationalProblem& p, const Box& box) {
  ProperResult out;
  std::vector<std::size_t> cols;
  for (std::size_t j = p.bundle.k(); j < p.bundle.n(); ++j) cols.push_back(j);
  Distribution vert = kernel_of_forms({p.eta}, box, cols);
  out.vertical_annihilators = vert.basis;
  out.verdict = vert.rank() == 0 ? Tri::True : Tri::False;
  return out;
}

Expr omega_coefficient(const BundleChart& bundle, const DiffForm& form) {
  if (static_cast<std::size_t>(form.degree()) != bundle.k())
    throw Error(ErrorKind::DegreeMismatch, "pullback coefficient needs a form of base degree");
  return jet_pullback(bundle, form).coeff(base_block(bundle.k()));
}

CriticalEquations critical_equations(const VariationalProblem& p) {
  CriticalEquations ce;
  const auto& b = p.bundle;
  for (const auto& y : b.fiber())
    for (const auto& x : b.base()) ce.jet_symbols.push_back(jet_symbol(y, x));
  for (const auto& psi : p.psi) ce.pullback_coeffs.push_back(omega_coefficient(b, psi));

  if (p.classification.degree_case == DegreeCase::MaximalDegree && !p.normalized) {
    // Quasilinear pair: A^mu d_mu w - g and -(A^mu d_mu z - f).
    const VecField w = characteristic_field_maximal_degree(p);
    const auto fiber = b.fiber();
    Expr lz, lw;
    for (std::size_t mu = 0; mu < b.k(); ++mu) {
      lz += w[mu] * Expr::symbol(jet_symbol(fiber[0], b.base()[mu]));
      lw += w[mu] * Expr::symbol(jet_symbol(fiber[1], b.base()[mu]));
    }
    ce.delta.push_back(lw - w[b.k() + 1]);
    ce.delta.push_back(-(lz - w[b.k()]));
    for (std::size_t a = 0; a < 2; ++a) {
      auto c = rational_ratio(ce.pullback_coeffs[a], ce.delta[a]);
      if (!c || (a > 0 && *c != ce.constant)) {
        ce.consistent = false;
      } else {
        ce.constant = *c;
      }
    }
    return ce;
  }

  if (!p.normalized) throw Error(ErrorKind::NormalFormRequired, "critical equations need factors in normal form");
  const FactorSet& fs = *p.normalized;
  ce.P = jet_matrix(fs);
  const DiffForm eta_norm = fs.eta();
  for (std::size_t a = 0; a < fs.pivot_fiber.size(); ++a) {
    ce.delta.push_back(signed_minor(ce.P, a));
    const std::size_t col = b.k() + static_cast<std::size_t>(fs.pivot_fiber[a]);
    const Expr pulled = omega_coefficient(b, interior(VecField::coordinate(b.chart(), b.chart()->name(col)), eta_norm));
    auto c = rational_ratio(pulled, ce.delta.back());
    if (!c || (a > 0 && *c != ce.constant)) {
      ce.consistent = false;
    } else {
      ce.constant = *c;
    }
  }
  return ce;
}

VecField characteristic_field_maximal_degree(const VariationalProblem& p, bool normalized) {
  const auto& b = p.bundle;
  const std::size_t k = b.k();
  if (b.n() != k + 2) throw Error(ErrorKind::DegreeMismatch, "not a maximal-degree problem");
  const int iz = static_cast<int>(k), iw = static_cast<int>(k + 1);
  std::vector<Expr> comps(b.n());
  bool any = false;
  for (std::size_t mu = 0; mu < k; ++mu) {
    MultiIndex idx;
    for (std::size_t j = 0; j < k; ++j)
      if (j != mu) idx.push_back(static_cast<int>(j));
    idx.push_back(iz);
    idx.push_back(iw);
    const Expr c = p.eta.coeff(idx);
    comps[mu] = mu % 2 == 0 ? c : -c;
    any = any || !c.is_zero();
  }
  if (!any) throw Error(ErrorKind::ImproperPrinciple, "the A vector vanishes identically");
  MultiIndex om = base_block(k);
  MultiIndex with_w = om, with_z = om;
  with_w.push_back(iw);
  with_z.push_back(iz);
  const Expr f = p.eta.coeff(with_w);
  const Expr g = p.eta.coeff(with_z);
  comps[k] = k % 2 == 0 ? f : -f;
  comps[k + 1] = k % 2 == 0 ? -g : g;
  VecField w(b.chart(), std::move(comps));
  if (!interior(w, p.eta).is_zero()) {
    throw Error(ErrorKind::EvaluationFailure, "characteristic field does not annihilate d(theta)");
  }
  if (normalized) {
    if (w[0].is_zero()) throw Error(ErrorKind::ImproperPrinciple, "first A component vanishes; cannot normalize");
    const Expr inv = reciprocal(w[0]);
    w = inv * w;
  }
  return w;
}

VerifyReport verify_critical(const VariationalProblem& p, const SectionMap& phi) {
  if (!(phi.bundle() == p.bundle)) throw Error(ErrorKind::ChartMismatch, "section lives on a different bundle chart");
  VerifyReport rep;
  const auto subst = phi.jet_substitution();
  const MultiIndex om = base_block(p.bundle.k());
  for (const auto& psi : p.psi) {
    const Expr r = pullback(phi, psi).coeff(om);
    rep.residuals.push_back(r);
    if (!r.is_zero()) rep.critical = false;
    const Expr formal = subs(omega_coefficient(p.bundle, psi), subst);
    if (formal != r) rep.cross_check = false;
  }
  return rep;
}

}  // namespace cartan
