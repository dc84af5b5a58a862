#include "cartan/liouville.hpp"

#include "cartan/errors.hpp"

namespace cartan {

namespace {

// Re-expresses a form on a chart that contains all of its coordinates.
DiffForm embed(const DiffForm& a, const ChartPtr& target) {
  DiffForm out(target, a.degree());
  for (const auto& [idx, c] : a.terms()) {
    MultiIndex t;
    for (int i : idx) t.push_back(static_cast<int>(*target->index_of(a.chart()->name(static_cast<std::size_t>(i)))));
    out.add(std::move(t), c);
  }
  return out;
}

int degree_in(const Monomial& m, const std::set<std::string>& coords) {
  int d = 0;
  for (const auto& [atom, ex] : m) {
    if (atom.kind() == AtomKind::Symbol && coords.contains(atom.name())) d += ex;
  }
  return d;
}

DiffForm rebuild_theta(const LiouvilleSetup& s, int sign) {
  const DiffForm dt = DiffForm::differential(s.extended_chart, s.time);
  return embed(s.sigma, s.extended_chart) + Expr(sign) * wedge(embed(s.gamma, s.extended_chart), dt);
}

}  // namespace

bool is_liouville(const VecField& x, const DiffForm& omega) {
  if (static_cast<std::size_t>(omega.degree()) != omega.chart()->dim())
    throw Error(ErrorKind::DegreeMismatch, "omega must be a volume form");
  return ext_d(interior(x, omega)).is_zero();
}

DiffForm homotopy_antiderivative(const DiffForm& beta) {
  if (beta.degree() == 0) throw Error(ErrorKind::DegreeMismatch, "homotopy operator needs degree >= 1");
  const auto& chart = beta.chart();
  if (!ext_d(beta).is_zero()) throw Error(ErrorKind::NotClosed, "form is not closed");
  const std::set<std::string> coords(chart->names().begin(), chart->names().end());
  DiffForm out(chart, beta.degree() - 1);
  for (const auto& [idx, c] : beta.terms()) {
    if (!is_polynomial_in(c, coords)) {
      throw Error(ErrorKind::NonPolynomialCoefficient, "coefficient " + c.str() + " is not polynomial in the coordinates");
    }
    for (const auto& t : c.terms()) {
      const int deg = degree_in(t.mono, coords);
      if (deg < 0) throw Error(ErrorKind::NonPolynomialCoefficient, "negative power of a coordinate");
      const Expr term = Expr::from_terms({Term{t.mono, t.coeff / Rational(beta.degree() + deg)}});
      for (std::size_t pos = 0; pos < idx.size(); ++pos) {
        MultiIndex rest = idx;
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(pos));
        const Expr xi = Expr::symbol(chart->name(static_cast<std::size_t>(idx[pos])));
        out.add(std::move(rest), pos % 2 == 0 ? term * xi : -(term * xi));
      }
    }
  }
  return out;
}

VariationalProblem build_theta(LiouvilleSetup& s) {
  const std::size_t m = s.phase.size();
  if (m < 2) throw Error(ErrorKind::InvalidArgument, "phase space needs at least two coordinates");
  if (s.field.size() != m) throw Error(ErrorKind::DegreeMismatch, "field needs one component per phase coordinate");
  s.phase_chart = make_chart(s.phase);
  std::vector<std::string> ext{s.time};
  ext.insert(ext.end(), s.phase.begin(), s.phase.end());
  s.extended_chart = make_chart(ext);

  const VecField x(s.phase_chart, s.field);
  s.omega = DiffForm::volume(s.phase_chart);
  const DiffForm ix = interior(x, s.omega);
  if (!ext_d(ix).is_zero()) throw Error(ErrorKind::NotClosed, "field is not Liouville for the volume form");
  s.sigma = homotopy_antiderivative(s.omega);
  s.gamma = homotopy_antiderivative(ix);

  std::vector<Expr> zc{Expr(1)};
  zc.insert(zc.end(), s.field.begin(), s.field.end());
  s.z = VecField(s.extended_chart, zc);

  bool found = false;
  for (int sign : {1, -1}) {
    const DiffForm th = rebuild_theta(s, sign);
    if (interior(s.z, ext_d(th)).is_zero()) {
      s.sign = sign;
      s.theta = th;
      found = true;
      break;
    }
  }
  if (!found) throw Error(ErrorKind::EvaluationFailure, "no orientation sign makes Z characteristic");
  if (interior(s.z, DiffForm::differential(s.extended_chart, s.time)) != DiffForm::scalar(s.extended_chart, Expr(1)))
    throw Error(ErrorKind::EvaluationFailure, "Z does not satisfy i_Z dt = 1");

  std::vector<std::string> base{s.time};
  for (std::size_t i = 0; i + 2 < m; ++i) base.push_back(s.phase[i]);
  const BundleChart bundle(base, {s.phase[m - 2]}, {s.phase[m - 1]});
  return build_problem(bundle, embed(s.theta, bundle.chart()), s.box);
}

bool verify_hodge_identity(const LiouvilleSetup& s, int sign_override) {
  const DiffForm th = sign_override == 0 ? s.theta : rebuild_theta(s, sign_override);
  return ext_d(th) == hodge_star(dual_one_form(s.z));
}

}  // namespace cartan
