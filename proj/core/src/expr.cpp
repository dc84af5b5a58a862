#include "cartan/expr.hpp"

#include <algorithm>
#include <sstream>

#include "cartan/errors.hpp"

namespace cartan {

namespace {

const std::shared_ptr<const std::vector<Term>>& zero_data() {
  static const auto data = std::make_shared<const std::vector<Term>>();
  return data;
}

int cmp_rational(const Rational& a, const Rational& b) {
  const int c = cmp(a, b);
  return (c > 0) - (c < 0);
}

int sign_of(const Rational& r) { return sgn(r); }

Monomial mono_mul(const Monomial& a, const Monomial& b) {
  Monomial out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      out.push_back(b[j++]);
    } else {
      const int e = a[i].second + b[j].second;
      if (e != 0) out.emplace_back(a[i].first, e);
      ++i;
      ++j;
    }
  }
  return out;
}

std::vector<Term> normalize(std::vector<Term> terms) {
  std::sort(terms.begin(), terms.end(),
            [](const Term& x, const Term& y) { return compare(x.mono, y.mono) < 0; });
  std::vector<Term> out;
  out.reserve(terms.size());
  for (auto& t : terms) {
    if (!out.empty() && compare(out.back().mono, t.mono) == 0) {
      out.back().coeff += t.coeff;
    } else {
      out.push_back(std::move(t));
    }
  }
  std::erase_if(out, [](const Term& t) { return sgn(t.coeff) == 0; });
  return out;
}

Expr atom_expr(const Atom& a, int exponent = 1) {
  std::vector<Term> t;
  t.push_back(Term{Monomial{{a, exponent}}, Rational(1)});
  return Expr::from_terms(std::move(t));
}

bool leading_negative(const Expr& e) {
  return !e.terms().empty() && sign_of(e.terms().front().coeff) < 0;
}

}  // namespace

// ---------------------------------------------------------------- atoms

Atom Atom::symbol(std::string name) {
  return Atom(std::make_shared<const AtomNode>(AtomNode{AtomKind::Symbol, std::move(name), Expr()}));
}

Atom Atom::function(AtomKind kind, const Expr& arg) {
  return Atom(std::make_shared<const AtomNode>(AtomNode{kind, std::string(), arg}));
}

AtomKind Atom::kind() const { return node_->kind; }
const std::string& Atom::name() const { return node_->name; }
const Expr& Atom::arg() const { return node_->arg; }

int compare(const Atom& a, const Atom& b) {
  if (a.node_ == b.node_) return 0;
  if (a.kind() != b.kind()) return static_cast<int>(a.kind()) < static_cast<int>(b.kind()) ? -1 : 1;
  if (a.kind() == AtomKind::Symbol) {
    const int c = a.name().compare(b.name());
    return (c > 0) - (c < 0);
  }
  return compare(a.arg(), b.arg());
}

int total_degree(const Monomial& m) {
  int d = 0;
  for (const auto& [atom, e] : m) d += e;
  return d;
}

// Graded lexicographic: higher degree first, then the larger exponent on the
// first differing atom.
int compare(const Monomial& a, const Monomial& b) {
  const int da = total_degree(a);
  const int db = total_degree(b);
  if (da != db) return da > db ? -1 : 1;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      return a[i].second > 0 ? -1 : 1;
    }
    if (i == a.size() || b[j].first < a[i].first) {
      return b[j].second > 0 ? 1 : -1;
    }
    if (a[i].second != b[j].second) return a[i].second > b[j].second ? -1 : 1;
    ++i;
    ++j;
  }
  return 0;
}

// ---------------------------------------------------------------- Expr

Expr::Expr() : data_(zero_data()) {}

Expr::Expr(int v) : Expr(Rational(v)) {}

Expr::Expr(const Rational& v) : data_(zero_data()) {
  if (sgn(v) != 0) {
    data_ = std::make_shared<const std::vector<Term>>(std::vector<Term>{Term{Monomial{}, v}});
  }
}

Expr Expr::symbol(std::string name) { return atom_expr(Atom::symbol(std::move(name))); }

Expr Expr::from_terms(std::vector<Term> terms) {
  auto n = normalize(std::move(terms));
  if (n.empty()) return Expr();
  return Expr(std::make_shared<const std::vector<Term>>(std::move(n)));
}

const std::vector<Term>& Expr::terms() const { return *data_; }

bool Expr::is_constant() const {
  return terms().empty() || (terms().size() == 1 && terms().front().mono.empty());
}

std::optional<Rational> Expr::constant_value() const {
  if (terms().empty()) return Rational(0);
  if (terms().size() == 1 && terms().front().mono.empty()) return terms().front().coeff;
  return std::nullopt;
}

int compare(const Expr& a, const Expr& b) {
  if (a.data_ == b.data_) return 0;
  const auto& ta = a.terms();
  const auto& tb = b.terms();
  const std::size_t n = std::min(ta.size(), tb.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = compare(ta[i].mono, tb[i].mono); c != 0) return c;
    if (int c = cmp_rational(ta[i].coeff, tb[i].coeff); c != 0) return c;
  }
  if (ta.size() == tb.size()) return 0;
  return ta.size() < tb.size() ? -1 : 1;
}

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  const auto& ta = a.terms();
  const auto& tb = b.terms();
  std::vector<Term> out;
  out.reserve(ta.size() + tb.size());
  std::size_t i = 0, j = 0;
  while (i < ta.size() || j < tb.size()) {
    int c = 0;
    if (i == ta.size()) c = 1;
    else if (j == tb.size()) c = -1;
    else c = compare(ta[i].mono, tb[j].mono);
    if (c < 0) {
      out.push_back(ta[i++]);
    } else if (c > 0) {
      out.push_back(tb[j++]);
    } else {
      Rational s = ta[i].coeff + tb[j].coeff;
      if (sgn(s) != 0) out.push_back(Term{ta[i].mono, s});
      ++i;
      ++j;
    }
  }
  if (out.empty()) return Expr();
  return Expr(std::make_shared<const std::vector<Term>>(std::move(out)));
}

Expr operator-(const Expr& a) {
  if (a.is_zero()) return a;
  std::vector<Term> out = a.terms();
  for (auto& t : out) t.coeff = -t.coeff;
  return Expr(std::make_shared<const std::vector<Term>>(std::move(out)));
}

Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_zero() || b.is_zero()) return Expr();
  if (auto c = a.constant_value(); c && *c == 1) return b;
  if (auto c = b.constant_value(); c && *c == 1) return a;
  std::vector<Term> out;
  out.reserve(a.terms().size() * b.terms().size());
  for (const auto& x : a.terms()) {
    for (const auto& y : b.terms()) {
      out.push_back(Term{mono_mul(x.mono, y.mono), x.coeff * y.coeff});
    }
  }
  return Expr::from_terms(std::move(out));
}

Expr operator/(const Expr& a, const Expr& b) { return a * reciprocal(b); }

std::pair<Expr, Expr> content_split(const Expr& e) {
  if (e.is_zero()) return {Expr(1), Expr()};
  const auto& ts = e.terms();
  // Monomial gcd: per-atom minimum exponent, absent atoms counting as 0.
  std::map<Atom, int> mins;
  for (const auto& [atom, ex] : ts.front().mono) mins[atom] = ex;
  for (std::size_t i = 1; i < ts.size(); ++i) {
    std::map<Atom, int> here(ts[i].mono.begin(), ts[i].mono.end());
    for (auto& [atom, m] : mins) {
      auto it = here.find(atom);
      m = std::min(m, it == here.end() ? 0 : it->second);
    }
    for (const auto& [atom, ex] : here) {
      if (!mins.contains(atom)) mins[atom] = std::min(0, ex);
    }
  }
  Monomial content_mono;
  for (const auto& [atom, m] : mins) {
    if (m != 0) content_mono.emplace_back(atom, m);
  }
  Monomial inverse = content_mono;
  for (auto& p : inverse) p.second = -p.second;
  const Rational lead = ts.front().coeff;
  std::vector<Term> prim;
  prim.reserve(ts.size());
  for (const auto& t : ts) prim.push_back(Term{mono_mul(t.mono, inverse), t.coeff / lead});
  return {Expr::from_terms({Term{content_mono, lead}}), Expr::from_terms(std::move(prim))};
}

Expr reciprocal(const Expr& e) {
  if (e.is_zero()) throw Error(ErrorKind::DivisionByZero, "reciprocal of the zero expression");
  if (e.is_monomial()) {
    const Term& t = e.terms().front();
    Expr out = Expr(Rational(1) / t.coeff);
    Monomial inv;
    for (const auto& [atom, ex] : t.mono) {
      if (atom.kind() == AtomKind::Recip) {
        out = out * pow(atom.arg(), ex);
      } else {
        inv.emplace_back(atom, -ex);
      }
    }
    return out * Expr::from_terms({Term{inv, Rational(1)}});
  }
  auto [content, prim] = content_split(e);
  return reciprocal(content) * atom_expr(Atom::function(AtomKind::Recip, prim));
}

Expr pow(const Expr& base, int exponent) {
  if (exponent < 0) return pow(reciprocal(base), -exponent);
  Expr result(1);
  Expr b = base;
  unsigned n = static_cast<unsigned>(exponent);
  while (n != 0) {
    if (n & 1u) result = result * b;
    n >>= 1u;
    if (n != 0) b = b * b;
  }
  return result;
}

Expr sin(const Expr& e) {
  if (e.is_zero()) return Expr();
  if (leading_negative(e)) return -sin(-e);
  return atom_expr(Atom::function(AtomKind::Sin, e));
}

Expr cos(const Expr& e) {
  if (e.is_zero()) return Expr(1);
  if (leading_negative(e)) return cos(-e);
  return atom_expr(Atom::function(AtomKind::Cos, e));
}

Expr exp(const Expr& e) {
  if (e.is_zero()) return Expr(1);
  return atom_expr(Atom::function(AtomKind::Exp, e));
}

Expr ln(const Expr& e) {
  if (auto c = e.constant_value(); c && *c == 1) return Expr();
  if (e.is_zero()) throw Error(ErrorKind::DomainError, "ln(0)");
  return atom_expr(Atom::function(AtomKind::Ln, e));
}

namespace {

Expr atom_derivative(const Atom& a, std::string_view var) {
  switch (a.kind()) {
    case AtomKind::Symbol:
      return a.name() == var ? Expr(1) : Expr();
    case AtomKind::Sin: {
      Expr du = diff(a.arg(), var);
      return du.is_zero() ? Expr() : cos(a.arg()) * du;
    }
    case AtomKind::Cos: {
      Expr du = diff(a.arg(), var);
      return du.is_zero() ? Expr() : -(sin(a.arg()) * du);
    }
    case AtomKind::Exp: {
      Expr du = diff(a.arg(), var);
      return du.is_zero() ? Expr() : exp(a.arg()) * du;
    }
    case AtomKind::Ln: {
      Expr du = diff(a.arg(), var);
      return du.is_zero() ? Expr() : du / a.arg();
    }
    case AtomKind::Recip: {
      Expr du = diff(a.arg(), var);
      if (du.is_zero()) return Expr();
      return -(du * atom_expr(a, 2));
    }
  }
  return Expr();
}

}  // namespace

Expr diff(const Expr& e, std::string_view var) {
  std::vector<Term> acc;
  Expr result;
  for (const auto& t : e.terms()) {
    for (std::size_t i = 0; i < t.mono.size(); ++i) {
      const auto& [atom, ex] = t.mono[i];
      Expr da = atom_derivative(atom, var);
      if (da.is_zero()) continue;
      Monomial rest = t.mono;
      if (ex == 1) {
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
      } else {
        rest[i].second = ex - 1;
      }
      result += Expr::from_terms({Term{rest, t.coeff * ex}}) * da;
    }
  }
  return result;
}

Expr subs(const Expr& e, const std::map<std::string, Expr, std::less<>>& values) {
  if (values.empty()) return e;
  Expr result;
  for (const auto& t : e.terms()) {
    Expr term(t.coeff);
    Monomial kept;
    for (const auto& [atom, ex] : t.mono) {
      switch (atom.kind()) {
        case AtomKind::Symbol: {
          auto it = values.find(atom.name());
          if (it == values.end()) {
            kept.emplace_back(atom, ex);
          } else {
            term = term * pow(it->second, ex);
          }
          break;
        }
        case AtomKind::Sin: term = term * pow(sin(subs(atom.arg(), values)), ex); break;
        case AtomKind::Cos: term = term * pow(cos(subs(atom.arg(), values)), ex); break;
        case AtomKind::Exp: term = term * pow(exp(subs(atom.arg(), values)), ex); break;
        case AtomKind::Ln: term = term * pow(ln(subs(atom.arg(), values)), ex); break;
        case AtomKind::Recip: term = term * pow(reciprocal(subs(atom.arg(), values)), ex); break;
      }
    }
    result += term * Expr::from_terms({Term{kept, Rational(1)}});
  }
  return result;
}

void collect_symbols(const Expr& e, std::set<std::string>& out) {
  for (const auto& t : e.terms()) {
    for (const auto& [atom, ex] : t.mono) {
      if (atom.kind() == AtomKind::Symbol) {
        out.insert(atom.name());
      } else {
        collect_symbols(atom.arg(), out);
      }
    }
  }
}

std::set<std::string> symbols(const Expr& e) {
  std::set<std::string> out;
  collect_symbols(e, out);
  return out;
}

bool has_opaque_atoms(const Expr& e) {
  for (const auto& t : e.terms()) {
    for (const auto& [atom, ex] : t.mono) {
      if (atom.kind() != AtomKind::Symbol) return true;
    }
  }
  return false;
}

bool is_polynomial(const Expr& e) {
  for (const auto& t : e.terms()) {
    for (const auto& [atom, ex] : t.mono) {
      if (atom.kind() != AtomKind::Symbol || ex < 0) return false;
    }
  }
  return true;
}

bool is_polynomial_in(const Expr& e, const std::set<std::string>& vars) {
  for (const auto& t : e.terms()) {
    for (const auto& [atom, ex] : t.mono) {
      if (atom.kind() == AtomKind::Symbol) {
        if (ex < 0 && vars.contains(atom.name())) return false;
        continue;
      }
      std::set<std::string> inner;
      collect_symbols(atom.arg(), inner);
      for (const auto& v : inner) {
        if (vars.contains(v)) return false;
      }
    }
  }
  return true;
}

std::optional<Expr> exact_divide(const Expr& a, const Expr& d) {
  if (d.is_zero()) return std::nullopt;
  auto nonneg = [](const Expr& x) {
    for (const auto& t : x.terms())
      for (const auto& [atom, ex] : t.mono)
        if (ex < 0) return false;
    return true;
  };
  if (!nonneg(a) || !nonneg(d)) return std::nullopt;
  const Term& lead = d.terms().front();
  Expr r = a;
  Expr q;
  for (int guard = 0; !r.is_zero(); ++guard) {
    if (guard > 100000) return std::nullopt;
    const Term& lt = r.terms().front();
    // Monomial quotient lt / lead, must have nonnegative exponents.
    Monomial inv = lead.mono;
    for (auto& p : inv) p.second = -p.second;
    Monomial qm = mono_mul(lt.mono, inv);
    for (const auto& [atom, ex] : qm) {
      if (ex < 0) return std::nullopt;
    }
    Expr step = Expr::from_terms({Term{qm, lt.coeff / lead.coeff}});
    q += step;
    r -= step * d;
  }
  return q;
}

// ---------------------------------------------------------------- canon

Expr canon(const Expr& e, const CanonOptions& opts) {
  if (!opts.pythagorean) return e;
  Expr result;
  for (const auto& t : e.terms()) {
    Expr term(t.coeff);
    for (const auto& [atom, ex] : t.mono) {
      switch (atom.kind()) {
        case AtomKind::Symbol:
          term = term * atom_expr(atom, ex);
          break;
        case AtomKind::Sin: {
          Expr u = canon(atom.arg(), opts);
          if (ex >= 2) {
            term = term * pow(sin(u), ex % 2) * pow(Expr(1) - pow(cos(u), 2), ex / 2);
          } else {
            term = term * pow(sin(u), ex);
          }
          break;
        }
        case AtomKind::Cos: term = term * pow(cos(canon(atom.arg(), opts)), ex); break;
        case AtomKind::Exp: term = term * pow(exp(canon(atom.arg(), opts)), ex); break;
        case AtomKind::Ln: term = term * pow(ln(canon(atom.arg(), opts)), ex); break;
        case AtomKind::Recip: term = term * pow(reciprocal(canon(atom.arg(), opts)), ex); break;
      }
    }
    result += term;
  }
  return result;
}

// ---------------------------------------------------------------- printing

namespace {

void print_atom(std::ostream& os, const Atom& a, int ex) {
  switch (a.kind()) {
    case AtomKind::Symbol: os << a.name(); break;
    case AtomKind::Sin: os << "sin(" << to_string(a.arg()) << ")"; break;
    case AtomKind::Cos: os << "cos(" << to_string(a.arg()) << ")"; break;
    case AtomKind::Exp: os << "exp(" << to_string(a.arg()) << ")"; break;
    case AtomKind::Ln: os << "ln(" << to_string(a.arg()) << ")"; break;
    case AtomKind::Recip:
      os << "(" << to_string(a.arg()) << ")^-" << ex;
      return;
  }
  if (ex != 1) os << "^" << ex;
}

}  // namespace

std::string to_string(const Expr& e) {
  if (e.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& t : e.terms()) {
    Rational c = t.coeff;
    const bool neg = sgn(c) < 0;
    if (neg) c = -c;
    if (first) {
      if (neg) os << "-";
    } else {
      os << (neg ? " - " : " + ");
    }
    first = false;
    bool need_sep = false;
    if (t.mono.empty() || c != 1) {
      os << c.get_str();
      need_sep = true;
    }
    for (const auto& [atom, ex] : t.mono) {
      if (need_sep) os << "*";
      print_atom(os, atom, ex);
      need_sep = true;
    }
  }
  return os.str();
}

std::string Expr::str() const { return to_string(*this); }

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DivisionByZero: return "DivisionByZero";
    case ErrorKind::UnboundVariable: return "UnboundVariable";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ChartMismatch: return "ChartMismatch";
    case ErrorKind::DegreeMismatch: return "DegreeMismatch";
    case ErrorKind::ZeroEta: return "ZeroEta";
    case ErrorKind::NonConstantRank: return "NonConstantRank";
    case ErrorKind::UnequalGeneratorDegrees: return "UnequalGeneratorDegrees";
    case ErrorKind::NormalFormRequired: return "NormalFormRequired";
    case ErrorKind::ImproperPrinciple: return "ImproperPrinciple";
    case ErrorKind::RankDeficientL: return "RankDeficientL";
    case ErrorKind::NotClosed: return "NotClosed";
    case ErrorKind::NonPolynomialCoefficient: return "NonPolynomialCoefficient";
    case ErrorKind::EvaluationFailure: return "EvaluationFailure";
    case ErrorKind::BoxExit: return "BoxExit";
    case ErrorKind::TangencyViolation: return "TangencyViolation";
    case ErrorKind::ResidualTooLarge: return "ResidualTooLarge";
    case ErrorKind::NonTransversalDistribution: return "NonTransversalDistribution";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace cartan
