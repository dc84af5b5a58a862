#pragma once

// Exact symbolic scalars over the rationals.
//
// An Expr is always held in canonical form: a sorted sum of terms, each a
// nonzero rational coefficient times a monomial over atoms. Atoms are named
// symbols, the elementary functions sin/cos/exp/ln of a canonical argument,
// and reciprocals of primitive multi-term polynomials. Symbols and function
// atoms may carry negative exponents; reciprocal atoms only positive ones.

#include <gmpxx.h>

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cartan {

using Rational = mpq_class;

class Expr;
struct AtomNode;

enum class AtomKind { Symbol = 0, Sin, Cos, Exp, Ln, Recip };

/// Handle to an immutable atom node; ordering is structural.
class Atom {
 public:
  Atom() = default;
  explicit Atom(std::shared_ptr<const AtomNode> node) : node_(std::move(node)) {}

  static Atom symbol(std::string name);
  static Atom function(AtomKind kind, const Expr& arg);

  AtomKind kind() const;
  const std::string& name() const;  // Symbol only
  const Expr& arg() const;          // function and Recip atoms
  const AtomNode* get() const { return node_.get(); }

  friend int compare(const Atom& a, const Atom& b);
  friend bool operator<(const Atom& a, const Atom& b) { return compare(a, b) < 0; }
  friend bool operator==(const Atom& a, const Atom& b) { return compare(a, b) == 0; }

 private:
  std::shared_ptr<const AtomNode> node_;
};

using Monomial = std::vector<std::pair<Atom, int>>;  // sorted by atom, exponents != 0

struct Term {
  Monomial mono;
  Rational coeff;
};

int compare(const Monomial& a, const Monomial& b);
int total_degree(const Monomial& m);

class Expr {
 public:
  Expr();  // zero
  Expr(int v);  // NOLINT(google-explicit-constructor)
  Expr(const Rational& v);  // NOLINT(google-explicit-constructor)

  static Expr symbol(std::string name);
  static Expr from_terms(std::vector<Term> terms);  // canonicalizes

  const std::vector<Term>& terms() const;

  bool is_zero() const { return terms().empty(); }
  bool is_constant() const;
  std::optional<Rational> constant_value() const;
  /// Single term (coefficient times monomial).
  bool is_monomial() const { return terms().size() == 1; }

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  Expr& operator+=(const Expr& b) { return *this = *this + b; }
  Expr& operator-=(const Expr& b) { return *this = *this - b; }
  Expr& operator*=(const Expr& b) { return *this = *this * b; }

  friend bool operator==(const Expr& a, const Expr& b) { return compare(a, b) == 0; }
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }
  friend bool operator<(const Expr& a, const Expr& b) { return compare(a, b) < 0; }
  friend int compare(const Expr& a, const Expr& b);

  std::string str() const;

 private:
  explicit Expr(std::shared_ptr<const std::vector<Term>> data) : data_(std::move(data)) {}
  std::shared_ptr<const std::vector<Term>> data_;
};

struct AtomNode {
  AtomKind kind;
  std::string name;
  Expr arg;
};

Expr pow(const Expr& base, int exponent);
Expr reciprocal(const Expr& e);
Expr sin(const Expr& e);
Expr cos(const Expr& e);
Expr exp(const Expr& e);
Expr ln(const Expr& e);

struct CanonOptions {
  /// Rewrite sin(u)^2 -> 1 - cos(u)^2 so that Pythagorean identities cancel.
  bool pythagorean = false;
};

/// Canonical form. Every Expr is already canonical; the options add optional
/// rewrites on top of the normal form.
Expr canon(const Expr& e, const CanonOptions& opts = {});

Expr diff(const Expr& e, std::string_view var);

/// Simultaneous substitution of symbols by expressions.
Expr subs(const Expr& e, const std::map<std::string, Expr, std::less<>>& values);

/// Symbols occurring anywhere in e (including inside function arguments).
std::set<std::string> symbols(const Expr& e);
void collect_symbols(const Expr& e, std::set<std::string>& out);

/// True when e contains sin/cos/exp/ln or reciprocal atoms.
bool has_opaque_atoms(const Expr& e);

/// True when every atom is a symbol with a nonnegative exponent.
bool is_polynomial(const Expr& e);

/// Polynomial in the given variables: non-listed symbols and atoms free of
/// the listed variables count as coefficients.
bool is_polynomial_in(const Expr& e, const std::set<std::string>& vars);

/// Exact division q = a / d when both are polynomials and d divides a.
std::optional<Expr> exact_divide(const Expr& a, const Expr& d);

/// Split e = content * primitive, where content is a rational times the
/// monomial gcd of all terms and primitive has leading coefficient 1.
std::pair<Expr, Expr> content_split(const Expr& e);

std::string to_string(const Expr& e);

}  // namespace cartan
