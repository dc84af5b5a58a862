#include "cartan/eval.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace cartan {

namespace {

double ipow(double v, int e) {
  if (e < 0) {
    if (std::fabs(v) < kDenominatorTolerance) {
      throw Error(ErrorKind::DivisionByZero, "denominator evaluates to zero");
    }
    return 1.0 / ipow(v, -e);
  }
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= v;
  return r;
}

double apply(AtomKind kind, double v) {
  switch (kind) {
    case AtomKind::Sin: return std::sin(v);
    case AtomKind::Cos: return std::cos(v);
    case AtomKind::Exp: return std::exp(v);
    case AtomKind::Ln:
      if (v <= 0.0) throw Error(ErrorKind::DomainError, "ln of a non-positive value");
      return std::log(v);
    case AtomKind::Recip:
      if (std::fabs(v) < kDenominatorTolerance) {
        throw Error(ErrorKind::DivisionByZero, "denominator evaluates to zero");
      }
      return 1.0 / v;
    case AtomKind::Symbol: break;
  }
  return v;
}

double eval_atom(const Atom& a, const Point& point) {
  if (a.kind() == AtomKind::Symbol) {
    auto it = point.find(a.name());
    if (it == point.end()) throw Error(ErrorKind::UnboundVariable, "unbound variable '" + a.name() + "'");
    return it->second;
  }
  return apply(a.kind(), eval(a.arg(), point));
}

// Uniform double in [0,1) from the top 53 bits; independent of the standard
// library's distribution implementation.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

double eval(const Expr& e, const Point& point) {
  double sum = 0.0;
  for (const auto& t : e.terms()) {
    double v = t.coeff.get_d();
    for (const auto& [atom, ex] : t.mono) v *= ipow(eval_atom(atom, point), ex);
    sum += v;
  }
  return sum;
}

std::pair<double, double> Box::range(const std::string& var) const {
  auto it = ranges.find(var);
  if (it != ranges.end()) return it->second;
  return {lo, hi};
}

Point Box::center(const std::set<std::string>& vars) const {
  Point p;
  for (const auto& v : vars) {
    auto [a, b] = range(v);
    p[v] = 0.5 * (a + b);
  }
  return p;
}

std::vector<Point> Box::sample_points(const std::set<std::string>& vars) const {
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(samples));
  out.push_back(center(vars));
  std::mt19937_64 rng(seed);
  for (int i = 1; i < samples; ++i) {
    Point p;
    for (const auto& v : vars) {
      auto [a, b] = range(v);
      p[v] = a + unit(rng) * (b - a);
    }
    out.push_back(std::move(p));
  }
  return out;
}

ZeroVerdict is_zero(const Expr& e, const Box& box, const CanonOptions& opts) {
  ZeroVerdict verdict;
  const Expr c = canon(e, opts);
  if (c.is_zero()) return verdict;
  const auto points = box.sample_points(symbols(c));
  for (const auto& p : points) {
    double v = 0.0;
    try {
      v = eval(c, p);
    } catch (const Error&) {
      continue;
    }
    if (std::isfinite(v) && std::fabs(v) > kZeroThreshold) {
      verdict.state = ZeroVerdict::State::NonZero;
      verdict.witness = p;
      verdict.magnitude = std::fabs(v);
      return verdict;
    }
  }
  verdict.state = ZeroVerdict::State::Unknown;
  return verdict;
}

// ---------------------------------------------------------------- compiled

CompiledExpr::CompiledExpr(const Expr& e, const std::vector<std::string>& slots, const Point& constants) {
  terms_ = compile_terms(e, slots, constants);
}

std::vector<CompiledExpr::CTerm> CompiledExpr::compile_terms(const Expr& e,
                                                              const std::vector<std::string>& slots,
                                                              const Point& constants) {
  std::vector<CTerm> out;
  for (const auto& t : e.terms()) {
    CTerm ct;
    ct.coeff = t.coeff.get_d();
    for (const auto& [atom, ex] : t.mono) {
      if (atom.kind() == AtomKind::Symbol) {
        auto it = std::find(slots.begin(), slots.end(), atom.name());
        if (it != slots.end()) {
          ct.factors.push_back(Factor{static_cast<int>(it - slots.begin()), -1, ex});
          continue;
        }
        auto c = constants.find(atom.name());
        if (c == constants.end()) {
          throw Error(ErrorKind::UnboundVariable, "unbound variable '" + atom.name() + "'");
        }
        ct.coeff *= ipow(c->second, ex);
        continue;
      }
      Node node;
      node.kind = atom.kind();
      node.terms = compile_terms(atom.arg(), slots, constants);
      nodes_.push_back(std::move(node));
      ct.factors.push_back(Factor{-1, static_cast<int>(nodes_.size() - 1), ex});
    }
    out.push_back(std::move(ct));
  }
  return out;
}

double CompiledExpr::eval_terms(const std::vector<CTerm>& terms, std::span<const double> values) const {
  double sum = 0.0;
  for (const auto& t : terms) {
    double v = t.coeff;
    for (const auto& f : t.factors) {
      const double base = f.slot >= 0 ? values[static_cast<std::size_t>(f.slot)]
                                      : apply(nodes_[static_cast<std::size_t>(f.node)].kind,
                                              eval_terms(nodes_[static_cast<std::size_t>(f.node)].terms, values));
      v *= f.exponent == 1 ? base : ipow(base, f.exponent);
    }
    sum += v;
  }
  return sum;
}

double CompiledExpr::operator()(std::span<const double> values) const { return eval_terms(terms_, values); }

}  // namespace cartan
