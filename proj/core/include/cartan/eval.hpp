#pragma once

// Numeric evaluation, zero testing and sampling boxes.

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cartan/errors.hpp"
#include "cartan/expr.hpp"

namespace cartan {

inline constexpr double kDenominatorTolerance = 1e-12;
inline constexpr double kZeroThreshold = 1e-9;
inline constexpr std::uint64_t kDefaultSeed = 0xC4A7;
inline constexpr int kDefaultSamples = 64;

/// Evaluate at a point; throws DivisionByZero, UnboundVariable or DomainError.
double eval(const Expr& e, const Point& point);

/// Axis-aligned sampling region. Unlisted symbols use the default range.
struct Box {
  double lo = -1.0;
  double hi = 1.0;
  std::map<std::string, std::pair<double, double>, std::less<>> ranges;
  std::uint64_t seed = kDefaultSeed;
  int samples = kDefaultSamples;

  std::pair<double, double> range(const std::string& var) const;
  Point center(const std::set<std::string>& vars) const;
  /// Deterministic sample set: the box center followed by samples-1 uniform
  /// points. Variables are drawn in lexicographic order.
  std::vector<Point> sample_points(const std::set<std::string>& vars) const;
};

struct ZeroVerdict {
  enum class State { Zero, NonZero, Unknown } state = State::Zero;
  Point witness;  // NonZero only
  double magnitude = 0.0;

  bool zero() const { return state == State::Zero; }
  bool nonzero() const { return state == State::NonZero; }
  bool unknown() const { return state == State::Unknown; }
};

ZeroVerdict is_zero(const Expr& e, const Box& box = {}, const CanonOptions& opts = {});

/// Expression compiled against a fixed variable order for fast repeated
/// evaluation. Symbols not in the slot list are bound from `constants`.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  CompiledExpr(const Expr& e, const std::vector<std::string>& slots, const Point& constants = {});

  double operator()(std::span<const double> values) const;

 private:
  struct Node;
  struct Factor {
    int slot = -1;        // >= 0: variable slot
    int node = -1;        // >= 0: index into nodes_
    int exponent = 1;
  };
  struct CTerm {
    double coeff = 0.0;
    std::vector<Factor> factors;
  };
  struct Node {
    AtomKind kind = AtomKind::Symbol;
    std::vector<CTerm> terms;  // argument polynomial
  };

  double eval_terms(const std::vector<CTerm>& terms, std::span<const double> values) const;
  std::vector<CTerm> compile_terms(const Expr& e, const std::vector<std::string>& slots,
                                   const Point& constants);

  std::vector<CTerm> terms_;
  std::vector<Node> nodes_;
};

}  // namespace cartan
