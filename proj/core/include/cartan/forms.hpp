#pragma once

// Exterior algebra on a coordinate chart.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cartan/expr.hpp"

namespace cartan {

/// Ordered list of coordinate names; the order fixes the orientation.
class Chart {
 public:
  explicit Chart(std::vector<std::string> names);

  std::size_t dim() const { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_[i]; }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<std::size_t> index_of(std::string_view name) const;
  bool contains(std::string_view name) const { return index_of(name).has_value(); }

  friend bool operator==(const Chart& a, const Chart& b) { return a.names_ == b.names_; }

 private:
  std::vector<std::string> names_;
};

using ChartPtr = std::shared_ptr<const Chart>;

ChartPtr make_chart(std::vector<std::string> names);
bool same_chart(const ChartPtr& a, const ChartPtr& b);

/// Fibered chart: base block x, primary fiber block z and residual block w,
/// laid out in that order.
class BundleChart {
 public:
  BundleChart(std::vector<std::string> base, std::vector<std::string> fiber_z,
              std::vector<std::string> fiber_w = {});

  const ChartPtr& chart() const { return chart_; }
  const ChartPtr& base_chart() const { return base_chart_; }

  std::size_t k() const { return base_.size(); }
  std::size_t p() const { return fiber_z_.size(); }
  std::size_t s() const { return fiber_w_.size(); }
  std::size_t n() const { return chart_->dim(); }
  std::size_t fiber_dim() const { return p() + s(); }

  const std::vector<std::string>& base() const { return base_; }
  const std::vector<std::string>& fiber_z() const { return fiber_z_; }
  const std::vector<std::string>& fiber_w() const { return fiber_w_; }
  std::vector<std::string> fiber() const;

  bool is_base_index(std::size_t i) const { return i < k(); }
  bool non_proper_candidate() const { return s() > 0; }

  friend bool operator==(const BundleChart& a, const BundleChart& b);

 private:
  std::vector<std::string> base_, fiber_z_, fiber_w_;
  ChartPtr chart_;
  ChartPtr base_chart_;
};

/// Name of the formal first-order jet symbol d(fiber)/d(base).
std::string jet_symbol(std::string_view fiber, std::string_view base);

using MultiIndex = std::vector<int>;

/// Sign of the permutation sorting `idx`; 0 when an index repeats.
int sort_sign(MultiIndex& idx);

class DiffForm {
 public:
  DiffForm() = default;
  DiffForm(ChartPtr chart, int degree);

  static DiffForm scalar(ChartPtr chart, const Expr& f);
  static DiffForm differential(ChartPtr chart, std::string_view coord);
  /// coeff * dx^{idx}; idx need not be ascending.
  static DiffForm monomial(ChartPtr chart, MultiIndex idx, const Expr& coeff = Expr(1));
  static DiffForm monomial(ChartPtr chart, const std::vector<std::string>& coords, const Expr& coeff = Expr(1));
  static DiffForm one_form(ChartPtr chart, const std::vector<Expr>& components);
  static DiffForm volume(ChartPtr chart);

  const ChartPtr& chart() const { return chart_; }
  int degree() const { return degree_; }
  const std::map<MultiIndex, Expr>& terms() const { return terms_; }
  Expr coeff(const MultiIndex& ascending) const;
  bool is_zero() const { return terms_.empty(); }

  /// Adds coeff * dx^{idx} with sign normalization.
  void add(MultiIndex idx, const Expr& coeff);

  DiffForm operator+(const DiffForm& b) const;
  DiffForm operator-(const DiffForm& b) const;
  DiffForm operator-() const;
  friend DiffForm operator*(const Expr& f, const DiffForm& a);
  DiffForm& operator+=(const DiffForm& b) { return *this = *this + b; }

  friend bool operator==(const DiffForm& a, const DiffForm& b);

  /// Components as a dense vector, for one-forms.
  std::vector<Expr> components() const;

  /// Applies f to every coefficient.
  template <class F>
  DiffForm map_coefficients(F&& f) const {
    DiffForm out(chart_, degree_);
    for (const auto& [idx, c] : terms_) out.add(idx, f(c));
    return out;
  }

  std::string str() const;

 private:
  ChartPtr chart_;
  int degree_ = 0;
  std::map<MultiIndex, Expr> terms_;
};

class VecField {
 public:
  VecField() = default;
  VecField(ChartPtr chart, std::vector<Expr> components);

  static VecField zero(ChartPtr chart);
  static VecField coordinate(ChartPtr chart, std::string_view coord);

  const ChartPtr& chart() const { return chart_; }
  std::size_t size() const { return comps_.size(); }
  const Expr& operator[](std::size_t i) const { return comps_[i]; }
  const Expr& component(std::string_view coord) const;
  const std::vector<Expr>& components() const { return comps_; }
  bool is_zero() const;

  VecField operator+(const VecField& b) const;
  VecField operator-(const VecField& b) const;
  friend VecField operator*(const Expr& f, const VecField& v);
  friend bool operator==(const VecField& a, const VecField& b);

  template <class F>
  VecField map_components(F&& f) const {
    std::vector<Expr> out;
    out.reserve(comps_.size());
    for (const auto& c : comps_) out.push_back(f(c));
    return VecField(chart_, std::move(out));
  }

  std::string str() const;

 private:
  ChartPtr chart_;
  std::vector<Expr> comps_;
};

/// Smooth map from a source chart into a target chart, given as one
/// expression (in source coordinates) per target coordinate.
struct ChartMap {
  ChartPtr source;
  ChartPtr target;
  std::vector<Expr> components;
};

/// Section of a bundle chart: fiber coordinates as functions of the base.
class SectionMap {
 public:
  /// `values` maps fiber coordinate names to expressions in base coordinates.
  SectionMap(const BundleChart& bundle, const std::map<std::string, Expr, std::less<>>& values);

  const BundleChart& bundle() const { return bundle_; }
  const Expr& value(std::string_view fiber) const;
  const std::vector<Expr>& fiber_values() const { return fiber_values_; }
  ChartMap as_map() const;

  /// Substitution taking each fiber coordinate to its value and each jet
  /// symbol to the corresponding derivative.
  std::map<std::string, Expr, std::less<>> jet_substitution() const;

 private:
  BundleChart bundle_;
  std::vector<Expr> fiber_values_;
};

DiffForm wedge(const DiffForm& a, const DiffForm& b);
DiffForm wedge_all(const std::vector<DiffForm>& forms);
DiffForm ext_d(const DiffForm& a);
DiffForm interior(const VecField& X, const DiffForm& a);
DiffForm pullback(const ChartMap& phi, const DiffForm& a);
DiffForm pullback(const SectionMap& phi, const DiffForm& a);
/// Pullback along a formal section: fiber differentials become jet symbols,
/// fiber coordinates stay as symbols. The result lives on the base chart.
DiffForm jet_pullback(const BundleChart& bundle, const DiffForm& a);

VecField lie_bracket(const VecField& X, const VecField& Y);
Expr lie_derivative(const VecField& X, const Expr& f);
DiffForm hodge_star(const DiffForm& a);
DiffForm dual_one_form(const VecField& X);

}  // namespace cartan
