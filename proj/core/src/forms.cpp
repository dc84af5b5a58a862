#include "cartan/forms.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "cartan/errors.hpp"

namespace cartan {

namespace {

void require_same(const ChartPtr& a, const ChartPtr& b, const char* op) {
  if (!same_chart(a, b)) throw Error(ErrorKind::ChartMismatch, std::string(op) + ": operands live on different charts");
}

// Parity of the shuffle (a, b) for two ascending index lists.
int shuffle_sign(const MultiIndex& a, const MultiIndex& b) {
  int inversions = 0;
  for (int x : a)
    for (int y : b)
      if (x > y) ++inversions;
  return inversions % 2 == 0 ? 1 : -1;
}

}  // namespace

// ---------------------------------------------------------------- charts

Chart::Chart(std::vector<std::string> names) : names_(std::move(names)) {
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (!seen.insert(n).second) throw Error(ErrorKind::InvalidArgument, "duplicate coordinate name '" + n + "'");
  }
}

std::optional<std::size_t> Chart::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return i;
  return std::nullopt;
}

ChartPtr make_chart(std::vector<std::string> names) { return std::make_shared<const Chart>(std::move(names)); }

bool same_chart(const ChartPtr& a, const ChartPtr& b) { return a == b || (a && b && *a == *b); }

BundleChart::BundleChart(std::vector<std::string> base, std::vector<std::string> fiber_z,
                         std::vector<std::string> fiber_w)
    : base_(std::move(base)), fiber_z_(std::move(fiber_z)), fiber_w_(std::move(fiber_w)) {
  if (base_.empty()) throw Error(ErrorKind::InvalidArgument, "bundle chart needs at least one base coordinate");
  if (fiber_z_.empty()) throw Error(ErrorKind::InvalidArgument, "bundle chart needs at least one fiber coordinate");
  std::vector<std::string> all = base_;
  all.insert(all.end(), fiber_z_.begin(), fiber_z_.end());
  all.insert(all.end(), fiber_w_.begin(), fiber_w_.end());
  chart_ = make_chart(std::move(all));
  base_chart_ = make_chart(base_);
}

std::vector<std::string> BundleChart::fiber() const {
  std::vector<std::string> f = fiber_z_;
  f.insert(f.end(), fiber_w_.begin(), fiber_w_.end());
  return f;
}

bool operator==(const BundleChart& a, const BundleChart& b) {
  return a.base_ == b.base_ && a.fiber_z_ == b.fiber_z_ && a.fiber_w_ == b.fiber_w_;
}

std::string jet_symbol(std::string_view fiber, std::string_view base) {
  std::string s = "D";
  s += fiber;
  s += "_";
  s += base;
  return s;
}

int sort_sign(MultiIndex& idx) {
  int sign = 1;
  for (std::size_t i = 1; i < idx.size(); ++i) {
    for (std::size_t j = i; j > 0 && idx[j - 1] > idx[j]; --j) {
      std::swap(idx[j - 1], idx[j]);
      sign = -sign;
    }
  }
  for (std::size_t i = 1; i < idx.size(); ++i)
    if (idx[i] == idx[i - 1]) return 0;
  return sign;
}

// ---------------------------------------------------------------- forms

DiffForm::DiffForm(ChartPtr chart, int degree) : chart_(std::move(chart)), degree_(degree) {
  if (degree_ < 0 || static_cast<std::size_t>(degree_) > chart_->dim()) {
    throw Error(ErrorKind::DegreeMismatch, "form degree out of range for chart");
  }
}

DiffForm DiffForm::scalar(ChartPtr chart, const Expr& f) {
  DiffForm out(std::move(chart), 0);
  out.add({}, f);
  return out;
}

DiffForm DiffForm::differential(ChartPtr chart, std::string_view coord) {
  auto i = chart->index_of(coord);
  if (!i) throw Error(ErrorKind::ChartMismatch, "unknown coordinate '" + std::string(coord) + "'");
  return monomial(std::move(chart), MultiIndex{static_cast<int>(*i)});
}

DiffForm DiffForm::monomial(ChartPtr chart, MultiIndex idx, const Expr& coeff) {
  DiffForm out(std::move(chart), static_cast<int>(idx.size()));
  out.add(std::move(idx), coeff);
  return out;
}

DiffForm DiffForm::monomial(ChartPtr chart, const std::vector<std::string>& coords, const Expr& coeff) {
  MultiIndex idx;
  for (const auto& c : coords) {
    auto i = chart->index_of(c);
    if (!i) throw Error(ErrorKind::ChartMismatch, "unknown coordinate '" + c + "'");
    idx.push_back(static_cast<int>(*i));
  }
  return monomial(std::move(chart), std::move(idx), coeff);
}

DiffForm DiffForm::one_form(ChartPtr chart, const std::vector<Expr>& components) {
  if (components.size() != chart->dim()) throw Error(ErrorKind::DegreeMismatch, "one-form component count");
  DiffForm out(std::move(chart), 1);
  for (std::size_t i = 0; i < components.size(); ++i) out.add({static_cast<int>(i)}, components[i]);
  return out;
}

DiffForm DiffForm::volume(ChartPtr chart) {
  MultiIndex idx(chart->dim());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  return monomial(std::move(chart), std::move(idx));
}

Expr DiffForm::coeff(const MultiIndex& ascending) const {
  auto it = terms_.find(ascending);
  return it == terms_.end() ? Expr() : it->second;
}

void DiffForm::add(MultiIndex idx, const Expr& coeff) {
  if (static_cast<int>(idx.size()) != degree_) throw Error(ErrorKind::DegreeMismatch, "index length differs from degree");
  if (coeff.is_zero()) return;
  const int s = sort_sign(idx);
  if (s == 0) return;
  for (int i : idx) {
    if (i < 0 || static_cast<std::size_t>(i) >= chart_->dim()) throw Error(ErrorKind::ChartMismatch, "index out of chart");
  }
  auto [it, inserted] = terms_.try_emplace(idx, s > 0 ? coeff : -coeff);
  if (!inserted) {
    it->second = s > 0 ? it->second + coeff : it->second - coeff;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

DiffForm DiffForm::operator+(const DiffForm& b) const {
  require_same(chart_, b.chart_, "form addition");
  if (degree_ != b.degree_) throw Error(ErrorKind::DegreeMismatch, "adding forms of different degree");
  DiffForm out = *this;
  for (const auto& [idx, c] : b.terms_) out.add(idx, c);
  return out;
}

DiffForm DiffForm::operator-() const {
  DiffForm out = *this;
  for (auto& [idx, c] : out.terms_) c = -c;
  return out;
}

DiffForm DiffForm::operator-(const DiffForm& b) const { return *this + (-b); }

DiffForm operator*(const Expr& f, const DiffForm& a) {
  DiffForm out(a.chart_, a.degree_);
  if (f.is_zero()) return out;
  for (const auto& [idx, c] : a.terms_) out.add(idx, f * c);
  return out;
}

bool operator==(const DiffForm& a, const DiffForm& b) {
  return same_chart(a.chart_, b.chart_) && a.degree_ == b.degree_ && a.terms_ == b.terms_;
}

std::vector<Expr> DiffForm::components() const {
  if (degree_ != 1) throw Error(ErrorKind::DegreeMismatch, "components() needs a one-form");
  std::vector<Expr> out(chart_->dim());
  for (const auto& [idx, c] : terms_) out[static_cast<std::size_t>(idx[0])] = c;
  return out;
}

std::string DiffForm::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [idx, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    std::string d;
    for (std::size_t j = 0; j < idx.size(); ++j) {
      if (j) d += "^";
      d += "d" + chart_->name(static_cast<std::size_t>(idx[j]));
    }
    if (idx.empty()) {
      os << "(" << c.str() << ")";
    } else if (auto v = c.constant_value(); v && *v == 1) {
      os << d;
    } else {
      os << "(" << c.str() << ")*" << d;
    }
  }
  return os.str();
}

// ---------------------------------------------------------------- vector fields

VecField::VecField(ChartPtr chart, std::vector<Expr> components) : chart_(std::move(chart)), comps_(std::move(components)) {
  if (comps_.size() != chart_->dim()) throw Error(ErrorKind::DegreeMismatch, "vector field component count differs from chart dimension");
}

VecField VecField::zero(ChartPtr chart) {
  const std::size_t n = chart->dim();
  return VecField(std::move(chart), std::vector<Expr>(n));
}

VecField VecField::coordinate(ChartPtr chart, std::string_view coord) {
  auto i = chart->index_of(coord);
  if (!i) throw Error(ErrorKind::ChartMismatch, "unknown coordinate '" + std::string(coord) + "'");
  std::vector<Expr> c(chart->dim());
  c[*i] = Expr(1);
  return VecField(std::move(chart), std::move(c));
}

const Expr& VecField::component(std::string_view coord) const {
  auto i = chart_->index_of(coord);
  if (!i) throw Error(ErrorKind::ChartMismatch, "unknown coordinate '" + std::string(coord) + "'");
  return comps_[*i];
}

bool VecField::is_zero() const {
  return std::all_of(comps_.begin(), comps_.end(), [](const Expr& e) { return e.is_zero(); });
}

VecField VecField::operator+(const VecField& b) const {
  require_same(chart_, b.chart_, "vector field addition");
  std::vector<Expr> c(comps_.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = comps_[i] + b.comps_[i];
  return VecField(chart_, std::move(c));
}

VecField VecField::operator-(const VecField& b) const { return *this + (Expr(-1) * b); }

VecField operator*(const Expr& f, const VecField& v) {
  return v.map_components([&](const Expr& c) { return f * c; });
}

bool operator==(const VecField& a, const VecField& b) { return same_chart(a.chart_, b.chart_) && a.comps_ == b.comps_; }

std::string VecField::str() const {
  std::ostringstream os;
  bool first = true;
  for (std::size_t i = 0; i < comps_.size(); ++i) {
    if (comps_[i].is_zero()) continue;
    if (!first) os << " + ";
    first = false;
    os << "(" << comps_[i].str() << ")*d/d" << chart_->name(i);
  }
  if (first) os << "0";
  return os.str();
}

// ---------------------------------------------------------------- sections

SectionMap::SectionMap(const BundleChart& bundle, const std::map<std::string, Expr, std::less<>>& values)
    : bundle_(bundle) {
  const auto fiber = bundle_.fiber();
  std::set<std::string> fiber_names(fiber.begin(), fiber.end());
  for (const auto& [name, e] : values) {
    if (!fiber_names.contains(name)) {
      throw Error(ErrorKind::ChartMismatch, "section assigns '" + name + "', which is not a fiber coordinate");
    }
    for (const auto& s : symbols(e)) {
      if (fiber_names.contains(s)) {
        throw Error(ErrorKind::InvalidArgument, "section component for '" + name + "' depends on fiber coordinate '" + s + "'");
      }
    }
  }
  for (const auto& f : fiber) {
    auto it = values.find(f);
    if (it == values.end()) throw Error(ErrorKind::InvalidArgument, "section misses fiber coordinate '" + f + "'");
    fiber_values_.push_back(it->second);
  }
}

const Expr& SectionMap::value(std::string_view fiber) const {
  const auto f = bundle_.fiber();
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f[i] == fiber) return fiber_values_[i];
  throw Error(ErrorKind::ChartMismatch, "unknown fiber coordinate '" + std::string(fiber) + "'");
}

ChartMap SectionMap::as_map() const {
  ChartMap m{bundle_.base_chart(), bundle_.chart(), {}};
  for (const auto& x : bundle_.base()) m.components.push_back(Expr::symbol(x));
  for (const auto& v : fiber_values_) m.components.push_back(v);
  return m;
}

std::map<std::string, Expr, std::less<>> SectionMap::jet_substitution() const {
  std::map<std::string, Expr, std::less<>> out;
  const auto f = bundle_.fiber();
  for (std::size_t a = 0; a < f.size(); ++a) {
    out[f[a]] = fiber_values_[a];
    for (const auto& x : bundle_.base()) out[jet_symbol(f[a], x)] = diff(fiber_values_[a], x);
  }
  return out;
}

// ---------------------------------------------------------------- operations

DiffForm wedge(const DiffForm& a, const DiffForm& b) {
  require_same(a.chart(), b.chart(), "wedge");
  const int deg = a.degree() + b.degree();
  if (static_cast<std::size_t>(deg) > a.chart()->dim()) {
    // Degree overflow: the product vanishes identically; report it as the
    // zero form of top degree.
    return DiffForm(a.chart(), static_cast<int>(a.chart()->dim()));
  }
  DiffForm out(a.chart(), deg);
  for (const auto& [ia, ca] : a.terms()) {
    for (const auto& [ib, cb] : b.terms()) {
      MultiIndex idx = ia;
      idx.insert(idx.end(), ib.begin(), ib.end());
      out.add(std::move(idx), ca * cb);
    }
  }
  return out;
}

DiffForm wedge_all(const std::vector<DiffForm>& forms) {
  if (forms.empty()) throw Error(ErrorKind::InvalidArgument, "wedge of an empty list");
  DiffForm acc = forms.front();
  for (std::size_t i = 1; i < forms.size(); ++i) acc = wedge(acc, forms[i]);
  return acc;
}

DiffForm ext_d(const DiffForm& a) {
  const auto& chart = a.chart();
  if (static_cast<std::size_t>(a.degree()) >= chart->dim()) return DiffForm(chart, a.degree());
  DiffForm out(chart, a.degree() + 1);
  for (const auto& [idx, c] : a.terms()) {
    for (std::size_t j = 0; j < chart->dim(); ++j) {
      Expr dc = diff(c, chart->name(j));
      if (dc.is_zero()) continue;
      MultiIndex full{static_cast<int>(j)};
      full.insert(full.end(), idx.begin(), idx.end());
      out.add(std::move(full), dc);
    }
  }
  return out;
}

DiffForm interior(const VecField& X, const DiffForm& a) {
  require_same(X.chart(), a.chart(), "interior product");
  if (a.degree() == 0) throw Error(ErrorKind::DegreeMismatch, "interior product of a 0-form");
  DiffForm out(a.chart(), a.degree() - 1);
  for (const auto& [idx, c] : a.terms()) {
    for (std::size_t pos = 0; pos < idx.size(); ++pos) {
      const Expr& xi = X[static_cast<std::size_t>(idx[pos])];
      if (xi.is_zero()) continue;
      MultiIndex rest = idx;
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(pos));
      out.add(std::move(rest), pos % 2 == 0 ? xi * c : -(xi * c));
    }
  }
  return out;
}

namespace {

DiffForm pullback_with(const DiffForm& a, const ChartPtr& source, const std::vector<DiffForm>& images,
                       const std::map<std::string, Expr, std::less<>>& values) {
  if (static_cast<std::size_t>(a.degree()) > source->dim()) return DiffForm(source, static_cast<int>(source->dim()));
  DiffForm out(source, a.degree());
  for (const auto& [idx, c] : a.terms()) {
    DiffForm acc = DiffForm::scalar(source, subs(c, values));
    for (int i : idx) {
      acc = wedge(acc, images[static_cast<std::size_t>(i)]);
      if (acc.is_zero()) break;
    }
    if (acc.degree() == a.degree()) out += acc;
  }
  return out;
}

}  // namespace

DiffForm pullback(const ChartMap& phi, const DiffForm& a) {
  require_same(phi.target, a.chart(), "pullback");
  if (phi.components.size() != phi.target->dim()) throw Error(ErrorKind::ChartMismatch, "map component count");
  std::vector<DiffForm> images;
  std::map<std::string, Expr, std::less<>> values;
  for (std::size_t i = 0; i < phi.components.size(); ++i) {
    images.push_back(ext_d(DiffForm::scalar(phi.source, phi.components[i])));
    values[phi.target->name(i)] = phi.components[i];
  }
  return pullback_with(a, phi.source, images, values);
}

DiffForm pullback(const SectionMap& phi, const DiffForm& a) {
  require_same(phi.bundle().chart(), a.chart(), "pullback");
  return pullback(phi.as_map(), a);
}

DiffForm jet_pullback(const BundleChart& bundle, const DiffForm& a) {
  require_same(bundle.chart(), a.chart(), "jet pullback");
  const auto& base = bundle.base_chart();
  std::vector<DiffForm> images;
  for (const auto& x : bundle.base()) images.push_back(DiffForm::differential(base, x));
  for (const auto& y : bundle.fiber()) {
    std::vector<Expr> comps;
    for (const auto& x : bundle.base()) comps.push_back(Expr::symbol(jet_symbol(y, x)));
    images.push_back(DiffForm::one_form(base, comps));
  }
  return pullback_with(a, base, images, {});
}

VecField lie_bracket(const VecField& X, const VecField& Y) {
  require_same(X.chart(), Y.chart(), "Lie bracket");
  const auto& chart = X.chart();
  std::vector<Expr> out(chart->dim());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = lie_derivative(X, Y[i]) - lie_derivative(Y, X[i]);
  return VecField(chart, std::move(out));
}

Expr lie_derivative(const VecField& X, const Expr& f) {
  Expr out;
  for (std::size_t i = 0; i < X.size(); ++i) {
    if (X[i].is_zero()) continue;
    out += X[i] * diff(f, X.chart()->name(i));
  }
  return out;
}

DiffForm hodge_star(const DiffForm& a) {
  const auto& chart = a.chart();
  const int n = static_cast<int>(chart->dim());
  DiffForm out(chart, n - a.degree());
  for (const auto& [idx, c] : a.terms()) {
    MultiIndex comp;
    for (int i = 0; i < n; ++i)
      if (!std::binary_search(idx.begin(), idx.end(), i)) comp.push_back(i);
    const int s = shuffle_sign(idx, comp);
    out.add(comp, s > 0 ? c : -c);
  }
  return out;
}

DiffForm dual_one_form(const VecField& X) { return DiffForm::one_form(X.chart(), X.components()); }

}  // namespace cartan
