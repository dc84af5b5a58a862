#pragma once

// Random instance generators shared by the property tests.

#include <random>
#include <string>
#include <vector>

#include "cartan/expr.hpp"
#include "cartan/forms.hpp"

namespace testing_support {

using cartan::Expr;

inline Expr rand_poly(std::mt19937_64& rng, const std::vector<std::string>& vars, int max_deg = 2, int terms = 3) {
  std::uniform_int_distribution<int> coef(-3, 3), deg(0, max_deg), pick(0, static_cast<int>(vars.size()) - 1);
  Expr out;
  for (int t = 0; t < terms; ++t) {
    Expr m(coef(rng));
    const int d = deg(rng);
    for (int i = 0; i < d; ++i) m *= Expr::symbol(vars[static_cast<std::size_t>(pick(rng))]);
    out += m;
  }
  return out;
}

inline cartan::DiffForm rand_form(std::mt19937_64& rng, const cartan::ChartPtr& chart, int degree, int terms = 3) {
  std::uniform_int_distribution<int> pick(0, static_cast<int>(chart->dim()) - 1);
  cartan::DiffForm out(chart, degree);
  for (int t = 0; t < terms; ++t) {
    cartan::MultiIndex idx;
    for (int i = 0; i < degree; ++i) idx.push_back(pick(rng));
    out.add(idx, rand_poly(rng, chart->names()));
  }
  return out;
}

inline cartan::VecField rand_field(std::mt19937_64& rng, const cartan::ChartPtr& chart) {
  std::vector<Expr> c;
  for (std::size_t i = 0; i < chart->dim(); ++i) c.push_back(rand_poly(rng, chart->names()));
  return cartan::VecField(chart, c);
}

}  // namespace testing_support
