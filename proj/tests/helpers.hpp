#pragma once

#include <cmath>

#include "bfssd/core.hpp"

namespace testing {

using bfssd::BiFidelityProblem;
using bfssd::Matrix;
using bfssd::Vector;

/// HF = LF = f with unit cost ratio.
inline BiFidelityProblem single(int dim, std::function<double(const Vector&)> f,
                                std::string name = "single") {
  BiFidelityProblem p;
  p.name = std::move(name);
  p.hf = {dim, f};
  p.lf = {dim, f};
  p.lf_cost_ratio = 1.0;
  return p;
}

/// 1/2 |x|^2
inline BiFidelityProblem half_norm(int dim) {
  auto p = single(dim, [](const Vector& x) { return 0.5 * x.squaredNorm(); }, "half_norm");
  p.analytic_gradient = [](const Vector& x) { return x; };
  p.known_optimum = 0.0;
  p.smoothness = 1.0;
  return p;
}

/// HF = 3 LF exactly, LF = 1/2 x^T A x + b^T x + 1 with A = diag(1..D)/D.
inline BiFidelityProblem proportional_quadratic(int dim, Vector start) {
  Vector diag(dim);
  for (int i = 0; i < dim; ++i) diag[i] = static_cast<double>(i + 1) / dim;
  auto lf = [diag](const Vector& x) {
    return 0.5 * x.dot(diag.cwiseProduct(x)) + x.sum() / x.size() + 1.0;
  };
  BiFidelityProblem p;
  p.name = "proportional_quadratic";
  p.lf = {dim, lf};
  p.hf = {dim, [lf](const Vector& x) { return 3.0 * lf(x); }};
  p.lf_cost_ratio = 0.1;
  p.initial_point = std::move(start);
  p.smoothness = 3.0;
  return p;
}

/// Wraps an existing pair so that HF = 3 LF.
inline BiFidelityProblem make_proportional(const BiFidelityProblem& base) {
  BiFidelityProblem p = base;
  p.name = base.name + "_proportional";
  auto lf = base.lf.eval;
  p.hf = {base.dim(), [lf](const Vector& x) { return 3.0 * lf(x); }};
  p.analytic_gradient = nullptr;
  p.known_optimum.reset();
  if (p.smoothness) p.smoothness = std::nullopt;
  return p;
}

/// LF = 1 + 1/2 |x|^2 and HF = LF + W tent(alpha), where alpha is the
/// coordinate of x along `base + alpha direction` and tent is the distance to
/// the nearest multiple of `spacing` shifted by `offset`. HF(base) = LF(base)
/// when offset = 0, so rho = 1 exactly.
inline BiFidelityProblem tent_pair(const Vector& base, const Vector& direction, double width,
                                   double spacing, double offset = 0.0) {
  const int dim = static_cast<int>(base.size());
  auto lf = [](const Vector& x) { return 1.0 + 0.5 * x.squaredNorm(); };
  const double dd = direction.squaredNorm();
  auto hf = [=](const Vector& x) {
    const double alpha = (x - base).dot(direction) / dd - offset;
    const double r = alpha - spacing * std::round(alpha / spacing);
    return lf(x) + width * std::abs(r);
  };
  BiFidelityProblem p;
  p.name = "tent";
  p.hf = {dim, hf};
  p.lf = {dim, lf};
  p.lf_cost_ratio = 0.1;
  p.initial_point = base;
  return p;
}

}  // namespace testing
