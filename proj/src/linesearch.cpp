#include "bfssd/linesearch.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace bfssd {

void LineSearchConfig::validate() const {
  if (!(beta > 0.0 && beta <= 0.5)) throw ConfigError("beta must lie in (0, 1/2]");
  if (!(shrink > 0.0 && shrink < 1.0)) throw ConfigError("shrink factor c must lie in (0, 1)");
  if (!(alpha_max > 0.0)) throw ConfigError("alpha_max must be positive");
  if (max_shrinks < 1) throw ConfigError("max_shrinks must be positive");
}

double Surrogate1D::correction(double alpha) const {
  const int n = intervals();
  const double h = alpha_max_ / n;
  int j = static_cast<int>(std::floor(alpha / h)) + 1;
  j = std::clamp(j, 1, n);
  const Knot& left = knots_[j - 1];
  const Knot& right = knots_[j];
  const double t = alpha - left.alpha;  // local coordinate on [alpha_{j-1}, alpha_j]
  return ((h - t) * left.psi + t * right.psi) / h;
}

int Surrogate1D::knot_at(double alpha) const {
  for (std::size_t j = 0; j < knots_.size(); ++j) {
    if (knots_[j].alpha == alpha) return static_cast<int>(j);
  }
  return -1;
}

Surrogate1D build_surrogate(const BiFidelityProblem& problem, EvaluationLedger& ledger,
                            const Vector& x, const Vector& direction, int n_knots,
                            double alpha_max, double hf_at_x) {
  if (n_knots < 1) throw ConfigError("surrogate needs at least one knot");
  if (!(alpha_max > 0.0)) throw ConfigError("alpha_max must be positive");

  Surrogate1D s;
  s.alpha_max_ = alpha_max;
  s.base_ = x;
  s.direction_ = direction;
  s.knots_.resize(n_knots + 1);

  const double lf_at_x = counted_eval(problem, ledger, Fidelity::low, x);
  s.rho_ = std::abs(lf_at_x) < 1e-12 * std::max(1.0, std::abs(hf_at_x)) ? 0.0 : hf_at_x / lf_at_x;

  s.knots_[0] = {0.0, hf_at_x, lf_at_x, hf_at_x - s.rho_ * lf_at_x};
  for (int j = 1; j <= n_knots; ++j) {
    const double alpha = j == n_knots ? alpha_max : alpha_max * j / n_knots;
    const Vector point = x + alpha * direction;
    const double hf = counted_eval(problem, ledger, Fidelity::high, point);
    const double lf = counted_eval(problem, ledger, Fidelity::low, point);
    s.knots_[j] = {alpha, hf, lf, hf - s.rho_ * lf};
  }
  return s;
}

double eval_surrogate(const Surrogate1D& s, const BiFidelityProblem& problem,
                      EvaluationLedger& ledger, double alpha) {
  if (!(alpha >= 0.0 && alpha <= s.alpha_max())) {
    throw std::out_of_range("surrogate queried at alpha = " + std::to_string(alpha) +
                            " outside [0, " + std::to_string(s.alpha_max()) + "]");
  }
  if (const int j = s.knot_at(alpha); j >= 0) return s.knots()[j].hf_value;
  const Vector point = s.base_point() + alpha * s.direction();
  return s.rho() * counted_eval(problem, ledger, Fidelity::low, point) + s.correction(alpha);
}

BacktrackResult bf_backtracking(const Surrogate1D& s, const BiFidelityProblem& problem,
                                const LineSearchConfig& cfg, EvaluationLedger& ledger,
                                double hf_at_x, double decrease_scale) {
  BacktrackResult out;
  out.alpha = cfg.alpha_max;
  for (int m = 0;; ++m) {
    out.value = eval_surrogate(s, problem, ledger, out.alpha);
    if (out.value <= hf_at_x - cfg.beta * out.alpha * decrease_scale) {
      out.satisfied = true;
      return out;
    }
    if (m == cfg.max_shrinks) return out;
    out.alpha *= cfg.shrink;
    out.shrinks = m + 1;
  }
}

BacktrackResult hf_backtracking(const BiFidelityProblem& problem, EvaluationLedger& ledger,
                                const Vector& x, const Vector& step_direction, double hf_at_x,
                                const LineSearchConfig& cfg) {
  const double decrease = step_direction.squaredNorm();
  BacktrackResult out;
  out.alpha = cfg.alpha_max;
  for (int m = 0;; ++m) {
    out.value = counted_eval(problem, ledger, Fidelity::high, x - out.alpha * step_direction);
    if (out.value <= hf_at_x - cfg.beta * out.alpha * decrease) {
      out.satisfied = true;
      return out;
    }
    if (m == cfg.max_shrinks) return out;
    out.alpha *= cfg.shrink;
    out.shrinks = m + 1;
  }
}

ExactSearchResult exact_line_search(const BiFidelityProblem& problem, EvaluationLedger& ledger,
                                    const Vector& x, const Vector& step_direction,
                                    double alpha_max) {
  if (!(alpha_max > 0.0)) throw ConfigError("alpha_max must be positive");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  const double tol = 1e-8 * alpha_max;

  ExactSearchResult out;
  auto phi = [&](double a) {
    ++out.evaluations;
    return counted_eval(problem, ledger, Fidelity::high, x - a * step_direction);
  };

  double lo = 0.0;
  double hi = alpha_max;
  double a1 = hi - inv_phi * (hi - lo);
  double a2 = lo + inv_phi * (hi - lo);
  double f1 = phi(a1);
  double f2 = phi(a2);
  while (hi - lo > tol) {
    if (f1 <= f2) {
      hi = a2;
      a2 = a1;
      f2 = f1;
      a1 = hi - inv_phi * (hi - lo);
      f1 = phi(a1);
    } else {
      lo = a1;
      a1 = a2;
      f1 = f2;
      a2 = lo + inv_phi * (hi - lo);
      f2 = phi(a2);
    }
  }
  if (f1 <= f2) {
    out.alpha = a1;
    out.value = f1;
  } else {
    out.alpha = a2;
    out.value = f2;
  }
  return out;
}

void write_surrogate_csv(std::ostream& out, const Surrogate1D& s,
                         const BiFidelityProblem& problem, int points) {
  if (points < 2) throw ConfigError("surrogate dump needs at least two grid points");
  out << "alpha,surrogate,hf,lf\n";
  out.precision(17);
  for (int i = 0; i < points; ++i) {
    const double alpha = i == points - 1 ? s.alpha_max() : s.alpha_max() * i / (points - 1);
    const Vector point = s.base_point() + alpha * s.direction();
    const double lf = problem.lf(point);
    const double surrogate = s.rho() * lf + s.correction(alpha);
    out << alpha << ',' << surrogate << ',' << problem.hf(point) << ',' << lf << '\n';
  }
}

}  // namespace bfssd
