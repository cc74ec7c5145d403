#pragma once

#include <iosfwd>
#include <vector>

#include "bfssd/core.hpp"

/// \file linesearch.hpp
/// One-dimensional line searches along a descent ray: the bi-fidelity
/// surrogate with its Armijo backtracking, and the single-fidelity HF
/// backtracking and golden-section searches used as baselines.

namespace bfssd {

enum class DecreaseMode {
  squared_magnitude,  ///< sufficient decrease scaled by |v~|^2
  magnitude           ///< scaled by |v~|, the slope along a unit direction
};

struct LineSearchConfig {
  double beta = 0.01;       ///< Armijo constant, in (0, 1/2]
  double shrink = 0.9;      ///< backtracking factor c, in (0, 1)
  double alpha_max = 1.0;   ///< first trial step
  int max_shrinks = 100;    ///< M
  DecreaseMode decrease_mode = DecreaseMode::squared_magnitude;

  void validate() const;
};

/// phi~(alpha) = rho * f_LF(x + alpha v) + psi~(alpha), where psi~ linearly
/// interpolates psi_j = phi(alpha_j) - rho * f_LF(x + alpha_j v) on n
/// equispaced knots over [0, alpha_max]. Immutable once built.
class Surrogate1D {
 public:
  struct Knot {
    double alpha;
    double hf_value;  ///< phi(alpha_j)
    double lf_value;  ///< f_LF(x + alpha_j v)
    double psi;
  };

  double rho() const { return rho_; }
  double alpha_max() const { return alpha_max_; }
  int intervals() const { return static_cast<int>(knots_.size()) - 1; }
  const std::vector<Knot>& knots() const { return knots_; }
  const Vector& base_point() const { return base_; }
  const Vector& direction() const { return direction_; }

  /// Piecewise-linear correction psi~(alpha); no objective calls.
  double correction(double alpha) const;
  /// Knot index when alpha coincides exactly with a knot, otherwise -1.
  int knot_at(double alpha) const;

 private:
  friend Surrogate1D build_surrogate(const BiFidelityProblem&, EvaluationLedger&, const Vector&,
                                     const Vector&, int, double, double);
  double rho_ = 0.0;
  double alpha_max_ = 0.0;
  std::vector<Knot> knots_;
  Vector base_;
  Vector direction_;
};

/// Samples phi at n_knots new equispaced points (n_knots HF calls; the knot
/// at 0 reuses hf_at_x), sets rho = f_HF(x)/f_LF(x) (zero when f_LF(x) is
/// numerically zero) and records the LF value at every knot (n_knots + 1 LF
/// calls). `direction` already carries the descent sign.
Surrogate1D build_surrogate(const BiFidelityProblem& problem, EvaluationLedger& ledger,
                            const Vector& x, const Vector& direction, int n_knots,
                            double alpha_max, double hf_at_x);

/// phi~(alpha). One LF call, except at a knot where the recorded HF value is
/// returned for free. Throws std::out_of_range outside [0, alpha_max].
double eval_surrogate(const Surrogate1D& s, const BiFidelityProblem& problem,
                      EvaluationLedger& ledger, double alpha);

struct BacktrackResult {
  double alpha = 0.0;
  int shrinks = 0;
  bool satisfied = false;  ///< Armijo held at the returned step
  double value = 0.0;      ///< surrogate (BF) or HF value at the returned step
};

/// Largest alpha in {alpha_max, c alpha_max, ..., c^M alpha_max} with
/// phi~(alpha) <= hf_at_x - beta alpha decrease_scale; c^M alpha_max when none
/// passes. Only surrogate (LF) evaluations.
BacktrackResult bf_backtracking(const Surrogate1D& s, const BiFidelityProblem& problem,
                                const LineSearchConfig& cfg, EvaluationLedger& ledger,
                                double hf_at_x, double decrease_scale);

/// Same shrink loop on the true objective along -step_direction:
/// f(x - alpha v~) <= f(x) - beta alpha |v~|^2, one HF call per trial.
BacktrackResult hf_backtracking(const BiFidelityProblem& problem, EvaluationLedger& ledger,
                                const Vector& x, const Vector& step_direction, double hf_at_x,
                                const LineSearchConfig& cfg);

struct ExactSearchResult {
  double alpha = 0.0;
  double value = 0.0;
  int evaluations = 0;
};

/// Golden-section minimization of alpha -> f(x - alpha v~) over [0, alpha_max]
/// down to a bracket of width 1e-8 alpha_max. Every probe is a counted HF call.
/// Assumes unimodality; otherwise a local minimizer is returned.
ExactSearchResult exact_line_search(const BiFidelityProblem& problem, EvaluationLedger& ledger,
                                    const Vector& x, const Vector& step_direction,
                                    double alpha_max);

/// Writes `alpha,surrogate,hf,lf` rows on an equispaced grid of `points`
/// values. Diagnostic only: evaluations are not charged to any run.
void write_surrogate_csv(std::ostream& out, const Surrogate1D& s,
                         const BiFidelityProblem& problem, int points);

}  // namespace bfssd
