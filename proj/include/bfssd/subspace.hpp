#pragma once

#include "bfssd/core.hpp"

/// \file subspace.hpp
/// Random subspace sampling and finite-difference gradient estimation.

namespace bfssd {

/// D x l matrix whose columns are a Haar-distributed orthonormal frame scaled
/// by sqrt(D/l), so that P^T P = (D/l) I and E[P P^T] = I.
struct ProjectionMatrix {
  Matrix entries;

  int dim() const { return static_cast<int>(entries.rows()); }
  int subdim() const { return static_cast<int>(entries.cols()); }
  /// sqrt(D/l): the factor relating entries to the underlying orthonormal frame.
  double scale() const;
};

/// Gram-Schmidt (QR) of a standard normal D x l matrix with the sign of
/// diag(R) forced positive. Throws ConfigError unless 1 <= l <= D.
ProjectionMatrix sample_projection(int dim, int subdim, RngStream& rng);

enum class DifferenceScheme { forward, central };

struct GradientEstimate {
  Vector projected;   ///< g, one directional difference per column
  Vector lifted;      ///< P g
  Vector direction;   ///< lifted / |lifted|, zero when stationary
  double magnitude = 0.0;

  bool stationary() const { return magnitude == 0.0; }
};

/// 1e-6 * max(1, |x|)
double default_increment(const Vector& x);

/// Directional finite differences of the HF objective along each column of P.
/// `hf_at_x` is the already-counted f(x). Forward differences cost l HF calls,
/// central differences 2l.
GradientEstimate estimate_gradient(const BiFidelityProblem& problem, EvaluationLedger& ledger,
                                   const Vector& x, double hf_at_x, const ProjectionMatrix& P,
                                   double increment,
                                   DifferenceScheme scheme = DifferenceScheme::forward);

/// Full forward-difference gradient along the coordinate axes (D HF calls).
Vector coordinate_gradient(const BiFidelityProblem& problem, EvaluationLedger& ledger,
                           const Vector& x, double hf_at_x, double increment);

}  // namespace bfssd
