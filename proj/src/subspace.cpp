#include "bfssd/subspace.hpp"

#include <cmath>
#include <string>

namespace bfssd {

double ProjectionMatrix::scale() const {
  return std::sqrt(static_cast<double>(dim()) / static_cast<double>(subdim()));
}

ProjectionMatrix sample_projection(int dim, int subdim, RngStream& rng) {
  if (subdim < 1 || subdim > dim) {
    throw ConfigError("subspace dimension " + std::to_string(subdim) +
                      " must lie in [1, " + std::to_string(dim) + "]");
  }
  Matrix gaussian(dim, subdim);
  // column-major fill keeps the draw order independent of Eigen internals
  for (int j = 0; j < subdim; ++j)
    for (int i = 0; i < dim; ++i) gaussian(i, j) = rng.normal();

  Eigen::HouseholderQR<Matrix> qr(gaussian);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, subdim);
  const Matrix& r = qr.matrixQR();
  for (int j = 0; j < subdim; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  const double s = std::sqrt(static_cast<double>(dim) / static_cast<double>(subdim));
  return ProjectionMatrix{s * q};
}

double default_increment(const Vector& x) { return 1e-6 * std::max(1.0, x.norm()); }

GradientEstimate estimate_gradient(const BiFidelityProblem& problem, EvaluationLedger& ledger,
                                   const Vector& x, double hf_at_x, const ProjectionMatrix& P,
                                   double increment, DifferenceScheme scheme) {
  if (!(increment > 0.0)) throw ConfigError("finite-difference increment must be positive");
  if (P.dim() != x.size()) throw ConfigError("projection dimension does not match the point");

  GradientEstimate est;
  est.projected.resize(P.subdim());
  Vector probe(x.size());
  for (int i = 0; i < P.subdim(); ++i) {
    probe = x + increment * P.entries.col(i);
    const double forward = counted_eval(problem, ledger, Fidelity::high, probe);
    if (scheme == DifferenceScheme::forward) {
      est.projected[i] = (forward - hf_at_x) / increment;
    } else {
      probe = x - increment * P.entries.col(i);
      const double backward = counted_eval(problem, ledger, Fidelity::high, probe);
      est.projected[i] = (forward - backward) / (2.0 * increment);
    }
  }
  est.lifted = P.entries * est.projected;
  est.magnitude = est.lifted.norm();
  est.direction = est.magnitude > 0.0 ? Vector(est.lifted / est.magnitude)
                                      : Vector(Vector::Zero(x.size()));
  return est;
}

Vector coordinate_gradient(const BiFidelityProblem& problem, EvaluationLedger& ledger,
                           const Vector& x, double hf_at_x, double increment) {
  if (!(increment > 0.0)) throw ConfigError("finite-difference increment must be positive");
  Vector grad(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + increment;
    grad[i] = (counted_eval(problem, ledger, Fidelity::high, probe) - hf_at_x) / increment;
    probe[i] = x[i];
  }
  return grad;
}

}  // namespace bfssd
