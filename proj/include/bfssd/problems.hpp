#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "bfssd/core.hpp"
#include "bfssd/kernels.hpp"

/// \file problems.hpp
/// Benchmark objectives and constructors for bi-fidelity pairs.

namespace bfssd {

/// Malformed or missing input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Nesterov's worst function

struct WorstFunctionSpec {
  int dim = 1000;
  int intrinsic_dim = 100;  ///< r, only x_1..x_r participate
  double smoothness = 20.0; ///< L

  void validate() const;
};

/// L((x_1^2 + sum_{i<r} (x_i - x_{i+1})^2 + x_r^2)/8 - x_1/4) + L r/(8(r+1)).
/// Minimum value 0.
double worst_function_value(const WorstFunctionSpec& spec, const Vector& x);
Vector worst_function_gradient(const WorstFunctionSpec& spec, const Vector& x);
/// x_i = 1 - i/(r+1) for i <= r, zero elsewhere.
Vector worst_function_minimizer(const WorstFunctionSpec& spec);

/// HF uses r_hf, LF uses r_lf, and one LF call costs r_lf/r_hf HF calls.
BiFidelityProblem make_worst_pair(int dim, int r_hf, int r_lf, double smoothness);

// ---------------------------------------------------------------------------
// Kernel ridge regression in dual form

/// Gram matrix of the rows of `points` under a Gaussian kernel (OpenMP).
Matrix rbf_gram(const Matrix& points, double lengthscale);

struct KernelRidgeSpec {
  Matrix gram;
  Vector targets;
  double ridge = 1e-3;
  std::vector<int> nystrom_set;

  void validate() const;
};

/// Precomputed state for both fidelities; immutable and shareable.
class KernelRidgeModel {
 public:
  explicit KernelRidgeModel(KernelRidgeSpec spec);

  int dim() const { return static_cast<int>(targets_.size()); }
  int inducing() const { return static_cast<int>(spec_.nystrom_set.size()); }
  const KernelRidgeSpec& spec() const { return spec_; }
  double jitter() const { return jitter_; }

  /// a^T K a - 2<a, y> + ridge |a|^2, O(D^2).
  double hf_value(const Vector& a) const;
  /// Same with K replaced by K[:,S] K[S,S]^{-1} K[S,:], O(l D); K~ is never formed.
  double lf_value(const Vector& a) const;
  /// Dense K~ for tests and diagnostics.
  Matrix nystrom_matrix() const;
  /// (K + ridge I)^{-1} y by Cholesky.
  Vector direct_solution() const;
  double optimum_value() const;
  /// 2 (lambda_max(K) + ridge): Lipschitz constant of the HF gradient.
  double smoothness() const;

 private:
  KernelRidgeSpec spec_;
  Vector targets_;
  kernels::PackedSymmetric packed_;
  Matrix cross_;                    // K[:, S]
  Eigen::LLT<Matrix> inducing_llt_; // K[S, S] + jitter I
  double jitter_ = 0.0;
};

double kernel_ridge_objective(const KernelRidgeModel& model, const Vector& a, bool use_nystrom);

/// lf_cost_ratio = l/D; known_optimum from the direct solve.
BiFidelityProblem make_kernel_pair(std::shared_ptr<const KernelRidgeModel> model);

/// Uniformly drawn inducing subset of size l (sorted).
std::vector<int> sample_subset(int n, int size, RngStream& rng);

struct RegressionData {
  Matrix points;  ///< one row per sample
  Vector targets;
};

/// Gaussian clusters in `features` dimensions with a smooth nonlinear target,
/// standardized per column. Its RBF Gram spectrum decays quickly.
RegressionData make_clustered_regression(int samples, int features, int clusters,
                                         std::uint64_t seed);

/// Header row plus numeric comma-separated columns. Reads at most row_limit
/// data rows. Errors name the offending line.
RegressionData load_regression_csv(const std::filesystem::path& path,
                                   const std::vector<std::string>& feature_columns,
                                   const std::string& target_column, int row_limit);

// ---------------------------------------------------------------------------
// Low-rank quadratic and subsampled-sum pairs

struct LowRankQuadraticPair {
  BiFidelityProblem problem;
  Vector eigenvalues;     ///< of A, descending
  double lambda_next = 0; ///< (r+1)-th largest eigenvalue, 0 when r = D
  /// Bound on the gradient gap |grad f_HF - grad f_LF| over the radius-R ball.
  double w_bound(double radius) const { return lambda_next * radius; }
};

/// f_HF = 1/2 <x, A x> + <x, a>; f_LF uses the best rank-r approximation of A.
LowRankQuadraticPair make_lowrank_quadratic_pair(const Matrix& A, const Vector& a, int rank,
                                                 double lf_cost_ratio);

using Component = std::function<double(const Vector&)>;

struct SubsampledPair {
  BiFidelityProblem problem;
  std::vector<int> subset;
};

/// HF averages all components; LF averages a fixed uniform subset of size r.
SubsampledPair make_subsampled_pair(std::vector<Component> components, int dim, int subset_size,
                                    std::uint64_t seed);

/// f_i(x) = 1/2 (<z_i, x> - y_i)^2 for the rows z_i of `design`.
std::vector<Component> least_squares_components(const Matrix& design, const Vector& targets);

/// Regression coefficient cov(HF, LF)/var(LF) from paired samples: the scale
/// that best maps LF values onto HF values in the least-squares sense.
double control_variate_rho(const std::vector<double>& hf_samples,
                           const std::vector<double>& lf_samples);

}  // namespace bfssd
