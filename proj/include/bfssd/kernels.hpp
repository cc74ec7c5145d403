#pragma once

#include <span>

#include "bfssd/core.hpp"

/// \file kernels.hpp
/// Data-parallel inner loops. Every OpenMP kernel has a serial twin that
/// performs the same floating-point operations in the same order, so the two
/// agree bit for bit and the serial version serves as the test reference.

namespace bfssd::kernels {

/// Lower triangle of a symmetric matrix stored row by row:
/// entry (i, j), j <= i, lives at i (i + 1) / 2 + j.
class PackedSymmetric {
 public:
  PackedSymmetric() = default;
  /// Throws ConfigError when `full` is not square or not symmetric within 1e-10.
  explicit PackedSymmetric(const Matrix& full);

  int size() const { return n_; }
  double operator()(int i, int j) const;
  const double* row(int i) const { return data_.data() + static_cast<std::size_t>(i) * (i + 1) / 2; }
  Matrix unpack() const;

 private:
  int n_ = 0;
  std::vector<double> data_;
};

/// a^T K a reading only the packed lower triangle.
double quadratic_form(const PackedSymmetric& k, const Vector& a);
double quadratic_form_serial(const PackedSymmetric& k, const Vector& a);

/// K(i, j) = exp(-|p_i - p_j|^2 / (2 lengthscale^2)) for the rows p_i of `points`.
Matrix rbf_gram(const Matrix& points, double lengthscale);
Matrix rbf_gram_serial(const Matrix& points, double lengthscale);

/// Mean of f_i(x) over the selected components.
double component_mean(std::span<const std::function<double(const Vector&)>> components,
                      std::span<const int> selection, const Vector& x);
double component_mean_serial(std::span<const std::function<double(const Vector&)>> components,
                             std::span<const int> selection, const Vector& x);

/// Number of OpenMP threads a parallel region would use (1 without OpenMP).
int max_threads();

}  // namespace bfssd::kernels
