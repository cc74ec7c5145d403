#include "bfssd/kernels.hpp"

#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bfssd::kernels {

PackedSymmetric::PackedSymmetric(const Matrix& full) : n_(static_cast<int>(full.rows())) {
  if (full.rows() != full.cols()) throw ConfigError("packed storage needs a square matrix");
  data_.resize(static_cast<std::size_t>(n_) * (n_ + 1) / 2);
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j <= i; ++j) {
      if (std::abs(full(i, j) - full(j, i)) > 1e-10) {
        throw ConfigError("matrix is not symmetric at (" + std::to_string(i) + ", " +
                          std::to_string(j) + ")");
      }
      data_[static_cast<std::size_t>(i) * (i + 1) / 2 + j] = full(i, j);
    }
  }
}

double PackedSymmetric::operator()(int i, int j) const {
  if (j > i) std::swap(i, j);
  return data_[static_cast<std::size_t>(i) * (i + 1) / 2 + j];
}

Matrix PackedSymmetric::unpack() const {
  Matrix full(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j <= i; ++j) full(i, j) = full(j, i) = (*this)(i, j);
  return full;
}

namespace {

// a_i (K_ii a_i + 2 sum_{j<i} K_ij a_j); shared by both variants so the
// arithmetic is identical.
inline double packed_row_term(const PackedSymmetric& k, const Vector& a, int i) {
  const double* row = k.row(i);
  const double off = Eigen::Map<const Vector>(row, i).dot(a.head(i));
  return a[i] * (row[i] * a[i] + 2.0 * off);
}

inline double rbf_entry(const Matrix& points, int i, int j, double inv_two_l2) {
  return std::exp(-(points.row(i) - points.row(j)).squaredNorm() * inv_two_l2);
}

void check_quadratic_args(const PackedSymmetric& k, const Vector& a) {
  if (a.size() != k.size()) throw ConfigError("quadratic form: dimension mismatch");
}

}  // namespace

double quadratic_form(const PackedSymmetric& k, const Vector& a) {
  check_quadratic_args(k, a);
  const int n = k.size();
  std::vector<double> partial(n);
#pragma omp parallel for schedule(static, 16)
  for (int i = 0; i < n; ++i) partial[i] = packed_row_term(k, a, i);
  return std::accumulate(partial.begin(), partial.end(), 0.0);
}

double quadratic_form_serial(const PackedSymmetric& k, const Vector& a) {
  check_quadratic_args(k, a);
  double total = 0.0;
  for (int i = 0; i < k.size(); ++i) total += packed_row_term(k, a, i);
  return total;
}

Matrix rbf_gram(const Matrix& points, double lengthscale) {
  if (!(lengthscale > 0.0)) throw ConfigError("lengthscale must be positive");
  const int n = static_cast<int>(points.rows());
  const double inv_two_l2 = 1.0 / (2.0 * lengthscale * lengthscale);
  Matrix k(n, n);
#pragma omp parallel for schedule(dynamic, 8)
  for (int i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (int j = 0; j < i; ++j) k(i, j) = k(j, i) = rbf_entry(points, i, j, inv_two_l2);
  }
  return k;
}

Matrix rbf_gram_serial(const Matrix& points, double lengthscale) {
  if (!(lengthscale > 0.0)) throw ConfigError("lengthscale must be positive");
  const int n = static_cast<int>(points.rows());
  const double inv_two_l2 = 1.0 / (2.0 * lengthscale * lengthscale);
  Matrix k(n, n);
  for (int i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (int j = 0; j < i; ++j) k(i, j) = k(j, i) = rbf_entry(points, i, j, inv_two_l2);
  }
  return k;
}

double component_mean(std::span<const std::function<double(const Vector&)>> components,
                      std::span<const int> selection, const Vector& x) {
  const int m = static_cast<int>(selection.size());
  if (m == 0) throw ConfigError("component mean over an empty selection");
  std::vector<double> values(m);
#pragma omp parallel for schedule(static)
  for (int s = 0; s < m; ++s) values[s] = components[selection[s]](x);
  return std::accumulate(values.begin(), values.end(), 0.0) / m;
}

double component_mean_serial(std::span<const std::function<double(const Vector&)>> components,
                             std::span<const int> selection, const Vector& x) {
  if (selection.empty()) throw ConfigError("component mean over an empty selection");
  double total = 0.0;
  for (int idx : selection) total += components[idx](x);
  return total / static_cast<double>(selection.size());
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace bfssd::kernels
