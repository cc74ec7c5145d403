#include "bfssd/problems.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

namespace bfssd {

// ---------------------------------------------------------------------------
// worst function

void WorstFunctionSpec::validate() const {
  if (dim < 1) throw ConfigError("worst function: dimension must be positive");
  if (intrinsic_dim < 1 || intrinsic_dim >= dim) {
    throw ConfigError("worst function: intrinsic dimension r must satisfy 1 <= r < D");
  }
  if (!(smoothness > 0.0)) throw ConfigError("worst function: L must be positive");
}

double worst_function_value(const WorstFunctionSpec& spec, const Vector& x) {
  const int r = spec.intrinsic_dim;
  double q = x[0] * x[0] + x[r - 1] * x[r - 1];
  for (int i = 0; i + 1 < r; ++i) {
    const double d = x[i] - x[i + 1];
    q += d * d;
  }
  const double L = spec.smoothness;
  return L * (q / 8.0 - x[0] / 4.0) + L * r / (8.0 * (r + 1));
}

Vector worst_function_gradient(const WorstFunctionSpec& spec, const Vector& x) {
  const int r = spec.intrinsic_dim;
  const double L = spec.smoothness;
  Vector g = Vector::Zero(x.size());
  g[0] += L * (x[0] / 4.0 - 0.25);
  g[r - 1] += L * x[r - 1] / 4.0;
  for (int i = 0; i + 1 < r; ++i) {
    const double d = L * (x[i] - x[i + 1]) / 4.0;
    g[i] += d;
    g[i + 1] -= d;
  }
  return g;
}

Vector worst_function_minimizer(const WorstFunctionSpec& spec) {
  Vector x = Vector::Zero(spec.dim);
  const int r = spec.intrinsic_dim;
  for (int i = 0; i < r; ++i) x[i] = 1.0 - static_cast<double>(i + 1) / (r + 1);
  return x;
}

BiFidelityProblem make_worst_pair(int dim, int r_hf, int r_lf, double smoothness) {
  if (r_lf >= r_hf) {
    throw ConfigError("worst pair: r_L (" + std::to_string(r_lf) + ") must be below r_H (" +
                      std::to_string(r_hf) + ")");
  }
  const WorstFunctionSpec hf{dim, r_hf, smoothness};
  const WorstFunctionSpec lf{dim, r_lf, smoothness};
  hf.validate();
  lf.validate();

  BiFidelityProblem p;
  p.name = "worst";
  p.hf = {dim, [hf](const Vector& x) { return worst_function_value(hf, x); }};
  p.lf = {dim, [lf](const Vector& x) { return worst_function_value(lf, x); }};
  p.lf_cost_ratio = static_cast<double>(r_lf) / r_hf;
  p.analytic_gradient = [hf](const Vector& x) { return worst_function_gradient(hf, x); };
  p.known_optimum = 0.0;
  p.smoothness = smoothness;
  return p;
}

// ---------------------------------------------------------------------------
// kernel ridge

Matrix rbf_gram(const Matrix& points, double lengthscale) {
  return kernels::rbf_gram(points, lengthscale);
}

void KernelRidgeSpec::validate() const {
  const auto n = gram.rows();
  if (n == 0 || gram.cols() != n) throw ConfigError("kernel ridge: Gram matrix must be square");
  if (targets.size() != n) throw ConfigError("kernel ridge: target length does not match Gram");
  if (!(ridge > 0.0)) throw ConfigError("kernel ridge: ridge parameter must be positive");
  if (nystrom_set.empty() || static_cast<Eigen::Index>(nystrom_set.size()) > n) {
    throw ConfigError("kernel ridge: Nystrom set size must lie in [1, D]");
  }
  std::vector<int> sorted = nystrom_set;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end() || sorted.front() < 0 ||
      sorted.back() >= n) {
    throw ConfigError("kernel ridge: Nystrom indices must be distinct and in range");
  }
  if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw ConfigError("kernel ridge: Gram matrix is not symmetric");
  }
}

KernelRidgeModel::KernelRidgeModel(KernelRidgeSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  targets_ = spec_.targets;
  packed_ = kernels::PackedSymmetric(spec_.gram);

  const int l = inducing();
  cross_.resize(dim(), l);
  Matrix block(l, l);
  for (int s = 0; s < l; ++s) {
    cross_.col(s) = spec_.gram.col(spec_.nystrom_set[s]);
    for (int t = 0; t < l; ++t) block(s, t) = spec_.gram(spec_.nystrom_set[s], spec_.nystrom_set[t]);
  }
  inducing_llt_.compute(block);
  // jitter escalation for near-singular inducing blocks
  for (double jitter = 1e-10; inducing_llt_.info() != Eigen::Success; jitter *= 10.0) {
    if (jitter > 1e-6) throw ConfigError("kernel ridge: K[S,S] is singular even with jitter 1e-6");
    jitter_ = jitter;
    inducing_llt_.compute(block + jitter * Matrix::Identity(l, l));
  }
}

double KernelRidgeModel::hf_value(const Vector& a) const {
  return kernels::quadratic_form(packed_, a) - 2.0 * a.dot(targets_) +
         spec_.ridge * a.squaredNorm();
}

double KernelRidgeModel::lf_value(const Vector& a) const {
  const Vector z = cross_.transpose() * a;
  const double low_rank = z.dot(inducing_llt_.solve(z));
  return low_rank - 2.0 * a.dot(targets_) + spec_.ridge * a.squaredNorm();
}

Matrix KernelRidgeModel::nystrom_matrix() const {
  return cross_ * inducing_llt_.solve(cross_.transpose());
}

Vector KernelRidgeModel::direct_solution() const {
  const Matrix system = spec_.gram + spec_.ridge * Matrix::Identity(dim(), dim());
  return system.llt().solve(targets_);
}

double KernelRidgeModel::optimum_value() const {
  const Vector a = direct_solution();
  return hf_value(a);
}

double KernelRidgeModel::smoothness() const {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(spec_.gram, Eigen::EigenvaluesOnly);
  return 2.0 * (eig.eigenvalues().maxCoeff() + spec_.ridge);
}

double kernel_ridge_objective(const KernelRidgeModel& model, const Vector& a, bool use_nystrom) {
  return use_nystrom ? model.lf_value(a) : model.hf_value(a);
}

BiFidelityProblem make_kernel_pair(std::shared_ptr<const KernelRidgeModel> model) {
  BiFidelityProblem p;
  p.name = "kernel_ridge";
  const int d = model->dim();
  p.hf = {d, [model](const Vector& a) { return model->hf_value(a); }};
  p.lf = {d, [model](const Vector& a) { return model->lf_value(a); }};
  p.lf_cost_ratio = static_cast<double>(model->inducing()) / d;
  p.analytic_gradient = [model](const Vector& a) {
    const auto& s = model->spec();
    return Vector(2.0 * (s.gram * a - s.targets + s.ridge * a));
  };
  p.known_optimum = model->optimum_value();
  p.smoothness = model->smoothness();
  return p;
}

std::vector<int> sample_subset(int n, int size, RngStream& rng) {
  if (size < 1 || size > n) throw ConfigError("subset size must lie in [1, n]");
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < size; ++i) {
    const auto j = i + static_cast<int>(rng.index(static_cast<std::size_t>(n - i)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(size);
  std::sort(idx.begin(), idx.end());
  return idx;
}

RegressionData make_clustered_regression(int samples, int features, int clusters,
                                         std::uint64_t seed) {
  if (samples < 1 || features < 1 || clusters < 1) {
    throw ConfigError("synthetic regression: sizes must be positive");
  }
  RngStream rng(seed);
  Matrix centers(clusters, features);
  for (int c = 0; c < clusters; ++c)
    for (int f = 0; f < features; ++f) centers(c, f) = 2.0 * rng.normal();
  Vector weights(features);
  for (int f = 0; f < features; ++f) weights[f] = rng.normal() / std::sqrt(features);

  RegressionData data;
  data.points.resize(samples, features);
  data.targets.resize(samples);
  for (int i = 0; i < samples; ++i) {
    const auto c = static_cast<int>(rng.index(static_cast<std::size_t>(clusters)));
    for (int f = 0; f < features; ++f) data.points(i, f) = centers(c, f) + 0.35 * rng.normal();
  }
  for (int f = 0; f < features; ++f) {
    auto col = data.points.col(f);
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().mean());
    col = (col.array() - mean) / (sd > 0.0 ? sd : 1.0);
  }
  for (int i = 0; i < samples; ++i) {
    const double s = data.points.row(i).dot(weights);
    data.targets[i] = 2.0 + std::sin(2.0 * s) + 0.5 * s + 0.1 * rng.normal();
  }
  return data;
}

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char ch) { return !std::isspace(ch); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

RegressionData load_regression_csv(const std::filesystem::path& path,
                                   const std::vector<std::string>& feature_columns,
                                   const std::string& target_column, int row_limit) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open file");
  if (feature_columns.empty()) throw ConfigError("CSV: at least one feature column is required");

  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ":1: missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  auto column_of = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError(path.string() + ":1: unknown column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  std::vector<std::size_t> feature_idx;
  for (const auto& name : feature_columns) feature_idx.push_back(column_of(name));
  const std::size_t target_idx = column_of(target_column);

  std::vector<std::vector<double>> rows;
  std::vector<double> targets;
  int line_no = 1;
  while ((row_limit <= 0 || static_cast<int>(rows.size()) < row_limit) && std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " cells, found " +
                      std::to_string(cells.size()));
    }
    auto number = [&](std::size_t col) {
      const std::string& text = cells[col];
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(text.c_str(), &end);
      if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(v)) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": non-numeric cell '" +
                        text + "' in column '" + header[col] + "'");
      }
      return v;
    };
    std::vector<double> row;
    for (auto col : feature_idx) row.push_back(number(col));
    targets.push_back(number(target_idx));
    rows.push_back(std::move(row));
  }

  RegressionData data;
  data.points.resize(static_cast<Eigen::Index>(rows.size()),
                     static_cast<Eigen::Index>(feature_idx.size()));
  data.targets.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t f = 0; f < feature_idx.size(); ++f) data.points(i, f) = rows[i][f];
    data.targets[i] = targets[i];
  }
  return data;
}

// ---------------------------------------------------------------------------
// low-rank quadratic, subsampled sums

LowRankQuadraticPair make_lowrank_quadratic_pair(const Matrix& A, const Vector& a, int rank,
                                                 double lf_cost_ratio) {
  const auto n = A.rows();
  if (A.cols() != n || a.size() != n) throw ConfigError("low-rank pair: dimension mismatch");
  if (rank < 0 || rank > n) throw ConfigError("low-rank pair: rank must lie in [0, D]");
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw ConfigError("low-rank pair: A must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(A);
  if (eig.info() != Eigen::Success) throw ConfigError("low-rank pair: eigendecomposition failed");
  // descending order
  const Vector values = eig.eigenvalues().reverse();
  const Matrix vectors = eig.eigenvectors().rowwise().reverse();
  if (values.minCoeff() < -1e-10 * std::max(1.0, values.maxCoeff())) {
    throw ConfigError("low-rank pair: A must be positive semi-definite");
  }
  const Matrix top = vectors.leftCols(rank);
  const Matrix approx = top * values.head(rank).asDiagonal() * top.transpose();

  LowRankQuadraticPair out;
  out.eigenvalues = values;
  out.lambda_next = rank < n ? std::max(0.0, values[rank]) : 0.0;
  auto& p = out.problem;
  p.name = "lowrank_quadratic";
  const int d = static_cast<int>(n);
  p.hf = {d, [A, a](const Vector& x) { return 0.5 * x.dot(A * x) + x.dot(a); }};
  p.lf = {d, [approx, a](const Vector& x) { return 0.5 * x.dot(approx * x) + x.dot(a); }};
  p.lf_cost_ratio = lf_cost_ratio;
  p.analytic_gradient = [A, a](const Vector& x) { return Vector(A * x + a); };
  p.smoothness = std::max(values[0], 0.0);
  return out;
}

SubsampledPair make_subsampled_pair(std::vector<Component> components, int dim, int subset_size,
                                    std::uint64_t seed) {
  const int n = static_cast<int>(components.size());
  if (n == 0) throw ConfigError("subsampled pair: no components");
  RngStream rng(seed);
  SubsampledPair out;
  out.subset = sample_subset(n, subset_size, rng);

  auto shared = std::make_shared<const std::vector<Component>>(std::move(components));
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  auto& p = out.problem;
  p.name = "subsampled_sum";
  p.hf = {dim, [shared, all](const Vector& x) { return kernels::component_mean(*shared, all, x); }};
  p.lf = {dim, [shared, subset = out.subset](const Vector& x) {
            return kernels::component_mean(*shared, subset, x);
          }};
  p.lf_cost_ratio = static_cast<double>(subset_size) / n;
  return out;
}

std::vector<Component> least_squares_components(const Matrix& design, const Vector& targets) {
  if (design.rows() != targets.size()) throw ConfigError("least squares: row count mismatch");
  std::vector<Component> out;
  out.reserve(static_cast<std::size_t>(design.rows()));
  for (Eigen::Index i = 0; i < design.rows(); ++i) {
    out.emplace_back([z = Vector(design.row(i).transpose()), y = targets[i]](const Vector& x) {
      const double r = z.dot(x) - y;
      return 0.5 * r * r;
    });
  }
  return out;
}

double control_variate_rho(const std::vector<double>& hf_samples,
                           const std::vector<double>& lf_samples) {
  const std::size_t n = hf_samples.size();
  if (n < 2 || lf_samples.size() != n) throw ConfigError("control variate: need >= 2 paired samples");
  const double mh = std::accumulate(hf_samples.begin(), hf_samples.end(), 0.0) / n;
  const double ml = std::accumulate(lf_samples.begin(), lf_samples.end(), 0.0) / n;
  double cov = 0.0;
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cov += (hf_samples[i] - mh) * (lf_samples[i] - ml);
    var += (lf_samples[i] - ml) * (lf_samples[i] - ml);
  }
  if (var == 0.0) return 0.0;
  return cov / var;
}

}  // namespace bfssd
