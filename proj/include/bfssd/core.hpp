#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

/// \file core.hpp
/// Shared domain types: objectives, bi-fidelity pairing, evaluation
/// accounting, run traces and the seeded random stream.

namespace bfssd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Invalid configuration or violated precondition detected before a run starts.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A run could not continue (non-finite objective value and similar).
class RunAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scalar objective on R^dim. `eval` must be a pure function of its input.
struct Objective {
  int dim = 0;
  std::function<double(const Vector&)> eval;

  double operator()(const Vector& x) const { return eval(x); }
};

enum class Fidelity { high, low };

/// An expensive objective paired with a cheap approximation of it.
struct BiFidelityProblem {
  std::string name;
  Objective hf;
  Objective lf;
  /// Cost of one LF call measured in HF calls.
  double lf_cost_ratio = 1.0;
  /// Starting point of every optimizer (zeros when left empty).
  Vector initial_point;
  /// Test oracle only; optimizers never call it.
  std::function<Vector(const Vector&)> analytic_gradient;
  std::optional<double> known_optimum;
  /// Lipschitz constant of the HF gradient, when known.
  std::optional<double> smoothness;
  /// HF evaluations charged before the first iteration (e.g. LF pretraining).
  std::int64_t hf_preload = 0;

  int dim() const { return hf.dim; }
  Vector start() const;
  /// Throws ConfigError when the pairing invariants do not hold.
  void validate() const;
};

/// Counts HF and LF calls; the budget axis of every experiment.
class EvaluationLedger {
 public:
  explicit EvaluationLedger(double lf_cost_ratio = 1.0);

  void count(Fidelity fidelity);
  void preload_hf(std::int64_t calls);

  std::int64_t hf_calls() const { return hf_calls_; }
  std::int64_t lf_calls() const { return lf_calls_; }
  double lf_cost_ratio() const { return lf_cost_ratio_; }
  /// hf_calls + lf_calls * lf_cost_ratio
  double equivalent_hf() const;

 private:
  std::int64_t hf_calls_ = 0;
  std::int64_t lf_calls_ = 0;
  double lf_cost_ratio_;
};

/// Evaluates one fidelity and charges it to the ledger. Throws RunAbort on a
/// non-finite objective value.
double counted_eval(const BiFidelityProblem& problem, EvaluationLedger& ledger,
                    Fidelity fidelity, const Vector& x);

struct Checkpoint {
  double equiv_hf;
  double best_value;

  bool operator==(const Checkpoint&) const = default;
};

/// Running minimum of observed HF values against spent budget.
class RunTrace {
 public:
  RunTrace() = default;
  RunTrace(std::string method, std::uint64_t seed, std::string config_digest = {});

  /// Appends (ledger.equivalent_hf(), min(best, observed)). A checkpoint at an
  /// unchanged spend replaces the previous one.
  void record(const EvaluationLedger& ledger, double observed_hf_value);

  const std::vector<Checkpoint>& checkpoints() const { return checkpoints_; }
  bool empty() const { return checkpoints_.empty(); }
  double best() const;
  const std::string& method() const { return method_; }
  std::uint64_t seed() const { return seed_; }
  const std::string& config_digest() const { return config_digest_; }

  bool operator==(const RunTrace&) const = default;

 private:
  std::string method_;
  std::uint64_t seed_ = 0;
  std::string config_digest_;
  std::vector<Checkpoint> checkpoints_;
};

/// Seeded pseudo-random stream. child(i) derives an independent stream as a
/// pure function of (seed, i).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  static std::uint64_t child_seed(std::uint64_t seed, std::uint64_t index);
  RngStream child(std::uint64_t index) const { return RngStream(child_seed(seed_, index)); }

  std::uint64_t seed() const { return seed_; }
  double normal();
  double uniform();
  /// +1 or -1 with equal probability.
  double rademacher();
  std::size_t index(std::size_t n);
  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace bfssd
