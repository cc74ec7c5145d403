#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "bfssd/core.hpp"
#include "bfssd/linesearch.hpp"
#include "bfssd/subspace.hpp"

/// \file optimizers.hpp
/// The nine zeroth-order engines. Every engine runs on one thread, charges
/// every objective call to its own ledger and checkpoints each new iterate.

namespace bfssd {

enum class Method { bf_ssd, hf_ssd, fs_ssd, vr_ssd, gd, nag, cd, spsa, gs };

std::string_view method_name(Method m);
/// Accepts the names printed by method_name, case-insensitively, with '-' or '_'.
/// Throws ConfigError listing the valid names otherwise.
Method parse_method(std::string_view name);
const std::array<Method, 9>& all_methods();

/// How the lifted subspace gradient is scaled.
enum class FrameScaling {
  orthonormal,  ///< v~ = (l/D) P P^T grad, i.e. projection onto the orthonormal frame
  unbiased      ///< v~ = P P^T grad, E[v~] = grad
};

enum class MomentumSchedule {
  constant,  ///< mu_k = momentum
  decaying   ///< mu_k = (k - 1)/(k + 2)
};

struct SpsaGains {
  double a = 0.06;
  double A = 300.0;
  double alpha = 0.602;
  double c = 0.01;
  double gamma = 0.101;
};

struct OptimizerConfig {
  Method method = Method::bf_ssd;
  int subspace_dim = 20;  ///< l; GS uses it only for its default step
  /// Step of the fixed-step methods. 0 selects 1/L (GD, NAG, CD) or l/(L D)
  /// (FS-SSD, VR-SSD, GS), which needs the problem's smoothness constant.
  double fixed_step = 0.0;
  /// beta <= 0 selects l/(2D).
  LineSearchConfig linesearch{.beta = 0.0};
  int surrogate_knots = 1;  ///< n_k
  /// Finite-difference increment; 0 selects default_increment(x).
  double fd_increment = 0.0;
  DifferenceScheme difference = DifferenceScheme::forward;
  double budget = 1000.0;  ///< equivalent HF evaluations
  SpsaGains spsa;
  int vr_epoch_length = 0;  ///< 0 selects ceil(D/l)
  FrameScaling frame = FrameScaling::orthonormal;
  /// BF-SSD searches along v~/|v~| when set, along v~ itself otherwise.
  bool normalize_direction = true;
  double momentum = 0.9;
  MomentumSchedule momentum_schedule = MomentumSchedule::constant;
  /// HF-SSD: golden-section search instead of backtracking.
  bool exact_line_search = false;
  /// Reuse f(x_k) from the previous iteration as the difference base.
  bool reuse_base_value = true;
  /// Stop after this many iterations even with budget left (0: no limit).
  std::int64_t max_iterations = 0;

  /// Throws ConfigError on values that cannot run on a problem of dimension `dim`.
  void validate(int dim) const;
};

/// Stable hex digest of every field.
std::string config_digest(const OptimizerConfig& cfg);

struct IterationRecord {
  std::int64_t k = 0;
  double step = 0.0;            ///< alpha_k (0 when the step was rejected)
  double direction_norm = 0.0;  ///< |v~_k|
  double value = 0.0;           ///< HF value at the new iterate
  std::int64_t hf_calls = 0;    ///< cumulative, after this iteration
  std::int64_t lf_calls = 0;
};

struct RunResult {
  RunTrace trace;
  std::vector<IterationRecord> iterations;
  EvaluationLedger ledger;
  Vector final_point;
  /// Set when the run ended before the budget (stationary estimate).
  bool stopped_early = false;
};

RunResult run_bf_ssd(const BiFidelityProblem& problem, const OptimizerConfig& cfg, std::uint64_t seed);
RunResult run_hf_ssd(const BiFidelityProblem& problem, const OptimizerConfig& cfg, std::uint64_t seed);
RunResult run_fs_ssd(const BiFidelityProblem& problem, const OptimizerConfig& cfg, std::uint64_t seed);
RunResult run_vr_ssd(const BiFidelityProblem& problem, const OptimizerConfig& cfg, std::uint64_t seed);
RunResult run_gd(const BiFidelityProblem& problem, const OptimizerConfig& cfg, std::uint64_t seed);
RunResult run_nag(const BiFidelityProblem& problem, const OptimizerConfig& cfg, std::uint64_t seed);
RunResult run_cd(const BiFidelityProblem& problem, const OptimizerConfig& cfg, std::uint64_t seed);
RunResult run_spsa(const BiFidelityProblem& problem, const OptimizerConfig& cfg, std::uint64_t seed);
RunResult run_gs(const BiFidelityProblem& problem, const OptimizerConfig& cfg, std::uint64_t seed);

/// Dispatches on cfg.method.
RunResult run_optimizer(const BiFidelityProblem& problem, const OptimizerConfig& cfg,
                        std::uint64_t seed);

}  // namespace bfssd
