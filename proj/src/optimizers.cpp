#include "bfssd/optimizers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <optional>
#include <sstream>

namespace bfssd {

namespace {

constexpr std::array<Method, 9> kMethods = {Method::bf_ssd, Method::hf_ssd, Method::fs_ssd,
                                            Method::vr_ssd, Method::gd,     Method::nag,
                                            Method::cd,     Method::spsa,   Method::gs};

constexpr int kStationaryRetries = 3;

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::bf_ssd: return "BF-SSD";
    case Method::hf_ssd: return "HF-SSD";
    case Method::fs_ssd: return "FS-SSD";
    case Method::vr_ssd: return "VR-SSD";
    case Method::gd: return "GD";
    case Method::nag: return "NAG";
    case Method::cd: return "CD";
    case Method::spsa: return "SPSA";
    case Method::gs: return "GS";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  auto canonical = [](std::string_view s) {
    std::string out;
    for (char ch : s) out += ch == '_' ? '-' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    return out;
  };
  const std::string wanted = canonical(name);
  std::string valid;
  for (Method m : kMethods) {
    if (canonical(method_name(m)) == wanted) return m;
    valid += (valid.empty() ? "" : ", ") + std::string(method_name(m));
  }
  throw ConfigError("unknown method '" + std::string(name) + "'; valid methods: " + valid);
}

const std::array<Method, 9>& all_methods() { return kMethods; }

void OptimizerConfig::validate(int dim) const {
  if (subspace_dim < 1 || subspace_dim > dim) {
    throw ConfigError("subspace dimension l = " + std::to_string(subspace_dim) +
                      " must lie in [1, D = " + std::to_string(dim) + "]");
  }
  if (!(budget >= 0.0) || !std::isfinite(budget)) throw ConfigError("budget must be finite and >= 0");
  if (!(fixed_step >= 0.0)) throw ConfigError("fixed_step must be >= 0");
  if (!(fd_increment >= 0.0)) throw ConfigError("fd_increment must be >= 0");
  if (surrogate_knots < 1) throw ConfigError("surrogate knot count n_k must be >= 1");
  if (vr_epoch_length < 0) throw ConfigError("vr_epoch_length must be >= 0");
  if (max_iterations < 0) throw ConfigError("max_iterations must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(spsa.a > 0.0 && spsa.c > 0.0 && spsa.A >= 0.0 && spsa.alpha > 0.0 && spsa.gamma >= 0.0)) {
    throw ConfigError("SPSA gains need a > 0, c > 0, A >= 0, alpha > 0, gamma >= 0");
  }
  LineSearchConfig ls = linesearch;
  if (ls.beta <= 0.0) ls.beta = 0.5;  // resolved to l/(2D) at run time
  ls.validate();
}

std::string config_digest(const OptimizerConfig& cfg) {
  std::ostringstream os;
  os << std::setprecision(17) << static_cast<int>(cfg.method) << '|' << cfg.subspace_dim << '|'
     << cfg.fixed_step << '|' << cfg.linesearch.beta << '|' << cfg.linesearch.shrink << '|'
     << cfg.linesearch.alpha_max << '|' << cfg.linesearch.max_shrinks << '|'
     << static_cast<int>(cfg.linesearch.decrease_mode) << '|' << cfg.surrogate_knots << '|'
     << cfg.fd_increment << '|' << static_cast<int>(cfg.difference) << '|' << cfg.budget << '|'
     << cfg.spsa.a << '|' << cfg.spsa.A << '|' << cfg.spsa.alpha << '|' << cfg.spsa.c << '|'
     << cfg.spsa.gamma << '|' << cfg.vr_epoch_length << '|' << static_cast<int>(cfg.frame) << '|'
     << cfg.normalize_direction << '|' << cfg.momentum << '|'
     << static_cast<int>(cfg.momentum_schedule) << '|' << cfg.exact_line_search << '|'
     << cfg.reuse_base_value << '|' << cfg.max_iterations;
  // FNV-1a
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : os.str()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << h;
  return hex.str();
}

namespace {

/// Shared run state: ledger, trace, iterate and its HF value.
class Engine {
 public:
  Engine(const BiFidelityProblem& problem, const OptimizerConfig& cfg, std::uint64_t seed,
         Method method)
      : problem_(problem), cfg_(cfg), method_(method), rng_(seed) {
    problem.validate();
    cfg.validate(problem.dim());
    result_.ledger = EvaluationLedger(problem.lf_cost_ratio);
    result_.trace = RunTrace(std::string(method_name(method)), seed, config_digest(cfg));
    result_.ledger.preload_hf(problem.hf_preload);
    x_ = problem.start();
    fx_ = hf(x_);
    result_.trace.record(result_.ledger, fx_);
  }

  const BiFidelityProblem& problem() const { return problem_; }
  const OptimizerConfig& cfg() const { return cfg_; }
  EvaluationLedger& ledger() { return result_.ledger; }
  RngStream& rng() { return rng_; }
  const Vector& x() const { return x_; }
  std::int64_t k() const { return k_; }
  int dim() const { return problem_.dim(); }

  bool more() const {
    return result_.ledger.equivalent_hf() < cfg_.budget &&
           (cfg_.max_iterations == 0 || k_ < cfg_.max_iterations);
  }

  double hf(const Vector& p) { return counted_eval(problem_, result_.ledger, Fidelity::high, p); }

  /// f(x_k), re-evaluated when base reuse is off.
  double base() {
    if (!cfg_.reuse_base_value) fx_ = hf(x_);
    return fx_;
  }

  double increment(const Vector& p) const {
    return cfg_.fd_increment > 0.0 ? cfg_.fd_increment : default_increment(p);
  }

  double beta() const {
    return cfg_.linesearch.beta > 0.0 ? cfg_.linesearch.beta
                                      : static_cast<double>(cfg_.subspace_dim) / (2.0 * dim());
  }

  /// 1/L for full-gradient methods, l/(L D) for subspace methods, unless set.
  double fixed_step(bool subspace) const {
    if (cfg_.fixed_step > 0.0) return cfg_.fixed_step;
    if (!problem_.smoothness) {
      throw ConfigError(std::string(method_name(method_)) + ": fixed_step is 0 and problem '" +
                        problem_.name + "' declares no smoothness constant");
    }
    const double inv_l = 1.0 / *problem_.smoothness;
    return subspace ? inv_l * cfg_.subspace_dim / dim() : inv_l;
  }

  /// Lifted subspace gradient scaled per cfg.frame; resamples P up to three
  /// times on a zero estimate, then gives up.
  std::optional<Vector> subspace_gradient(int ell) {
    const double frame = cfg_.frame == FrameScaling::orthonormal ? static_cast<double>(ell) / dim() : 1.0;
    for (int attempt = 0; attempt <= kStationaryRetries; ++attempt) {
      const ProjectionMatrix P = sample_projection(dim(), ell, rng_);
      const double f0 = base();
      const GradientEstimate est =
          estimate_gradient(problem_, result_.ledger, x_, f0, P, increment(x_), cfg_.difference);
      if (!est.stationary()) return Vector(frame * est.lifted);
    }
    result_.stopped_early = true;
    return std::nullopt;
  }

  void accept(const Vector& next, double value, double step, double direction_norm) {
    x_ = next;
    fx_ = value;
    keep(step, direction_norm);
  }

  /// Records an iteration that left x_k unchanged.
  void keep(double step, double direction_norm) {
    result_.trace.record(result_.ledger, fx_);
    result_.iterations.push_back({k_, step, direction_norm, fx_, result_.ledger.hf_calls(),
                                  result_.ledger.lf_calls()});
    ++k_;
  }

  RunResult finish() {
    result_.final_point = x_;
    return std::move(result_);
  }

 private:
  const BiFidelityProblem& problem_;
  const OptimizerConfig& cfg_;
  Method method_;
  RngStream rng_;
  RunResult result_;
  Vector x_;
  double fx_ = 0.0;
  std::int64_t k_ = 0;
};

RunResult run_fixed_subspace(Engine& e, int ell, double step) {
  while (e.more()) {
    const auto vt = e.subspace_gradient(ell);
    if (!vt) break;
    const Vector next = e.x() - step * *vt;
    e.accept(next, e.hf(next), step, vt->norm());
  }
  return e.finish();
}

}  // namespace

RunResult run_bf_ssd(const BiFidelityProblem& problem, const OptimizerConfig& cfg,
                     std::uint64_t seed) {
  Engine e(problem, cfg, seed, Method::bf_ssd);
  LineSearchConfig ls = cfg.linesearch;
  ls.beta = e.beta();
  while (e.more()) {
    const auto vt = e.subspace_gradient(cfg.subspace_dim);
    if (!vt) break;
    const double norm = vt->norm();
    const Vector direction = cfg.normalize_direction ? Vector(-*vt / norm) : Vector(-*vt);
    const double scale =
        cfg.normalize_direction && ls.decrease_mode == DecreaseMode::magnitude ? norm : norm * norm;
    const double fx = e.base();
    const Surrogate1D s = build_surrogate(problem, e.ledger(), e.x(), direction,
                                          cfg.surrogate_knots, ls.alpha_max, fx);
    const BacktrackResult bt = bf_backtracking(s, problem, ls, e.ledger(), fx, scale);
    const Vector next = e.x() + bt.alpha * direction;
    e.accept(next, e.hf(next), bt.alpha, norm);
  }
  return e.finish();
}

RunResult run_hf_ssd(const BiFidelityProblem& problem, const OptimizerConfig& cfg,
                     std::uint64_t seed) {
  Engine e(problem, cfg, seed, Method::hf_ssd);
  LineSearchConfig ls = cfg.linesearch;
  ls.beta = e.beta();
  while (e.more()) {
    const auto vt = e.subspace_gradient(cfg.subspace_dim);
    if (!vt) break;
    const double fx = e.base();
    double alpha = 0.0;
    double value = fx;
    if (cfg.exact_line_search) {
      const ExactSearchResult r = exact_line_search(problem, e.ledger(), e.x(), *vt, ls.alpha_max);
      if (r.value <= fx) {
        alpha = r.alpha;
        value = r.value;
      }
    } else {
      const BacktrackResult bt = hf_backtracking(problem, e.ledger(), e.x(), *vt, fx, ls);
      // no sufficient decrease within M shrinks: stay put, keeping the method a descent method
      if (bt.satisfied) {
        alpha = bt.alpha;
        value = bt.value;
      }
    }
    if (alpha > 0.0) {
      e.accept(e.x() - alpha * *vt, value, alpha, vt->norm());
    } else {
      e.keep(0.0, vt->norm());
    }
  }
  return e.finish();
}

RunResult run_fs_ssd(const BiFidelityProblem& problem, const OptimizerConfig& cfg,
                     std::uint64_t seed) {
  Engine e(problem, cfg, seed, Method::fs_ssd);
  return run_fixed_subspace(e, cfg.subspace_dim, e.fixed_step(true));
}

RunResult run_gs(const BiFidelityProblem& problem, const OptimizerConfig& cfg, std::uint64_t seed) {
  Engine e(problem, cfg, seed, Method::gs);
  return run_fixed_subspace(e, 1, e.fixed_step(true));
}

RunResult run_vr_ssd(const BiFidelityProblem& problem, const OptimizerConfig& cfg,
                     std::uint64_t seed) {
  Engine e(problem, cfg, seed, Method::vr_ssd);
  const int ell = cfg.subspace_dim;
  const int epoch = cfg.vr_epoch_length > 0 ? cfg.vr_epoch_length : (e.dim() + ell - 1) / ell;
  const double step = e.fixed_step(true);
  while (e.more()) {
    const Vector anchor = e.x();
    const double f_anchor = e.base();
    const Vector mu = coordinate_gradient(problem, e.ledger(), anchor, f_anchor, e.increment(anchor));
    for (int inner = 0; inner < epoch && e.more(); ++inner) {
      // the correction term is always unbiased so that E[v~] = grad f(x_k)
      const ProjectionMatrix P = sample_projection(e.dim(), ell, e.rng());
      const GradientEstimate at_x = estimate_gradient(problem, e.ledger(), e.x(), e.base(), P,
                                                      e.increment(e.x()), cfg.difference);
      const GradientEstimate at_anchor = estimate_gradient(
          problem, e.ledger(), anchor, f_anchor, P, e.increment(anchor), cfg.difference);
      const Vector vt = P.entries * (at_x.projected - at_anchor.projected) + mu;
      const Vector next = e.x() - step * vt;
      e.accept(next, e.hf(next), step, vt.norm());
    }
  }
  return e.finish();
}

RunResult run_gd(const BiFidelityProblem& problem, const OptimizerConfig& cfg, std::uint64_t seed) {
  Engine e(problem, cfg, seed, Method::gd);
  const double step = e.fixed_step(false);
  while (e.more()) {
    const Vector g = coordinate_gradient(problem, e.ledger(), e.x(), e.base(), e.increment(e.x()));
    const Vector next = e.x() - step * g;
    e.accept(next, e.hf(next), step, g.norm());
  }
  return e.finish();
}

RunResult run_nag(const BiFidelityProblem& problem, const OptimizerConfig& cfg, std::uint64_t seed) {
  Engine e(problem, cfg, seed, Method::nag);
  const double step = e.fixed_step(false);
  Vector buffer = Vector::Zero(e.dim());
  while (e.more()) {
    const double t = static_cast<double>(e.k() + 1);
    const double mu =
        cfg.momentum_schedule == MomentumSchedule::constant ? cfg.momentum : (t - 1.0) / (t + 2.0);
    const Vector g = coordinate_gradient(problem, e.ledger(), e.x(), e.base(), e.increment(e.x()));
    buffer = mu * buffer + g;
    const Vector next = e.x() - step * (g + mu * buffer);
    e.accept(next, e.hf(next), step, g.norm());
  }
  return e.finish();
}

RunResult run_cd(const BiFidelityProblem& problem, const OptimizerConfig& cfg, std::uint64_t seed) {
  Engine e(problem, cfg, seed, Method::cd);
  const double step = e.fixed_step(false);
  while (e.more()) {
    const int i = static_cast<int>(e.k() % e.dim());
    const double fx = e.base();
    const double h = e.increment(e.x());
    Vector probe = e.x();
    probe[i] += h;
    const double partial = (e.hf(probe) - fx) / h;
    Vector next = e.x();
    next[i] -= step * partial;
    e.accept(next, e.hf(next), step, std::abs(partial));
  }
  return e.finish();
}

RunResult run_spsa(const BiFidelityProblem& problem, const OptimizerConfig& cfg,
                   std::uint64_t seed) {
  Engine e(problem, cfg, seed, Method::spsa);
  const SpsaGains& g = cfg.spsa;
  Vector delta(e.dim());
  while (e.more()) {
    const double k = static_cast<double>(e.k());
    const double ak = g.a / std::pow(g.A + k + 1.0, g.alpha);
    const double ck = g.c / std::pow(k + 1.0, g.gamma);
    for (int i = 0; i < e.dim(); ++i) delta[i] = e.rng().rademacher();
    const double plus = e.hf(e.x() + ck * delta);
    const double minus = e.hf(e.x() - ck * delta);
    // delta^{-1} = delta elementwise for Rademacher entries
    const Vector estimate = ((plus - minus) / (2.0 * ck)) * delta;
    const Vector next = e.x() - ak * estimate;
    e.accept(next, e.hf(next), ak, estimate.norm());
  }
  return e.finish();
}

RunResult run_optimizer(const BiFidelityProblem& problem, const OptimizerConfig& cfg,
                        std::uint64_t seed) {
  switch (cfg.method) {
    case Method::bf_ssd: return run_bf_ssd(problem, cfg, seed);
    case Method::hf_ssd: return run_hf_ssd(problem, cfg, seed);
    case Method::fs_ssd: return run_fs_ssd(problem, cfg, seed);
    case Method::vr_ssd: return run_vr_ssd(problem, cfg, seed);
    case Method::gd: return run_gd(problem, cfg, seed);
    case Method::nag: return run_nag(problem, cfg, seed);
    case Method::cd: return run_cd(problem, cfg, seed);
    case Method::spsa: return run_spsa(problem, cfg, seed);
    case Method::gs: return run_gs(problem, cfg, seed);
  }
  throw ConfigError("unhandled method");
}

}  // namespace bfssd
