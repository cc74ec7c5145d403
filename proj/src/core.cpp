#include "bfssd/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bfssd {

Vector BiFidelityProblem::start() const {
  if (initial_point.size() == 0) return Vector::Zero(dim());
  return initial_point;
}

void BiFidelityProblem::validate() const {
  if (hf.dim <= 0) throw ConfigError("problem '" + name + "': dimension must be positive");
  if (hf.dim != lf.dim) {
    throw ConfigError("problem '" + name + "': HF and LF dimensions differ (" +
                      std::to_string(hf.dim) + " vs " + std::to_string(lf.dim) + ")");
  }
  if (!hf.eval || !lf.eval) throw ConfigError("problem '" + name + "': missing objective");
  if (!(lf_cost_ratio > 0.0)) throw ConfigError("problem '" + name + "': lf_cost_ratio must be > 0");
  if (initial_point.size() != 0 && initial_point.size() != hf.dim) {
    throw ConfigError("problem '" + name + "': initial point has wrong dimension");
  }
  if (hf_preload < 0) throw ConfigError("problem '" + name + "': hf_preload must be >= 0");
}

EvaluationLedger::EvaluationLedger(double lf_cost_ratio) : lf_cost_ratio_(lf_cost_ratio) {
  if (!(lf_cost_ratio > 0.0)) throw ConfigError("lf_cost_ratio must be > 0");
}

void EvaluationLedger::count(Fidelity fidelity) {
  if (fidelity == Fidelity::high) {
    ++hf_calls_;
  } else {
    ++lf_calls_;
  }
}

void EvaluationLedger::preload_hf(std::int64_t calls) {
  if (calls < 0) throw ConfigError("preload must be non-negative");
  hf_calls_ += calls;
}

double EvaluationLedger::equivalent_hf() const {
  return static_cast<double>(hf_calls_) + static_cast<double>(lf_calls_) * lf_cost_ratio_;
}

namespace {

std::string describe_point(const Vector& x) {
  std::ostringstream os;
  os.precision(17);
  os << "[";
  const Eigen::Index shown = std::min<Eigen::Index>(x.size(), 8);
  for (Eigen::Index i = 0; i < shown; ++i) os << (i ? ", " : "") << x[i];
  if (shown < x.size()) os << ", ... (" << x.size() << " entries)";
  os << "]";
  return os.str();
}

}  // namespace

double counted_eval(const BiFidelityProblem& problem, EvaluationLedger& ledger,
                    Fidelity fidelity, const Vector& x) {
  const Objective& obj = fidelity == Fidelity::high ? problem.hf : problem.lf;
  ledger.count(fidelity);
  const double value = obj(x);
  if (!std::isfinite(value)) {
    throw RunAbort(std::string(fidelity == Fidelity::high ? "HF" : "LF") + " objective of '" +
                   problem.name + "' returned a non-finite value at x = " + describe_point(x));
  }
  return value;
}

RunTrace::RunTrace(std::string method, std::uint64_t seed, std::string config_digest)
    : method_(std::move(method)), seed_(seed), config_digest_(std::move(config_digest)) {}

void RunTrace::record(const EvaluationLedger& ledger, double observed_hf_value) {
  const double spend = ledger.equivalent_hf();
  if (checkpoints_.empty()) {
    checkpoints_.push_back({spend, observed_hf_value});
    return;
  }
  Checkpoint& last = checkpoints_.back();
  const double best = std::min(last.best_value, observed_hf_value);
  if (spend <= last.equiv_hf) {
    last.best_value = best;
  } else {
    checkpoints_.push_back({spend, best});
  }
}

double RunTrace::best() const {
  if (checkpoints_.empty()) throw std::logic_error("empty trace has no best value");
  return checkpoints_.back().best_value;
}

RngStream::RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

std::uint64_t RngStream::child_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over a golden-ratio stride
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double RngStream::normal() { return normal_(engine_); }

double RngStream::uniform() { return uniform_(engine_); }

double RngStream::rademacher() { return (engine_() >> 63) ? 1.0 : -1.0; }

std::size_t RngStream::index(std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

}  // namespace bfssd
