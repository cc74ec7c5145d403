#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "bfssd/core.hpp"
#include "bfssd/optimizers.hpp"

/// \file bench.hpp
/// Seeded multi-trial experiments, per-grid statistics and their CSV and SVG
/// renderings.

namespace bfssd {

struct MethodEntry {
  std::string label;  ///< row name in tables and plots
  OptimizerConfig config;
};

struct ExperimentSpec {
  std::string name = "experiment";
  BiFidelityProblem problem;
  std::vector<MethodEntry> methods;
  int trials = 10;
  std::uint64_t base_seed = 0;
  /// Overrides every method's budget.
  double budget = 1000.0;
  /// Table columns; strictly increasing.
  std::vector<double> grid;
  /// Resolution of the plotted curves.
  int plot_points = 200;
  /// Parallel trial workers; 0 uses the OpenMP default.
  int workers = 0;

  void validate() const;
};

/// Per grid point statistics of best_value across trials. `std` is the
/// population standard deviation. NaN where no trial has a checkpoint yet.
struct CurveSummary {
  std::vector<double> grid;
  std::vector<double> mean;
  std::vector<double> std;
  std::vector<double> min;
  std::vector<double> max;
};

struct MethodOutcome {
  std::string label;
  CurveSummary table;  ///< on spec.grid
  CurveSummary curve;  ///< on the dense plotting grid
  std::vector<RunResult> runs;  ///< indexed by trial
};

struct ExperimentResult {
  std::string name;
  std::vector<MethodOutcome> methods;

  /// Throws std::out_of_range for unknown labels.
  const MethodOutcome& at(const std::string& label) const;
};

/// Trial t of every method runs with seed RngStream::child_seed(base_seed, t).
/// A failing run aborts the experiment with a RunAbort naming method and seed.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// best_value of the last checkpoint with equiv_hf <= N (NaN when none).
double value_at(const RunTrace& trace, double spend);
std::vector<double> resample(const RunTrace& trace, const std::vector<double>& grid);
CurveSummary summarize(const std::vector<RunTrace>& traces, const std::vector<double>& grid);

/// One row per method: `method,mean@N,std@N,...` with 4 decimals.
std::string emit_table(const ExperimentResult& result);
/// `method,N,mean,std,min,max` at full precision.
std::string emit_summary_csv(const ExperimentResult& result);
/// `equiv_hf,best_value` rows of one trace.
std::string emit_trace_csv(const RunTrace& trace);

/// Mean line and min-max band per method. Throws std::invalid_argument
/// ("nothing to plot") for an empty result.
std::string emit_convergence_plot(const ExperimentResult& result, bool log_y,
                                  const std::string& title = {});

/// Writes `<out>/<name>/<label>/trial_<t>.csv`, `summary.csv`, `table.csv` and
/// `curves.svg`. Returns the experiment directory.
std::filesystem::path write_experiment(const ExperimentResult& result,
                                       const std::filesystem::path& out_dir, bool log_y);

}  // namespace bfssd
