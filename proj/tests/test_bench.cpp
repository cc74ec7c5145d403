#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "bfssd/bench.hpp"
#include "helpers.hpp"

using namespace bfssd;

namespace {

RunTrace make_trace(std::initializer_list<std::pair<double, double>> points) {
  EvaluationLedger ledger(1.0);
  RunTrace trace("T", 0);
  double spent = 0.0;
  for (auto [n, v] : points) {
    while (spent < n) {
      ledger.count(Fidelity::high);
      spent += 1.0;
    }
    trace.record(ledger, v);
  }
  return trace;
}

ExperimentSpec small_spec() {
  ExperimentSpec spec;
  spec.name = "small";
  spec.problem = testing::proportional_quadratic(8, Vector::Constant(8, 1.5));
  for (Method m : {Method::bf_ssd, Method::hf_ssd}) {
    OptimizerConfig cfg;
    cfg.method = m;
    cfg.subspace_dim = 2;
    spec.methods.push_back({std::string(method_name(m)), cfg});
  }
  spec.trials = 3;
  spec.budget = 200.0;
  spec.grid = {10.0, 100.0, 200.0};
  spec.plot_points = 20;
  return spec;
}

}  // namespace

TEST_CASE("value_at carries the last observation forward") {
  const auto t = make_trace({{1, 5.0}, {4, 3.0}, {10, 1.0}});
  CHECK(std::isnan(value_at(t, 0.5)));
  CHECK(value_at(t, 1.0) == 5.0);
  CHECK(value_at(t, 3.9) == 5.0);
  CHECK(value_at(t, 4.0) == 3.0);
  CHECK(value_at(t, 1e9) == 1.0);
  const auto r = resample(t, {2.0, 5.0, 20.0});
  CHECK(r == std::vector<double>{5.0, 3.0, 1.0});
}

TEST_CASE("summarize: population statistics per grid point") {
  const auto a = make_trace({{1, 4.0}, {5, 2.0}});
  const auto b = make_trace({{1, 6.0}, {5, 4.0}});
  const auto s = summarize({a, b}, {1.0, 5.0});
  CHECK(s.mean == std::vector<double>{5.0, 3.0});
  CHECK(s.std == std::vector<double>{1.0, 1.0});
  CHECK(s.min == std::vector<double>{4.0, 2.0});
  CHECK(s.max == std::vector<double>{6.0, 4.0});
  const auto same = summarize({a, a, a}, {1.0});
  CHECK(same.std[0] == 0.0);
  const auto early = summarize({a}, {0.5});
  CHECK(std::isnan(early.mean[0]));
}

TEST_CASE("experiment: trial seeds, result shape and determinism") {
  const auto spec = small_spec();
  const auto r1 = run_experiment(spec);
  const auto r2 = run_experiment(spec);
  REQUIRE(r1.methods.size() == 2);
  const auto& bf = r1.at("BF-SSD");
  REQUIRE(bf.runs.size() == 3);
  for (int t = 0; t < 3; ++t) {
    CHECK(bf.runs[t].trace.seed() == RngStream::child_seed(spec.base_seed, t));
    CHECK(bf.runs[t].trace == r2.at("BF-SSD").runs[t].trace);
  }
  CHECK(bf.table.grid == spec.grid);
  CHECK(bf.curve.grid.size() == 20);
  CHECK(bf.table.mean == r2.at("BF-SSD").table.mean);
  CHECK_THROWS_AS(r1.at("nope"), std::out_of_range);
}

TEST_CASE("experiment: worker count does not change results") {
  auto spec = small_spec();
  spec.workers = 1;
  const auto serial = run_experiment(spec);
  spec.workers = 4;
  const auto parallel = run_experiment(spec);
  CHECK(emit_summary_csv(serial) == emit_summary_csv(parallel));
}

TEST_CASE("experiment: failing run names method and seed") {
  auto spec = small_spec();
  spec.problem.hf = {8, [](const Vector& x) { return x[0] > 1.0 ? std::nan("") : x.squaredNorm(); }};
  spec.problem.initial_point = Vector::Constant(8, 0.5);
  spec.problem.initial_point[0] = 0.999999;
  try {
    run_experiment(spec);
    FAIL("expected RunAbort");
  } catch (const RunAbort& e) {
    const std::string msg = e.what();
    CHECK(msg.find("seed") != std::string::npos);
    CHECK(msg.find("SSD") != std::string::npos);
  }
}

TEST_CASE("experiment spec validation") {
  auto spec = small_spec();
  CHECK_NOTHROW(spec.validate());
  spec.grid = {10.0, 5.0};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = small_spec();
  spec.trials = 0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = small_spec();
  spec.methods.clear();
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("emitters: table, csv and svg") {
  const auto result = run_experiment(small_spec());
  const std::string table = emit_table(result);
  CHECK(table.rfind("method,mean@10,std@10,mean@100,std@100,mean@200,std@200\n", 0) == 0);
  CHECK(table.find("\nBF-SSD,") != std::string::npos);
  const std::string summary = emit_summary_csv(result);
  CHECK(summary.rfind("method,N,mean,std,min,max\n", 0) == 0);
  const std::string trace = emit_trace_csv(result.methods[0].runs[0].trace);
  CHECK(trace.rfind("equiv_hf,best_value\n1,", 0) == 0);
  const std::string svg = emit_convergence_plot(result, true, "t");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("HF-SSD") != std::string::npos);
  CHECK_THROWS_AS(emit_convergence_plot(ExperimentResult{}, false), std::invalid_argument);
}

TEST_CASE("write_experiment lays out one directory per method") {
  const auto result = run_experiment(small_spec());
  const auto out = std::filesystem::temp_directory_path() / "bfssd_bench_test";
  std::filesystem::remove_all(out);
  const auto dir = write_experiment(result, out, false);
  CHECK(dir == out / "small");
  CHECK(std::filesystem::exists(dir / "summary.csv"));
  CHECK(std::filesystem::exists(dir / "table.csv"));
  CHECK(std::filesystem::exists(dir / "curves.svg"));
  CHECK(std::filesystem::exists(dir / "BF-SSD" / "trial_2.csv"));
  std::filesystem::remove_all(out);
}
