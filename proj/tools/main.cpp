// Command-line entry point: run experiments from INI configs, list the
// available problems and methods, and dump single-iteration surrogates.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "bfssd/config.hpp"
#include "bfssd/linesearch.hpp"
#include "bfssd/problems.hpp"
#include "bfssd/subspace.hpp"

namespace {

using namespace bfssd;

constexpr const char* kOutEnv = "BFSSD_OUT";

std::string default_out_dir() {
  const char* env = std::getenv(kOutEnv);
  return env && *env ? env : "results";
}

ConfigDocument load_with_overrides(const std::string& path, const std::vector<std::string>& sets) {
  ConfigDocument doc = ConfigDocument::load(path);
  for (const auto& s : sets) doc.apply_override(s);
  return doc;
}

Vector read_point(const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open point file '" + path + "'");
  std::stringstream text;
  text << in.rdbuf();
  std::string body = text.str();
  std::replace(body.begin(), body.end(), ',', ' ');
  std::istringstream tokens(body);
  std::vector<double> values;
  std::string cell;
  while (tokens >> cell) {
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size()) throw ConfigError(path + ": non-numeric entry '" + cell + "'");
    values.push_back(v);
  }
  if (static_cast<int>(values.size()) != dim) {
    throw ConfigError(path + ": expected " + std::to_string(dim) + " values, found " +
                      std::to_string(values.size()));
  }
  return Eigen::Map<Vector>(values.data(), dim);
}

int cmd_run(const std::string& config, const std::vector<std::string>& sets, const std::string& out,
            int workers, const std::string& seed) {
  ConfigDocument doc = load_with_overrides(config, sets);
  if (workers > 0) doc.set("experiment", "workers", std::to_string(workers));
  if (!seed.empty()) doc.set("experiment", "seed", seed);

  const BuiltExperiment built = build_experiment(doc);
  std::cerr << "experiment '" << built.spec.name << "': " << built.spec.methods.size()
            << " methods x " << built.spec.trials << " trials, budget " << built.spec.budget
            << ", problem '" << built.spec.problem.name << "' (D = " << built.spec.problem.dim()
            << ")\n";
  const ExperimentResult result = run_experiment(built.spec);
  const auto dir = write_experiment(result, out, built.log_y);
  std::ofstream echo(dir / "config.ini");
  echo << doc.to_ini();
  if (!echo) throw RunAbort("cannot write " + (dir / "config.ini").string());
  std::cout << emit_table(result);
  std::cerr << "wrote " << dir.string() << "\n";
  return 0;
}

int cmd_inspect(const std::string& config, const std::vector<std::string>& sets,
                const std::string& point_file, int points, const std::string& out,
                const std::string& seed_text) {
  const ConfigDocument doc = load_with_overrides(config, sets);
  std::uint64_t seed = 0;
  if (!seed_text.empty()) {
    seed = std::stoull(seed_text);
  } else if (doc.has("experiment", "seed")) {
    seed = std::stoull(doc.get("experiment", "seed"));
  }
  const BiFidelityProblem problem = build_problem(doc, seed);
  const OptimizerConfig cfg = build_method_config(doc, Method::bf_ssd);
  cfg.validate(problem.dim());
  const Vector x = point_file.empty() ? problem.start() : read_point(point_file, problem.dim());

  EvaluationLedger ledger(problem.lf_cost_ratio);
  RngStream rng(seed);
  const double fx = counted_eval(problem, ledger, Fidelity::high, x);
  const ProjectionMatrix P = sample_projection(problem.dim(), cfg.subspace_dim, rng);
  const double h = cfg.fd_increment > 0.0 ? cfg.fd_increment : default_increment(x);
  const GradientEstimate est = estimate_gradient(problem, ledger, x, fx, P, h, cfg.difference);
  if (est.stationary()) throw RunAbort("gradient estimate is zero at the supplied point");
  const double frame =
      cfg.frame == FrameScaling::orthonormal ? static_cast<double>(cfg.subspace_dim) / problem.dim() : 1.0;
  const double norm = frame * est.magnitude;
  const Vector direction = cfg.normalize_direction ? Vector(-est.direction) : Vector(-frame * est.lifted);

  LineSearchConfig ls = cfg.linesearch;
  if (ls.beta <= 0.0) ls.beta = static_cast<double>(cfg.subspace_dim) / (2.0 * problem.dim());
  const Surrogate1D s = build_surrogate(problem, ledger, x, direction, cfg.surrogate_knots, ls.alpha_max, fx);
  const double scale =
      cfg.normalize_direction && ls.decrease_mode == DecreaseMode::magnitude ? norm : norm * norm;
  const BacktrackResult bt = bf_backtracking(s, problem, ls, ledger, fx, scale);

  std::ostringstream csv;
  write_surrogate_csv(csv, s, problem, points);
  if (out.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream file(out);
    file << csv.str();
    if (!file) throw RunAbort("cannot write " + out);
  }
  std::cerr << "rho = " << s.rho() << ", alpha = " << bt.alpha << " after " << bt.shrinks
            << " shrinks (armijo " << (bt.satisfied ? "satisfied" : "not satisfied") << "), "
            << ledger.hf_calls() << " HF + " << ledger.lf_calls() << " LF calls\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bi-fidelity stochastic subspace descent experiments"};
  app.require_subcommand(1);

  std::string config;
  std::vector<std::string> sets;
  std::string out = default_out_dir();
  int workers = 0;
  std::string seed;

  auto* run = app.add_subcommand("run", "run the experiment described by a config file");
  run->add_option("--config", config, "INI experiment config")->required()->check(CLI::ExistingFile);
  run->add_option("--set", sets, "override, section.key=value or key=value (repeatable)");
  run->add_option("--out", out, std::string("output directory (default $") + kOutEnv + " or results)");
  run->add_option("--workers", workers, "parallel trial workers")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "base seed, overrides experiment.seed");

  app.add_subcommand("list-problems", "print the problem kinds a config may use");
  app.add_subcommand("list-methods", "print the optimizer names");

  std::string point;
  std::string dump;
  int points = 101;
  auto* inspect = app.add_subcommand("inspect-surrogate",
                                     "run one BF-SSD iteration and dump the surrogate along the search ray");
  inspect->add_option("--config", config, "INI experiment config")->required()->check(CLI::ExistingFile);
  inspect->add_option("--set", sets, "override (repeatable)");
  inspect->add_option("--point", point, "file with D comma- or whitespace-separated values");
  inspect->add_option("--points", points, "grid points along [0, alpha_max]")->check(CLI::Range(2, 1000000));
  inspect->add_option("--out", dump, "CSV destination (default stdout)");
  inspect->add_option("--seed", seed, "seed for the projection");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*run) return cmd_run(config, sets, out, workers, seed);
    if (app.got_subcommand("list-problems")) {
      for (const auto& [kind, text] : problem_kinds()) std::cout << kind << "\t" << text << "\n";
      return 0;
    }
    if (app.got_subcommand("list-methods")) {
      for (Method m : all_methods()) std::cout << method_name(m) << "\n";
      return 0;
    }
    if (*inspect) return cmd_inspect(config, sets, point, points, dump, seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
