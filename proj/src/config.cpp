#include "bfssd/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <memory>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "bfssd/problems.hpp"

namespace bfssd {

namespace {

const std::set<std::string> kExperimentKeys = {"name",   "trials",      "seed",   "budget", "grid",
                                               "methods", "plot_points", "log_y", "workers"};

const std::set<std::string> kProblemKeys = {
    "kind",     "dim",          "r_hf",        "r_lf",     "smoothness",      "features",
    "clusters", "lengthscale",  "ridge",       "inducing", "data_csv",        "feature_columns",
    "target_column", "rank",    "decay",       "lf_cost_ratio", "components", "subset_size"};

const std::set<std::string> kMethodKeys = {
    "subspace_dim",  "fixed_step",      "beta",          "shrink",
    "alpha_max",     "max_shrinks",     "decrease_mode", "surrogate_knots",
    "fd_increment",  "difference",      "spsa_a",        "spsa_A",
    "spsa_alpha",    "spsa_c",          "spsa_gamma",    "vr_epoch_length",
    "frame",         "normalize_direction", "momentum",  "momentum_schedule",
    "exact_line_search", "reuse_base_value", "max_iterations"};

const std::set<std::string>& schema_for(const std::string& section) {
  if (section == "experiment") return kExperimentKeys;
  if (section == "problem") return kProblemKeys;
  if (section == "defaults") return kMethodKeys;
  parse_method(section);  // throws for unknown sections
  return kMethodKeys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

/// Typed reads with errors that name the field.
class Reader {
 public:
  Reader(const ConfigDocument& doc, std::string section) : doc_(doc), section_(std::move(section)) {}

  bool has(const std::string& key) const { return doc_.has(section_, key); }

  double real(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const std::string text = doc_.get(section_, key);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(v)) {
      fail(key, "expected a number, got '" + text + "'");
    }
    return v;
  }

  long long integer(const std::string& key, long long fallback) const {
    if (!has(key)) return fallback;
    const std::string text = doc_.get(section_, key);
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(text.c_str(), &end, 10);
    if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE) {
      fail(key, "expected an integer, got '" + text + "'");
    }
    return v;
  }

  int int32(const std::string& key, int fallback) const {
    const long long v = integer(key, fallback);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
      fail(key, "value out of range");
    }
    return static_cast<int>(v);
  }

  std::uint64_t seed(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const std::string text = doc_.get(section_, key);
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
    if (text.empty() || text[0] == '-' || end != text.c_str() + text.size() || errno == ERANGE) {
      fail(key, "expected a non-negative integer, got '" + text + "'");
    }
    return v;
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    std::string text = doc_.get(section_, key);
    std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) { return std::tolower(c); });
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    fail(key, "expected true or false, got '" + text + "'");
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    return has(key) ? doc_.get(section_, key) : fallback;
  }

  template <typename E>
  E choice(const std::string& key, E fallback, const std::vector<std::pair<std::string, E>>& options) const {
    if (!has(key)) return fallback;
    const std::string value = doc_.get(section_, key);
    std::string valid;
    for (const auto& [name, e] : options) {
      if (name == value) return e;
      valid += (valid.empty() ? "" : ", ") + name;
    }
    fail(key, "unknown value '" + value + "'; expected one of " + valid);
  }

  [[noreturn]] void fail(const std::string& key, const std::string& why) const {
    throw ConfigError(section_ + "." + key + ": " + why);
  }

 private:
  const ConfigDocument& doc_;
  std::string section_;
};

void apply_method_section(const Reader& r, OptimizerConfig& c) {
  c.subspace_dim = r.int32("subspace_dim", c.subspace_dim);
  c.fixed_step = r.real("fixed_step", c.fixed_step);
  c.linesearch.beta = r.real("beta", c.linesearch.beta);
  c.linesearch.shrink = r.real("shrink", c.linesearch.shrink);
  c.linesearch.alpha_max = r.real("alpha_max", c.linesearch.alpha_max);
  c.linesearch.max_shrinks = r.int32("max_shrinks", c.linesearch.max_shrinks);
  c.linesearch.decrease_mode = r.choice<DecreaseMode>(
      "decrease_mode", c.linesearch.decrease_mode,
      {{"squared_magnitude", DecreaseMode::squared_magnitude}, {"magnitude", DecreaseMode::magnitude}});
  c.surrogate_knots = r.int32("surrogate_knots", c.surrogate_knots);
  c.fd_increment = r.real("fd_increment", c.fd_increment);
  c.difference = r.choice<DifferenceScheme>(
      "difference", c.difference,
      {{"forward", DifferenceScheme::forward}, {"central", DifferenceScheme::central}});
  c.spsa.a = r.real("spsa_a", c.spsa.a);
  c.spsa.A = r.real("spsa_A", c.spsa.A);
  c.spsa.alpha = r.real("spsa_alpha", c.spsa.alpha);
  c.spsa.c = r.real("spsa_c", c.spsa.c);
  c.spsa.gamma = r.real("spsa_gamma", c.spsa.gamma);
  c.vr_epoch_length = r.int32("vr_epoch_length", c.vr_epoch_length);
  c.frame = r.choice<FrameScaling>(
      "frame", c.frame, {{"orthonormal", FrameScaling::orthonormal}, {"unbiased", FrameScaling::unbiased}});
  c.normalize_direction = r.boolean("normalize_direction", c.normalize_direction);
  c.momentum = r.real("momentum", c.momentum);
  c.momentum_schedule = r.choice<MomentumSchedule>(
      "momentum_schedule", c.momentum_schedule,
      {{"constant", MomentumSchedule::constant}, {"decaying", MomentumSchedule::decaying}});
  c.exact_line_search = r.boolean("exact_line_search", c.exact_line_search);
  c.reuse_base_value = r.boolean("reuse_base_value", c.reuse_base_value);
  c.max_iterations = r.integer("max_iterations", c.max_iterations);
}

BiFidelityProblem build_kernel_ridge(const Reader& r, std::uint64_t seed) {
  const int dim = r.int32("dim", 1000);
  const std::string csv = r.text("data_csv", "");
  RegressionData data;
  if (csv.empty()) {
    data = make_clustered_regression(dim, r.int32("features", 8), r.int32("clusters", 12),
                                     RngStream::child_seed(seed, 1));
  } else {
    const auto features = split_list(r.text("feature_columns", ""));
    if (features.empty()) r.fail("feature_columns", "required when data_csv is set");
    if (!r.has("target_column")) r.fail("target_column", "required when data_csv is set");
    data = load_regression_csv(csv, features, r.text("target_column", ""), dim);
    if (data.points.rows() < dim) {
      r.fail("dim", "data_csv has only " + std::to_string(data.points.rows()) + " rows");
    }
  }
  KernelRidgeSpec spec;
  spec.gram = rbf_gram(data.points, r.real("lengthscale", 1.0));
  spec.targets = data.targets;
  spec.ridge = r.real("ridge", 1e-3);
  RngStream subset_rng(RngStream::child_seed(seed, 2));
  spec.nystrom_set = sample_subset(dim, r.int32("inducing", 10), subset_rng);
  auto model = std::make_shared<const KernelRidgeModel>(std::move(spec));
  return make_kernel_pair(model);
}

BiFidelityProblem build_lowrank(const Reader& r, std::uint64_t seed) {
  const int dim = r.int32("dim", 50);
  const double top = r.real("smoothness", 1.0);
  const double decay = r.real("decay", 0.8);
  if (dim < 1) r.fail("dim", "must be positive");
  if (!(top > 0.0)) r.fail("smoothness", "must be positive");
  if (!(decay > 0.0 && decay <= 1.0)) r.fail("decay", "must lie in (0, 1]");
  RngStream rng(RngStream::child_seed(seed, 3));
  Matrix gauss(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) gauss(i, j) = rng.normal();
  const Matrix q = Eigen::HouseholderQR<Matrix>(gauss).householderQ();
  Vector spectrum(dim);
  for (int i = 0; i < dim; ++i) spectrum[i] = top * std::pow(decay, i);
  Matrix a = q * spectrum.asDiagonal() * q.transpose();
  a = 0.5 * (a + a.transpose());
  Vector linear(dim);
  for (int i = 0; i < dim; ++i) linear[i] = rng.normal();
  return make_lowrank_quadratic_pair(a, linear, r.int32("rank", 5), r.real("lf_cost_ratio", 0.1))
      .problem;
}

BiFidelityProblem build_subsampled(const Reader& r, std::uint64_t seed) {
  const int dim = r.int32("dim", 20);
  const int n = r.int32("components", 200);
  if (dim < 1) r.fail("dim", "must be positive");
  if (n < 1) r.fail("components", "must be positive");
  RngStream rng(RngStream::child_seed(seed, 4));
  Matrix design(n, dim);
  Vector truth(dim);
  for (int j = 0; j < dim; ++j) truth[j] = rng.normal();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < dim; ++j) design(i, j) = rng.normal();
  Vector targets = design * truth;
  for (int i = 0; i < n; ++i) targets[i] += 0.1 * rng.normal();
  auto pair = make_subsampled_pair(least_squares_components(design, targets), dim,
                                   r.int32("subset_size", 20), RngStream::child_seed(seed, 5));
  // smoothness of the mean of 1/2 (z_i x - y_i)^2 is lambda_max(Z^T Z)/n
  Eigen::SelfAdjointEigenSolver<Matrix> eig(design.transpose() * design / n, Eigen::EigenvaluesOnly);
  pair.problem.smoothness = eig.eigenvalues().maxCoeff();
  return pair.problem;
}

}  // namespace

ConfigDocument ConfigDocument::parse(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  ConfigDocument doc;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("config: key '" + section + "' outside any section");
    for (const auto& [key, value] : body) doc.set(section, key, trim(value.data()));
  }
  return doc;
}

ConfigDocument ConfigDocument::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void ConfigDocument::check(const std::string& section, const std::string& key) const {
  const std::set<std::string>* schema = nullptr;
  try {
    schema = &schema_for(section);
  } catch (const ConfigError&) {
    throw ConfigError("unknown config section [" + section +
                      "]; expected experiment, problem, defaults or a method name");
  }
  if (!schema->count(key)) throw ConfigError("unknown config key '" + section + "." + key + "'");
}

void ConfigDocument::set(const std::string& section, const std::string& key, const std::string& value) {
  check(section, key);
  auto& rows = entries_[section];
  if (std::find(order_.begin(), order_.end(), section) == order_.end()) order_.push_back(section);
  for (auto& [k, v] : rows) {
    if (k == key) {
      v = value;
      return;
    }
  }
  rows.emplace_back(key, value);
}

void ConfigDocument::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  }
  const std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  const auto dot = key.find('.');
  if (dot != std::string::npos) {
    set(key.substr(0, dot), key.substr(dot + 1), value);
    return;
  }
  for (const char* section : {"experiment", "problem", "defaults"}) {
    if (schema_for(section).count(key)) {
      set(section, key, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

bool ConfigDocument::has(const std::string& section, const std::string& key) const {
  const auto it = entries_.find(section);
  if (it == entries_.end()) return false;
  return std::any_of(it->second.begin(), it->second.end(), [&](const auto& kv) { return kv.first == key; });
}

std::string ConfigDocument::get(const std::string& section, const std::string& key) const {
  const auto it = entries_.find(section);
  if (it == entries_.end()) return {};
  for (const auto& [k, v] : it->second)
    if (k == key) return v;
  return {};
}

std::string ConfigDocument::to_ini() const {
  std::ostringstream os;
  for (const auto& section : order_) {
    os << '[' << section << "]\n";
    for (const auto& [k, v] : entries_.at(section)) os << k << " = " << v << '\n';
    os << '\n';
  }
  return os.str();
}

BiFidelityProblem build_problem(const ConfigDocument& doc, std::uint64_t seed) {
  const Reader r(doc, "problem");
  const std::string kind = r.text("kind", "worst");
  if (kind == "worst") {
    return make_worst_pair(r.int32("dim", 1000), r.int32("r_hf", 100), r.int32("r_lf", 2),
                           r.real("smoothness", 20.0));
  }
  if (kind == "kernel_ridge") return build_kernel_ridge(r, seed);
  if (kind == "lowrank_quadratic") return build_lowrank(r, seed);
  if (kind == "subsampled_least_squares") return build_subsampled(r, seed);
  std::string valid;
  for (const auto& [name, _] : problem_kinds()) valid += (valid.empty() ? "" : ", ") + name;
  r.fail("kind", "unknown problem '" + kind + "'; expected one of " + valid);
}

OptimizerConfig build_method_config(const ConfigDocument& doc, Method method) {
  OptimizerConfig c;
  c.method = method;
  apply_method_section(Reader(doc, "defaults"), c);
  for (const auto& section : doc.sections()) {
    if (section == "experiment" || section == "problem" || section == "defaults") continue;
    if (parse_method(section) == method) apply_method_section(Reader(doc, section), c);
  }
  return c;
}

BuiltExperiment build_experiment(const ConfigDocument& doc) {
  const Reader r(doc, "experiment");
  BuiltExperiment out;
  ExperimentSpec& spec = out.spec;
  spec.name = r.text("name", "experiment");
  spec.trials = r.int32("trials", 10);
  spec.base_seed = r.seed("seed", 0);
  spec.budget = r.real("budget", 1000.0);
  spec.plot_points = r.int32("plot_points", 200);
  spec.workers = r.int32("workers", 0);
  out.log_y = r.boolean("log_y", true);

  for (const auto& item : split_list(r.text("grid", ""))) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (end != item.c_str() + item.size() || !std::isfinite(v)) {
      r.fail("grid", "entry '" + item + "' is not a number");
    }
    spec.grid.push_back(v);
  }
  if (spec.grid.empty()) spec.grid.push_back(spec.budget);

  std::vector<std::string> names = split_list(r.text("methods", ""));
  if (names.empty()) {
    for (Method m : all_methods()) names.emplace_back(method_name(m));
  }
  for (const auto& name : names) {
    Method m;
    try {
      m = parse_method(name);
    } catch (const ConfigError& e) {
      r.fail("methods", e.what());
    }
    spec.methods.push_back({std::string(method_name(m)), build_method_config(doc, m)});
  }

  spec.problem = build_problem(doc, spec.base_seed);
  spec.validate();
  return out;
}

std::vector<std::pair<std::string, std::string>> problem_kinds() {
  return {
      {"worst", "Nesterov's worst function; HF intrinsic dimension r_hf, LF r_lf (keys dim, r_hf, r_lf, smoothness)"},
      {"kernel_ridge", "dual kernel ridge regression with a Nystrom LF (keys dim, features, clusters, lengthscale, ridge, inducing, data_csv, feature_columns, target_column)"},
      {"lowrank_quadratic", "random PSD quadratic with a truncated-eigendecomposition LF (keys dim, rank, smoothness, decay, lf_cost_ratio)"},
      {"subsampled_least_squares", "least squares over all rows vs a fixed row subset (keys dim, components, subset_size)"},
  };
}

}  // namespace bfssd
