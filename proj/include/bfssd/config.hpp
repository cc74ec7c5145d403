#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "bfssd/bench.hpp"

/// \file config.hpp
/// Declarative experiment configuration: an INI document with the sections
/// [experiment], [problem], [defaults] (applied to every method) and one
/// optional section per method name holding that method's overrides.

namespace bfssd {

class ConfigDocument {
 public:
  /// Throws ConfigError on I/O or syntax errors and on unknown sections or keys.
  static ConfigDocument load(const std::filesystem::path& path);
  static ConfigDocument parse(const std::string& text);

  /// `section.key=value`, or a bare `key=value` resolved against
  /// [experiment], [problem] and [defaults] in that order.
  void apply_override(const std::string& assignment);
  void set(const std::string& section, const std::string& key, const std::string& value);

  bool has(const std::string& section, const std::string& key) const;
  /// Empty string when absent.
  std::string get(const std::string& section, const std::string& key) const;
  const std::vector<std::string>& sections() const { return order_; }

  /// Canonical INI text; parsing it yields an equal document.
  std::string to_ini() const;

  bool operator==(const ConfigDocument&) const = default;

 private:
  void check(const std::string& section, const std::string& key) const;

  std::vector<std::string> order_;
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> entries_;
};

struct BuiltExperiment {
  ExperimentSpec spec;
  bool log_y = true;
};

/// Builds the problem from [problem]; `seed` drives synthetic data and
/// Nystrom subset selection.
BiFidelityProblem build_problem(const ConfigDocument& doc, std::uint64_t seed);

/// Method config: built-in defaults, then [defaults], then the method's section.
OptimizerConfig build_method_config(const ConfigDocument& doc, Method method);

BuiltExperiment build_experiment(const ConfigDocument& doc);

/// (kind, description) for every problem kind accepted in [problem].
std::vector<std::pair<std::string, std::string>> problem_kinds();

}  // namespace bfssd
