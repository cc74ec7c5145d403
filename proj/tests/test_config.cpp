#include <doctest.h>

#include "bfssd/config.hpp"
#include "helpers.hpp"

using namespace bfssd;

namespace {

const char* kBasic = R"(
[experiment]
name = basic
trials = 2
seed = 4
budget = 500
grid = 100, 500
methods = BF-SSD, HF-SSD, GD

[problem]
kind = worst
dim = 50
r_hf = 10
r_lf = 2
smoothness = 20

[defaults]
subspace_dim = 5
alpha_max = 0.15

[HF-SSD]
alpha_max = 0.03
exact_line_search = true
)";

}  // namespace

TEST_CASE("config: parse, query and round-trip") {
  const auto doc = ConfigDocument::parse(kBasic);
  CHECK(doc.get("experiment", "name") == "basic");
  CHECK(doc.has("HF-SSD", "alpha_max"));
  CHECK_FALSE(doc.has("BF-SSD", "alpha_max"));
  CHECK(doc.get("BF-SSD", "alpha_max").empty());
  CHECK(ConfigDocument::parse(doc.to_ini()) == doc);
}

TEST_CASE("config: unknown sections and keys are rejected") {
  CHECK_THROWS_AS(ConfigDocument::parse("[bogus]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(ConfigDocument::parse("[problem]\nkinds = worst\n"), ConfigError);
  CHECK_THROWS_AS(ConfigDocument::parse("[HF-SSD]\nkind = worst\n"), ConfigError);
  CHECK_THROWS_AS(ConfigDocument::parse("[experiment\n"), ConfigError);
}

TEST_CASE("config: overrides resolve bare keys") {
  auto doc = ConfigDocument::parse(kBasic);
  doc.apply_override("trials=7");
  doc.apply_override("dim=60");
  doc.apply_override("shrink=0.8");
  doc.apply_override("BF-SSD.surrogate_knots=3");
  CHECK(doc.get("experiment", "trials") == "7");
  CHECK(doc.get("problem", "dim") == "60");
  CHECK(doc.get("defaults", "shrink") == "0.8");
  CHECK(doc.get("BF-SSD", "surrogate_knots") == "3");
  CHECK_THROWS_AS(doc.apply_override("nonsense=1"), ConfigError);
  CHECK_THROWS_AS(doc.apply_override("no_equals_sign"), ConfigError);
}

TEST_CASE("config: method configs layer defaults under method sections") {
  const auto doc = ConfigDocument::parse(kBasic);
  const auto bf = build_method_config(doc, Method::bf_ssd);
  const auto hf = build_method_config(doc, Method::hf_ssd);
  CHECK(bf.subspace_dim == 5);
  CHECK(bf.linesearch.alpha_max == 0.15);
  CHECK(hf.linesearch.alpha_max == 0.03);
  CHECK(hf.exact_line_search);
  CHECK_FALSE(bf.exact_line_search);
}

TEST_CASE("config: experiment assembly") {
  const auto built = build_experiment(ConfigDocument::parse(kBasic));
  CHECK(built.spec.name == "basic");
  CHECK(built.spec.trials == 2);
  CHECK(built.spec.base_seed == 4);
  CHECK(built.spec.grid == std::vector<double>{100.0, 500.0});
  REQUIRE(built.spec.methods.size() == 3);
  CHECK(built.spec.methods[2].label == "GD");
  CHECK(built.spec.methods[2].config.method == Method::gd);
  CHECK(built.spec.problem.dim() == 50);
  CHECK(built.spec.problem.lf_cost_ratio == doctest::Approx(0.2));
}

TEST_CASE("config: malformed values name the key") {
  auto doc = ConfigDocument::parse(kBasic);
  doc.set("experiment", "trials", "many");
  try {
    build_experiment(doc);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("trials") != std::string::npos);
  }
  doc = ConfigDocument::parse(kBasic);
  doc.set("experiment", "methods", "BF-SSD, ADAM");
  CHECK_THROWS_AS(build_experiment(doc), ConfigError);
  doc = ConfigDocument::parse(kBasic);
  doc.set("problem", "kind", "rosenbrock");
  CHECK_THROWS_AS(build_experiment(doc), ConfigError);
}

TEST_CASE("config: every problem kind builds") {
  const std::vector<std::string> bodies{
      "kind = worst\ndim = 20\nr_hf = 10\nr_lf = 2\n",
      "kind = kernel_ridge\ndim = 40\nfeatures = 3\nclusters = 3\ninducing = 4\n",
      "kind = lowrank_quadratic\ndim = 12\nrank = 3\n",
      "kind = subsampled_least_squares\ndim = 6\ncomponents = 30\nsubset_size = 3\n",
  };
  for (const auto& body : bodies) {
    CAPTURE(body);
    const auto doc = ConfigDocument::parse("[problem]\n" + body);
    const auto p = build_problem(doc, 1);
    CHECK_NOTHROW(p.validate());
    CHECK(std::isfinite(p.hf(p.start())));
  }
  CHECK(problem_kinds().size() == 4);
}

TEST_CASE("config: kernel problem is a pure function of the seed") {
  const auto doc = ConfigDocument::parse("[problem]\nkind = kernel_ridge\ndim = 30\ninducing = 3\n");
  const auto a = build_problem(doc, 5);
  const auto b = build_problem(doc, 5);
  const auto c = build_problem(doc, 6);
  const Vector x = Vector::LinSpaced(30, -0.5, 0.5);
  CHECK(a.hf(x) == b.hf(x));
  CHECK(a.lf(x) == b.lf(x));
  CHECK(a.hf(x) != c.hf(x));
}
