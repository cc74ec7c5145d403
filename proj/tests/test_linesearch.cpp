#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bfssd/linesearch.hpp"
#include "helpers.hpp"

using namespace bfssd;

namespace {

// 1/2 |x|^2 on R^1 with LF = 1/2 HF.
BiFidelityProblem scalar_pair() {
  auto p = testing::half_norm(1);
  p.lf = {1, [](const Vector& x) { return 0.25 * x.squaredNorm(); }};
  p.lf_cost_ratio = 0.5;
  return p;
}

Vector scalar(double v) { return Vector::Constant(1, v); }

}  // namespace

TEST_CASE("surrogate: knot values and call counts") {
  auto p = scalar_pair();
  EvaluationLedger ledger(p.lf_cost_ratio);
  const Vector x = scalar(2.0);
  const auto s = build_surrogate(p, ledger, x, scalar(-1.0), 4, 2.0, p.hf(x));
  CHECK(ledger.hf_calls() == 4);
  CHECK(ledger.lf_calls() == 5);
  CHECK(s.rho() == 2.0);
  REQUIRE(s.intervals() == 4);
  for (const auto& k : s.knots()) {
    const double y = 2.0 - k.alpha;
    CHECK(k.hf_value == doctest::Approx(0.5 * y * y));
    CHECK(k.psi == doctest::Approx(0.0));
  }
  CHECK(s.knots().back().alpha == 2.0);
}

TEST_CASE("surrogate: exact when HF is a multiple of LF") {
  auto p = scalar_pair();
  EvaluationLedger ledger(p.lf_cost_ratio);
  const Vector x = scalar(2.0);
  const auto s = build_surrogate(p, ledger, x, scalar(-1.0), 1, 3.0, p.hf(x));
  RngStream rng(1);
  for (int i = 0; i < 100; ++i) {
    const double a = 3.0 * rng.uniform();
    CHECK(eval_surrogate(s, p, ledger, a) == doctest::Approx(0.5 * (2.0 - a) * (2.0 - a)));
  }
}

TEST_CASE("surrogate: correction interpolates linearly between knots") {
  auto p = testing::single(1, [](const Vector& x) { return std::exp(x[0]); });
  p.lf = {1, [](const Vector&) { return 1.0; }};
  EvaluationLedger ledger(1.0);
  const Vector x = scalar(0.0);
  const auto s = build_surrogate(p, ledger, x, scalar(1.0), 2, 1.0, 1.0);
  // rho = 1, psi_j = e^{alpha_j} - 1 at alpha in {0, 0.5, 1}
  const double psi_mid = std::exp(0.5) - 1.0;
  const double psi_end = std::exp(1.0) - 1.0;
  CHECK(s.correction(0.25) == doctest::Approx(0.5 * psi_mid));
  CHECK(s.correction(0.75) == doctest::Approx(0.5 * (psi_mid + psi_end)));
  CHECK(s.correction(1.0) == doctest::Approx(psi_end));
}

TEST_CASE("surrogate: knots are free, interior points cost one LF call") {
  auto p = scalar_pair();
  EvaluationLedger ledger(p.lf_cost_ratio);
  const Vector x = scalar(1.0);
  const auto s = build_surrogate(p, ledger, x, scalar(-1.0), 2, 1.0, p.hf(x));
  const auto hf = ledger.hf_calls();
  const auto lf = ledger.lf_calls();
  CHECK(eval_surrogate(s, p, ledger, 0.5) == s.knots()[1].hf_value);
  CHECK(ledger.lf_calls() == lf);
  eval_surrogate(s, p, ledger, 0.3);
  CHECK(ledger.lf_calls() == lf + 1);
  CHECK(ledger.hf_calls() == hf);
  CHECK_THROWS_AS(eval_surrogate(s, p, ledger, 1.5), std::out_of_range);
  CHECK_THROWS_AS(eval_surrogate(s, p, ledger, -0.1), std::out_of_range);
}

TEST_CASE("surrogate: rho falls back to zero when LF vanishes at x") {
  auto p = testing::half_norm(2);
  EvaluationLedger ledger(1.0);
  const auto s = build_surrogate(p, ledger, Vector::Zero(2), Vector::Ones(2), 1, 1.0, 0.0);
  CHECK(s.rho() == 0.0);
}

TEST_CASE("surrogate: tent error never exceeds W alpha_max / (2n)") {
  const Vector base = Vector::Constant(3, 0.4);
  const Vector dir = Vector::LinSpaced(3, -1.0, 0.5);
  RngStream rng(2);
  for (int n : {1, 3, 5}) {
    const double alpha_max = 0.8;
    const double width = 2.5;
    auto p = testing::tent_pair(base, dir, width, alpha_max / n);
    EvaluationLedger ledger(p.lf_cost_ratio);
    const auto s = build_surrogate(p, ledger, base, dir, n, alpha_max, p.hf(base));
    const double bound = width * alpha_max / (2.0 * n);
    for (int i = 0; i < 200; ++i) {
      const double a = alpha_max * rng.uniform();
      const double err = std::abs(eval_surrogate(s, p, ledger, a) - p.hf(base + a * dir));
      REQUIRE(err <= bound * (1.0 + 1e-12) + 1e-12);
    }
    // Midway between knots the tent peaks and the bound is attained.
    const double mid = 0.5 * alpha_max / n;
    CHECK(std::abs(eval_surrogate(s, p, ledger, mid) - p.hf(base + mid * dir)) ==
          doctest::Approx(bound).epsilon(1e-9));
  }
}

TEST_CASE("bf backtracking: hand-computed shrink sequence") {
  // phi(alpha) = 1/2 (2 - alpha)^2 exactly. With beta = 0.25 and scale 2 a
  // step passes when 0.5 (2 - a)^2 <= 2 - 0.5 a.
  // a = 4: 2 <= 0 fails; a = 2: 0 <= 1 passes.
  auto p = scalar_pair();
  EvaluationLedger ledger(p.lf_cost_ratio);
  const Vector x = scalar(2.0);
  const auto s = build_surrogate(p, ledger, x, scalar(-1.0), 1, 4.0, 2.0);
  LineSearchConfig cfg{.beta = 0.25, .shrink = 0.5, .alpha_max = 4.0, .max_shrinks = 10};
  const auto hf_before = ledger.hf_calls();
  const auto r = bf_backtracking(s, p, cfg, ledger, 2.0, 2.0);
  CHECK(r.satisfied);
  CHECK(r.alpha == 2.0);
  CHECK(r.shrinks == 1);
  CHECK(r.value == doctest::Approx(0.0));
  CHECK(ledger.hf_calls() == hf_before);
}

TEST_CASE("bf backtracking: exhaustion returns c^M alpha_max unsatisfied") {
  auto p = testing::single(1, [](const Vector& x) { return x[0]; });
  EvaluationLedger ledger(1.0);
  // Ascent direction: Armijo can never hold.
  const auto s = build_surrogate(p, ledger, scalar(1.0), scalar(1.0), 1, 1.0, 1.0);
  LineSearchConfig cfg{.beta = 0.1, .shrink = 0.5, .alpha_max = 1.0, .max_shrinks = 3};
  const auto r = bf_backtracking(s, p, cfg, ledger, 1.0, 1.0);
  CHECK_FALSE(r.satisfied);
  CHECK(r.shrinks == 3);
  CHECK(r.alpha == 0.125);
}

TEST_CASE("hf backtracking: hand-computed example") {
  // f(2 - 2a) = 2 (1 - a)^2 against 2 - 4 beta a with beta = 1/2.
  // a = 1.5: 0.5 <= -1 fails; a = 0.75: 0.125 <= 0.5 passes.
  auto p = testing::half_norm(1);
  EvaluationLedger ledger(1.0);
  LineSearchConfig cfg{.beta = 0.5, .shrink = 0.5, .alpha_max = 1.5, .max_shrinks = 10};
  const auto r = hf_backtracking(p, ledger, scalar(2.0), scalar(2.0), 2.0, cfg);
  CHECK(r.satisfied);
  CHECK(r.alpha == 0.75);
  CHECK(r.shrinks == 1);
  CHECK(r.value == doctest::Approx(0.125));
  CHECK(ledger.hf_calls() == 2);
}

TEST_CASE("exact line search finds the quadratic minimizer") {
  auto p = testing::half_norm(3);
  EvaluationLedger ledger(1.0);
  const Vector x(Vector::LinSpaced(3, 1.0, 3.0));
  const auto r = exact_line_search(p, ledger, x, 2.0 * x, 1.0);
  CHECK(r.alpha == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(r.value == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(ledger.hf_calls() == r.evaluations);
  // A bracket shrinking by 0.618 per probe from 1 to 1e-8 needs about 40 probes.
  CHECK(r.evaluations >= 38);
  CHECK(r.evaluations <= 42);
}

TEST_CASE("exact line search stays at the boundary for a monotone ray") {
  auto p = testing::single(1, [](const Vector& x) { return -x[0]; });
  EvaluationLedger ledger(1.0);
  const auto r = exact_line_search(p, ledger, scalar(0.0), scalar(-1.0), 2.0);
  CHECK(r.alpha == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("line search config validation") {
  LineSearchConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.beta = 0.6;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.beta = 0.1;
  cfg.shrink = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.shrink = 0.5;
  cfg.max_shrinks = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("surrogate csv has a header and one row per grid point") {
  auto p = scalar_pair();
  EvaluationLedger ledger(p.lf_cost_ratio);
  const Vector x = scalar(2.0);
  const auto s = build_surrogate(p, ledger, x, scalar(-1.0), 2, 1.0, p.hf(x));
  const auto calls = ledger.equivalent_hf();
  std::ostringstream out;
  write_surrogate_csv(out, s, p, 11);
  CHECK(ledger.equivalent_hf() == calls);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "alpha,surrogate,hf,lf");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 11);
  CHECK_THROWS_AS(write_surrogate_csv(out, s, p, 1), ConfigError);
}
