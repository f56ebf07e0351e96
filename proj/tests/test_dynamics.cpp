#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "propshare/dynamics.hpp"
#include "propshare/errors.hpp"
#include "propshare/experiment.hpp"
#include "propshare/optimum.hpp"
#include "support/oracles.hpp"

using namespace propshare;

TEST_CASE("weight-proportional initialization") {
  const Matrix weights = Matrix::from_rows({{0.5, 0.5}, {0.8, 0.2}, {0.0, 0.0}});
  const std::vector<double> budgets{1.0, 1.0, 1.0};
  const Matrix bids = init_bids_weight_proportional(weights, budgets);
  CHECK(bids(0, 0) == doctest::Approx(0.5));
  CHECK(bids(1, 0) == doctest::Approx(0.8));
  CHECK(bids(1, 1) == doctest::Approx(0.2));
  // Indifferent users split evenly.
  CHECK(bids(2, 0) == doctest::Approx(0.5));
  CHECK(bids(2, 1) == doctest::Approx(0.5));
}

TEST_CASE("bounded initialization funds only the top-k machines") {
  const Matrix weights = Matrix::from_rows({{0.1, 0.5, 0.4}});
  const std::vector<double> budgets{2.0};
  const std::vector<std::size_t> bounds{2};
  const Matrix bids = init_bids_weight_proportional(weights, budgets, &bounds);
  CHECK(bids(0, 0) == 0.0);
  CHECK(bids(0, 1) == doctest::Approx(2.0 * 0.5 / 0.9));
  CHECK(bids(0, 2) == doctest::Approx(2.0 * 0.4 / 0.9));
}

TEST_CASE("equal-weight two-player dynamics settle at the analytic point") {
  const double alpha = 0.6;
  const Matrix weights = Matrix::from_rows({{alpha, 1 - alpha}, {alpha, 1 - alpha}});
  GameConfig config = GameConfig::symmetric(2, 2);
  const DynamicsTrace trace =
      run_dynamics(config, weights, best_response_rule(), ConvergenceCriterion{});
  CHECK(trace.converged);
  CHECK(*trace.converged_iteration <= 5);
  const Matrix& bids = trace.final_state().bids;
  CHECK(bids(0, 0) == doctest::Approx(alpha).epsilon(1e-9));
  CHECK(bids(1, 0) == doctest::Approx(alpha).epsilon(1e-9));
  CHECK(trace.final_state().utilities[0] == doctest::Approx(0.5));
  CHECK(trace.final_state().utilities[1] == doctest::Approx(0.5));
}

TEST_CASE("a single user reaches a fixed point after one pass") {
  const Matrix weights = Matrix::from_rows({{0.7, 0.3}});
  GameConfig config = GameConfig::symmetric(1, 2);
  config.epsilon = 1e-9;  // no opposing money anywhere
  const DynamicsTrace trace =
      run_dynamics(config, weights, best_response_rule(), ConvergenceCriterion{});
  CHECK(trace.converged);
  // A lone user's utility is 1 whatever they bid, so this converges at once.
  CHECK(*trace.converged_iteration <= 1);
  // The state stops changing after the first pass.
  REQUIRE(trace.snapshots.size() >= 2);
  const Matrix& after_first = trace.snapshots[1].bids;
  const Matrix& final_bids = trace.final_state().bids;
  CHECK(after_first == final_bids);
  CHECK(trace.warnings.size() == 1);  // not strongly competitive
}

TEST_CASE("desk-scale uniform game reaches high efficiency") {
  ScenarioConfig config;
  config.users = 40;
  config.machines = 100;
  config.seed = 7;
  const ScenarioResult result = run_scenario(config);
  CHECK(result.row.converged);
  CHECK(result.row.efficiency >= 0.85);
  CHECK(result.row.efficiency <= 0.95);
}

TEST_CASE("best response never lowers the acting user's utility") {
  std::mt19937_64 gen(41);
  for (int repeat = 0; repeat < 50; ++repeat) {
    const std::size_t n = 2 + gen() % 4;
    const auto w = oracles::random_normalized_row(gen, n);
    const auto y = oracles::random_vector(gen, n, 0.05, 2.0);
    const auto current = oracles::random_budget_split(gen, n, 1.0);
    const auto response = best_response(w, y, 1.0);
    CHECK(oracles::bid_utility(w, y, response) >=
          oracles::bid_utility(w, y, current) - 1e-12);
  }
}

TEST_CASE("tightly converged dynamics certify as equilibria") {
  std::mt19937_64 gen(42);
  for (int repeat = 0; repeat < 10; ++repeat) {
    const std::size_t m = 2 + gen() % 3;
    const std::size_t n = 2 + gen() % 3;
    const Matrix weights = oracles::random_normalized_matrix(gen, m, n);
    GameConfig config = GameConfig::symmetric(m, n);
    config.epsilon = 1e-9;
    ConvergenceCriterion criterion;
    criterion.tolerance = 1e-9;
    criterion.max_iterations = 500;
    const DynamicsTrace trace =
        run_dynamics(config, weights, best_response_rule(), criterion);
    if (!trace.converged) continue;
    CHECK(check_equilibrium(trace.final_state().bids, weights, config.epsilon).residual <
          1e-6);
  }
}

TEST_CASE("stabilization never lags convergence") {
  std::mt19937_64 gen(43);
  for (int repeat = 0; repeat < 20; ++repeat) {
    const std::size_t m = 2 + gen() % 6;
    const Matrix weights = oracles::random_normalized_matrix(gen, m, 4);
    GameConfig config = GameConfig::symmetric(m, 4);
    config.epsilon = 1e-9;
    const DynamicsTrace trace =
        run_dynamics(config, weights, best_response_rule(), ConvergenceCriterion{});
    if (trace.converged && trace.stabilization_iteration)
      CHECK(*trace.stabilization_iteration <= *trace.converged_iteration);
  }
}

TEST_CASE("equilibrium certificates") {
  // Analytic equal-weight equilibrium: residual at noise level.
  const Matrix weights = Matrix::from_rows({{0.5, 0.5}, {0.5, 0.5}});
  const Matrix bids = Matrix::from_rows({{0.5, 0.5}, {0.5, 0.5}});
  CHECK(check_equilibrium(bids, weights).residual < 1e-10);

  // The worst-case candidate profile verifies numerically.
  const auto instance = worst_case_instance(3);
  CHECK(check_equilibrium(instance.bids, instance.weights).residual < 1e-6);

  // Piling everything on machine 1 is far from stationary.
  const Matrix lopsided = Matrix::from_rows({{1.0, 0.0}, {1.0, 0.0}});
  const auto cert = check_equilibrium(lopsided, weights);
  CHECK(cert.residual > 0.01);
  CHECK(!cert.violations.empty());
}

TEST_CASE("greedy dynamics under the marginal-gap criterion") {
  std::mt19937_64 gen(44);
  const Matrix weights = oracles::random_normalized_matrix(gen, 8, 5);
  GameConfig config = GameConfig::symmetric(8, 5);
  config.epsilon = 1e-9;
  ConvergenceCriterion criterion;
  criterion.kind = ConvergenceKind::kMarginalGap;
  criterion.tolerance = 1e-3;
  criterion.max_iterations = 400;
  const DynamicsTrace trace = run_dynamics(config, weights, greedy_rule(), criterion);
  CHECK(trace.stabilization_iteration.has_value());
  if (trace.converged) {
    // Marginal spreads on support are level at convergence.
    const Matrix& bids = trace.final_state().bids;
    const auto prices = compute_prices(bids);
    for (std::size_t i = 0; i < 8; ++i) {
      double lo = 1e300, hi = -1e300;
      for (std::size_t j = 0; j < 5; ++j) {
        if (bids(i, j) <= 0.0) continue;
        const double y = config.epsilon + prices[j] - bids(i, j);
        const double d = config.epsilon + prices[j];
        const double marginal = weights(i, j) * y / (d * d);
        lo = std::min(lo, marginal);
        hi = std::max(hi, marginal);
      }
      CHECK(hi - lo < 1e-3 + 1e-12);
    }
  }
}

TEST_CASE("dynamics errors carry user context") {
  // Machine 2 is wanted only by user 0 and nobody funds it; with zero
  // reservation the best response is undefined.
  const Matrix weights = Matrix::from_rows({{0.5, 0.5}, {1.0, 0.0}});
  GameConfig config = GameConfig::symmetric(2, 2);
  config.epsilon = 0.0;
  const Matrix initial = Matrix::from_rows({{1.0, 0.0}, {1.0, 0.0}});
  CHECK_THROWS_AS(run_dynamics(config, weights, best_response_rule(),
                               ConvergenceCriterion{}, &initial),
                  DynamicsError);
}

TEST_CASE("replays are bit-identical") {
  ScenarioConfig config;
  config.users = 10;
  config.machines = 20;
  config.seed = 99;
  const ScenarioResult a = run_scenario(config);
  const ScenarioResult b = run_scenario(config);
  REQUIRE(a.trace.snapshots.size() == b.trace.snapshots.size());
  for (std::size_t t = 0; t < a.trace.snapshots.size(); ++t) {
    CHECK(a.trace.snapshots[t].bids == b.trace.snapshots[t].bids);
    CHECK(a.trace.snapshots[t].welfare == b.trace.snapshots[t].welfare);
  }
}

TEST_CASE("snapshot bookkeeping respects the iteration cap") {
  std::mt19937_64 gen(45);
  const Matrix weights = oracles::random_normalized_matrix(gen, 3, 3);
  GameConfig config = GameConfig::symmetric(3, 3);
  config.epsilon = 1e-9;
  ConvergenceCriterion criterion;
  criterion.tolerance = 1e-18;  // unreachable
  criterion.max_iterations = 7;
  const DynamicsTrace trace = run_dynamics(config, weights, best_response_rule(), criterion);
  CHECK_FALSE(trace.converged);
  CHECK(trace.snapshots.size() <= criterion.max_iterations + 1);
}
