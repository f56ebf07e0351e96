#include "propshare/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "propshare/errors.hpp"
#include "propshare/optimum.hpp"
#include "propshare/rng.hpp"

namespace propshare {

UpdateRule best_response_rule() {
  return [](const UpdateContext& ctx) {
    if (ctx.parallelism != kUnbounded && ctx.parallelism < ctx.weights.size())
      return local_search_best_response(ctx.weights, ctx.opponents, ctx.budget,
                                        ctx.parallelism, ctx.epsilon);
    return best_response(ctx.weights, ctx.opponents, ctx.budget, ctx.epsilon);
  };
}

UpdateRule greedy_rule(const GreedyParams& params) {
  return [params](const UpdateContext& ctx) {
    return greedy_adjust_step(ctx.current_bids, ctx.weights, ctx.opponents, ctx.epsilon,
                              params);
  };
}

Matrix init_bids_weight_proportional(const Matrix& weights, std::span<const double> budgets,
                                     const std::vector<std::size_t>* bounds) {
  if (budgets.size() != weights.rows()) throw DimensionError("budgets size != users");
  const std::size_t n = weights.cols();
  Matrix bids(weights.rows(), n);
  for (std::size_t i = 0; i < weights.rows(); ++i) {
    auto row = weights.row(i);
    const std::size_t k =
        bounds ? std::min((*bounds)[i], n) : n;

    // Restrict to the k highest-weight machines (all of them when unbounded).
    std::vector<std::size_t> chosen(n);
    std::iota(chosen.begin(), chosen.end(), std::size_t{0});
    if (k < n) {
      std::sort(chosen.begin(), chosen.end(), [&](std::size_t a, std::size_t b) {
        if (row[a] != row[b]) return row[a] > row[b];
        return a < b;
      });
      chosen.resize(k);
    }
    double sum = 0.0;
    for (std::size_t j : chosen) sum += row[j];
    if (sum > 0.0) {
      for (std::size_t j : chosen) bids(i, j) = budgets[i] * row[j] / sum;
    } else {
      // Indifferent user: split the budget evenly over the chosen machines.
      for (std::size_t j : chosen) bids(i, j) = budgets[i] / static_cast<double>(chosen.size());
    }
  }
  return bids;
}

namespace {

std::vector<double> opponent_totals(const Matrix& bids, std::span<const double> prices,
                                    std::size_t user) {
  std::vector<double> totals(prices.begin(), prices.end());
  auto row = bids.row(user);
  for (std::size_t j = 0; j < totals.size(); ++j) totals[j] -= row[j];
  return totals;
}

double marginal_spread(const Matrix& bids, const Matrix& weights,
                       std::span<const double> prices, std::size_t user, double epsilon) {
  auto row = bids.row(user);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < bids.cols(); ++j) {
    if (row[j] <= 0.0) continue;
    const double y = epsilon + prices[j] - row[j];
    const double denom = epsilon + prices[j];
    const double marginal = denom > 0.0 ? weights(user, j) * y / (denom * denom) : 0.0;
    lo = std::min(lo, marginal);
    hi = std::max(hi, marginal);
  }
  return hi > lo ? hi - lo : 0.0;
}

IterationSnapshot make_snapshot(const Matrix& bids, const Matrix& weights,
                                const std::vector<std::size_t>& bounds, double optimum) {
  IterationSnapshot snap;
  snap.bids = bids;
  const Matrix alloc = compute_allocation(bids);
  snap.utilities = user_utilities(weights, alloc, bounds);
  for (double u : snap.utilities) snap.welfare += u;
  snap.efficiency = optimum > 0.0 ? snap.welfare / optimum : 0.0;
  snap.uniformity = utility_uniformity(snap.utilities);
  const EnvyFreeness envy = envy_freeness(weights, alloc, bounds);
  snap.envy = envy.reported;
  snap.envy_raw = envy.raw;
  return snap;
}

}  // namespace

DynamicsTrace run_dynamics(const GameConfig& config, const Matrix& weights,
                           const UpdateRule& rule, const ConvergenceCriterion& criterion,
                           const Matrix* initial_bids) {
  config.validate();
  validate_weights(weights);
  if (weights.rows() != config.users || weights.cols() != config.machines)
    throw DimensionError("weight matrix shape does not match the game");
  if (!(criterion.tolerance > 0.0)) throw ParameterError("tolerance must be positive");
  if (criterion.max_iterations < 1) throw ParameterError("max_iterations must be >= 1");

  DynamicsTrace trace;
  const auto violations = strong_competitiveness_violations(weights);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "game is not strongly competitive; an equilibrium may not exist (machines:";
    for (std::size_t j : violations) msg << ' ' << j;
    msg << ')';
    trace.warnings.push_back(msg.str());
  }

  trace.optimum = config.bounded()
                      ? social_optimum_bounded(weights, config.parallelism).value
                      : social_optimum_unbounded(weights).value;

  Matrix bids = initial_bids
                    ? *initial_bids
                    : init_bids_weight_proportional(weights, config.budgets,
                                                    config.bounded() ? &config.parallelism
                                                                     : nullptr);
  validate_bids(bids, config);

  trace.snapshots.push_back(make_snapshot(bids, weights, config.parallelism, trace.optimum));

  auto order_rng = rng::engine(rng::derive(0x6f72646572ULL, {config.users, config.machines}));
  std::vector<std::size_t> order(config.users);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t iteration = 1; iteration <= criterion.max_iterations; ++iteration) {
    rng::shuffle(order, order_rng);
    for (std::size_t user : order) {
      const std::vector<double> prices = compute_prices(bids);
      const std::vector<double> opponents = opponent_totals(bids, prices, user);
      UpdateContext ctx;
      ctx.user = user;
      ctx.weights = weights.row(user);
      ctx.opponents = opponents;
      ctx.current_bids = bids.row(user);
      ctx.budget = config.budgets[user];
      ctx.parallelism = config.parallelism[user];
      ctx.epsilon = config.epsilon;
      try {
        const std::vector<double> updated = rule(ctx);
        if (updated.size() != config.machines)
          throw DimensionError("update rule returned a row of the wrong length");
        bids.set_row(user, updated);
      } catch (const Error& e) {
        std::ostringstream msg;
        msg << "iteration " << iteration << ", user " << user << ": " << e.what();
        throw DynamicsError(msg.str());
      }
    }

    trace.snapshots.push_back(
        make_snapshot(bids, weights, config.parallelism, trace.optimum));
    const IterationSnapshot& current = trace.snapshots[iteration];
    const IterationSnapshot& previous = trace.snapshots[iteration - 1];

    // Gap criteria certify the state the pass started from (iteration - 1):
    // that state survived a full round of updates within tolerance.
    if (!trace.stabilization_iteration &&
        std::abs(current.welfare - previous.welfare) <= criterion.tolerance)
      trace.stabilization_iteration = iteration - 1;

    bool converged = false;
    std::size_t converged_at = iteration;
    switch (criterion.kind) {
      case ConvergenceKind::kUtilityGap: {
        double gap = 0.0;
        for (std::size_t i = 0; i < config.users; ++i)
          gap = std::max(gap, std::abs(current.utilities[i] - previous.utilities[i]));
        converged = gap < criterion.tolerance;
        converged_at = iteration - 1;
        break;
      }
      case ConvergenceKind::kMarginalGap: {
        const std::vector<double> prices = compute_prices(bids);
        converged = true;
        for (std::size_t i = 0; i < config.users && converged; ++i)
          converged =
              marginal_spread(bids, weights, prices, i, config.epsilon) < criterion.tolerance;
        break;
      }
      case ConvergenceKind::kWelfareGap:
        converged = std::abs(current.welfare - previous.welfare) <= criterion.tolerance;
        converged_at = iteration - 1;
        break;
    }
    if (converged) {
      trace.converged = true;
      trace.converged_iteration = converged_at;
      break;
    }
  }
  return trace;
}

EquilibriumCertificate check_equilibrium(const Matrix& bids, const Matrix& weights,
                                         double epsilon, double violation_tol) {
  if (weights.rows() != bids.rows() || weights.cols() != bids.cols())
    throw DimensionError("weights/bids shape mismatch");
  const std::vector<double> prices = compute_prices(bids);
  EquilibriumCertificate cert;
  cert.lambdas.assign(bids.rows(), 0.0);

  for (std::size_t i = 0; i < bids.rows(); ++i) {
    auto row = bids.row(i);
    std::vector<double> marginals(bids.cols(), 0.0);
    for (std::size_t j = 0; j < bids.cols(); ++j) {
      const double denom = epsilon + prices[j];
      if (denom > 0.0) {
        marginals[j] = weights(i, j) * (denom - row[j]) / (denom * denom);
      } else if (weights(i, j) > 0.0) {
        // A wanted machine nobody funds: any bid would grab it outright.
        marginals[j] = std::numeric_limits<double>::infinity();
      }
    }
    double lambda = 0.0;
    std::size_t support = 0;
    for (std::size_t j = 0; j < bids.cols(); ++j) {
      if (row[j] > 0.0) {
        lambda += marginals[j];
        ++support;
      }
    }
    if (support == 0) continue;
    lambda /= static_cast<double>(support);
    cert.lambdas[i] = lambda;
    for (std::size_t j = 0; j < bids.cols(); ++j) {
      const double deviation = row[j] > 0.0 ? std::abs(marginals[j] - lambda)
                                            : std::max(0.0, marginals[j] - lambda);
      cert.residual = std::max(cert.residual, deviation);
      if (deviation > violation_tol) cert.violations.emplace_back(i, j);
    }
  }
  return cert;
}

}  // namespace propshare
