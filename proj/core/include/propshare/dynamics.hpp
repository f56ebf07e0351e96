#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "propshare/game.hpp"
#include "propshare/matrix.hpp"
#include "propshare/metrics.hpp"
#include "propshare/strategies.hpp"

namespace propshare {

enum class ConvergenceKind {
  kUtilityGap,      // every user's utility change below tolerance
  kMarginalGap,     // every user's max-min marginal spread on support below tolerance
  kWelfareGap,      // change in social welfare below tolerance
};

struct ConvergenceCriterion {
  ConvergenceKind kind = ConvergenceKind::kUtilityGap;
  double tolerance = 1e-3;
  std::size_t max_iterations = 200;
};

// Inputs one strategy update sees: the acting user's weights, the money the
// others currently have on each machine, and the user's own constraints.
struct UpdateContext {
  std::size_t user = 0;
  std::span<const double> weights;
  std::span<const double> opponents;
  std::span<const double> current_bids;
  double budget = 1.0;
  std::size_t parallelism = kUnbounded;
  double epsilon = 0.0;
};

using UpdateRule = std::function<std::vector<double>(const UpdateContext&)>;

// Exact best response; local search when the user has a parallelism bound.
UpdateRule best_response_rule();
UpdateRule greedy_rule(const GreedyParams& params = {});

struct IterationSnapshot {
  Matrix bids;
  std::vector<double> utilities;
  double welfare = 0.0;
  double efficiency = 0.0;
  double uniformity = 0.0;
  double envy = 1.0;
  double envy_raw = 1.0;
};

struct DynamicsTrace {
  // snapshots[0] is the initial state; one snapshot per completed iteration.
  std::vector<IterationSnapshot> snapshots;
  bool converged = false;
  // Iteration at which the converged state was reached: the following pass
  // changed per-user utilities by less than the tolerance. 0 means the
  // initial bids were already a fixed point; a lone user converges at 1.
  std::optional<std::size_t> converged_iteration;
  // Analogous index for welfare: first state whose next pass moved welfare by
  // at most the tolerance (recorded for every run regardless of criterion).
  std::optional<std::size_t> stabilization_iteration;
  double optimum = 0.0;  // welfare of the social optimum used for efficiency
  std::vector<std::string> warnings;

  const IterationSnapshot& final_state() const { return snapshots.back(); }
};

// x_ij proportional to user i's weights (even split for a zero row). With
// `bounds`, each user funds only their k_i highest-weight machines.
Matrix init_bids_weight_proportional(const Matrix& weights, std::span<const double> budgets,
                                     const std::vector<std::size_t>* bounds = nullptr);

// Sequential dynamics: each iteration updates every user once against live
// opponent totals, in an order reshuffled per iteration from a fixed internal
// stream (identity order resonates into two-cycles in low-competition games;
// a varying order dissolves them). Runs are fully deterministic. Metrics are
// recorded per iteration; the run stops when the criterion is met or
// max_iterations is reached. Strategy failures abort with a DynamicsError
// naming user and iteration.
DynamicsTrace run_dynamics(const GameConfig& config, const Matrix& weights,
                           const UpdateRule& rule, const ConvergenceCriterion& criterion,
                           const Matrix* initial_bids = nullptr);

struct EquilibriumCertificate {
  // Max over users of deviation from the user's common support marginal
  // (absolute on support, positive part off support).
  double residual = 0.0;
  std::vector<double> lambdas;  // per-user mean marginal over the support
  std::vector<std::pair<std::size_t, std::size_t>> violations;  // (user, machine)
};

// Certifies a bid profile against the equal-marginal optimality condition.
// Pairs deviating by more than violation_tol are reported.
EquilibriumCertificate check_equilibrium(const Matrix& bids, const Matrix& weights,
                                         double epsilon = 0.0,
                                         double violation_tol = tol::kKkt);

}  // namespace propshare
