#include "propshare/optimum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "propshare/errors.hpp"
#include "propshare/hungarian.hpp"

namespace propshare {

MachineAssignment social_optimum_unbounded(const Matrix& weights) {
  validate_weights(weights);
  MachineAssignment best;
  best.owner.assign(weights.cols(), 0);
  for (std::size_t j = 0; j < weights.cols(); ++j) {
    std::size_t argmax = 0;
    for (std::size_t i = 1; i < weights.rows(); ++i)
      if (weights(i, j) > weights(argmax, j)) argmax = i;
    best.owner[j] = argmax;
    best.value += weights(argmax, j);
  }
  return best;
}

MatchingOptimum social_optimum_bounded(const Matrix& weights,
                                       const std::vector<std::size_t>& bounds) {
  validate_weights(weights);
  if (bounds.size() != weights.rows()) throw DimensionError("bounds size != users");

  // One row per user slot; a slot count above n adds nothing.
  std::vector<std::pair<std::size_t, std::size_t>> slots;  // (user, slot index)
  for (std::size_t i = 0; i < weights.rows(); ++i) {
    const std::size_t k = std::min(bounds[i], weights.cols());
    if (k < 1) throw ParameterError("parallelism bound outside [1, n]");
    for (std::size_t s = 0; s < k; ++s) slots.emplace_back(i, s);
  }

  Matrix slot_weights(slots.size(), weights.cols());
  for (std::size_t r = 0; r < slots.size(); ++r)
    slot_weights.set_row(r, weights.row(slots[r].first));

  const AssignmentResult assignment = max_weight_assignment(slot_weights);
  MatchingOptimum optimum;
  optimum.value = assignment.value;
  for (std::size_t r = 0; r < slots.size(); ++r) {
    if (assignment.row_to_col[r] == AssignmentResult::npos) continue;
    optimum.matches.push_back({slots[r].first, slots[r].second, assignment.row_to_col[r]});
  }
  return optimum;
}

Matrix assignment_allocation(const MachineAssignment& assignment, std::size_t users,
                             std::size_t machines) {
  Matrix alloc(users, machines);
  for (std::size_t j = 0; j < machines; ++j) alloc(assignment.owner[j], j) = 1.0;
  return alloc;
}

Matrix matching_allocation(const MatchingOptimum& matching, std::size_t users,
                           std::size_t machines) {
  Matrix alloc(users, machines);
  for (const SlotMatch& match : matching.matches) alloc(match.user, match.machine) = 1.0;
  return alloc;
}

EqualWeightEquilibrium two_player_equal_weight_equilibrium(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
  return {alpha, {0.5, 0.5}};
}

namespace {

TwoPlayerEquilibrium opposite_equilibrium_from_root(double alpha, double delta,
                                                    double optimum, EquilibriumKind kind) {
  // Bids on machine 1 recovered from the two stationarity equations.
  const double x = 1.0 / (1.0 + (1.0 - alpha) * delta * delta / alpha);
  const double y = 1.0 / (1.0 + alpha * delta * delta / (1.0 - alpha));
  const double s = x + y;

  const double foc1 = alpha * y / (s * s) - (1.0 - alpha) * (1.0 - y) / ((2.0 - s) * (2.0 - s));
  const double foc2 =
      (1.0 - alpha) * x / (s * s) - alpha * (1.0 - x) / ((2.0 - s) * (2.0 - s));
  if (std::abs(foc1) > 1e-8 || std::abs(foc2) > 1e-8)
    throw Error("cubic root does not satisfy the stationarity conditions");

  const double u1 = alpha * x / s + (1.0 - alpha) * (1.0 - x) / (2.0 - s);
  const double u2 = (1.0 - alpha) * y / s + alpha * (1.0 - y) / (2.0 - s);
  TwoPlayerEquilibrium eq;
  eq.delta = delta;
  eq.bid_user1 = x;
  eq.bid_user2 = y;
  eq.welfare = u1 + u2;
  eq.efficiency = (u1 + u2) / optimum;
  eq.kind = kind;
  return eq;
}

}  // namespace

OppositeGameEquilibria two_player_opposite_equilibria(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
  OppositeGameEquilibria result;
  result.alpha = alpha;
  result.cubic_c = 1.0 / (2.0 * alpha * (1.0 - alpha)) - 1.0;
  result.optimum = 2.0 * std::max(alpha, 1.0 - alpha);

  result.equilibria.push_back(opposite_equilibrium_from_root(alpha, 1.0, result.optimum,
                                                             EquilibriumKind::kSymmetric));

  // delta^3 - c delta^2 + c delta - 1 = (delta - 1)(delta^2 - (c-1) delta + 1):
  // the asymmetric pair are the quadratic's roots, real once (c-1)^2 >= 4.
  const double half_trace = (result.cubic_c - 1.0) / 2.0;
  const double discriminant = half_trace * half_trace - 1.0;
  if (std::abs(discriminant) <= 1e-12) {
    result.equilibria.push_back(opposite_equilibrium_from_root(
        alpha, half_trace, result.optimum, EquilibriumKind::kThreshold));
  } else if (discriminant > 0.0) {
    const double large = half_trace + std::sqrt(discriminant);
    const double small = 1.0 / large;  // the roots multiply to 1
    result.equilibria.push_back(opposite_equilibrium_from_root(
        alpha, small, result.optimum, EquilibriumKind::kAsymmetric));
    result.equilibria.push_back(opposite_equilibrium_from_root(
        alpha, large, result.optimum, EquilibriumKind::kAsymmetric));
  }

  std::stable_sort(result.equilibria.begin(), result.equilibria.end(),
                   [](const TwoPlayerEquilibrium& a, const TwoPlayerEquilibrium& b) {
                     return a.delta < b.delta;
                   });
  return result;
}

WorstCaseInstance worst_case_instance(std::size_t machines) {
  if (machines < 2) throw ParameterError("the construction needs at least two machines");
  const std::size_t n = machines;
  const std::size_t uniform_users = n * n;
  const std::size_t m = uniform_users + n;
  constexpr double kTinyWeight = 1e-9;

  WorstCaseInstance instance;
  instance.config = GameConfig::symmetric(m, n);
  instance.weights = Matrix(m, n);
  instance.bids = Matrix(m, n);

  const double uniform_weight = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < uniform_users; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      instance.weights(i, j) = uniform_weight;
      instance.bids(i, j) = uniform_weight;  // budget 1 spread evenly
    }
  }
  // Focused users: weight 1 on their machine, a tiny weight elsewhere to keep
  // the game strongly competitive; rows renormalized to sum 1.
  const double row_sum = 1.0 + static_cast<double>(n - 1) * kTinyWeight;
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t i = uniform_users + t;
    for (std::size_t j = 0; j < n; ++j)
      instance.weights(i, j) = (j == t ? 1.0 : kTinyWeight) / row_sum;
    instance.bids(i, t) = 1.0;  // all-in on the favorite machine
  }

  instance.optimum = social_optimum_unbounded(instance.weights).value;
  const Matrix alloc = compute_allocation(instance.bids);
  for (std::size_t i = 0; i < m; ++i)
    instance.welfare += utility_linear(instance.weights.row(i), alloc.row(i));
  return instance;
}

std::vector<double> utility_floor_bid(std::span<const double> prices_excluding_user,
                                      double budget) {
  if (!(budget > 0.0)) throw ParameterError("budget must be positive");
  const double total = std::accumulate(prices_excluding_user.begin(),
                                       prices_excluding_user.end(), 0.0);
  if (!(total > 0.0)) throw ParameterError("no prices to track");
  std::vector<double> bids(prices_excluding_user.size());
  for (std::size_t j = 0; j < bids.size(); ++j)
    bids[j] = budget * prices_excluding_user[j] / total;
  return bids;
}

}  // namespace propshare
