#include "propshare/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "propshare/errors.hpp"

namespace propshare {

namespace {

void check_lengths(std::span<const double> weights, std::span<const double> opponents) {
  if (weights.size() != opponents.size())
    throw DimensionError("weights/opponents length mismatch");
  if (weights.empty()) throw DimensionError("no machines");
}

// Candidate machines (positive weight), sorted by w/(y+eps) descending with
// index ties toward the lower machine.
std::vector<std::size_t> ranked_candidates(std::span<const double> weights,
                                           std::span<const double> opponents,
                                           const std::vector<std::size_t>* subset,
                                           double epsilon) {
  std::vector<std::size_t> candidates;
  auto consider = [&](std::size_t j) {
    if (weights[j] <= 0.0) return;
    if (opponents[j] + epsilon <= 0.0)
      throw UnboundedMarginalError(
          "machine " + std::to_string(j) + " has no opposing money and no reservation", j);
    candidates.push_back(j);
  };
  if (subset) {
    for (std::size_t j : *subset) consider(j);
  } else {
    for (std::size_t j = 0; j < weights.size(); ++j) consider(j);
  }
  if (candidates.empty()) throw IndifferentUserError("user has no positive weight to bid on");
  std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
    const double ra = weights[a] / (opponents[a] + epsilon);
    const double rb = weights[b] / (opponents[b] + epsilon);
    if (ra != rb) return ra > rb;
    return a < b;
  });
  return candidates;
}

std::vector<double> best_response_impl(std::span<const double> weights,
                                       std::span<const double> opponents, double budget,
                                       const std::vector<std::size_t>* subset,
                                       double epsilon) {
  check_lengths(weights, opponents);
  if (!(budget > 0.0)) throw ParameterError("budget must be positive");

  const std::vector<std::size_t> order = ranked_candidates(weights, opponents, subset, epsilon);

  // Prefix sums over the ranked machines of sqrt(w y) and y.
  std::vector<double> root_wy(order.size()), prefix_root(order.size()), prefix_y(order.size());
  double acc_root = 0.0, acc_y = 0.0;
  for (std::size_t p = 0; p < order.size(); ++p) {
    const std::size_t j = order[p];
    const double y = opponents[j] + epsilon;
    root_wy[p] = std::sqrt(weights[j] * y);
    acc_root += root_wy[p];
    acc_y += y;
    prefix_root[p] = acc_root;
    prefix_y[p] = acc_y;
  }

  // Largest prefix whose last machine still gets a nonnegative bid. Ratios
  // decrease along the order, so earlier machines are nonnegative too.
  std::size_t k = 1;
  for (std::size_t p = order.size(); p-- > 0;) {
    const std::size_t j = order[p];
    const double y = opponents[j] + epsilon;
    const double bid = root_wy[p] / prefix_root[p] * (budget + prefix_y[p]) - y;
    if (bid >= 0.0) {
      k = p + 1;
      break;
    }
  }

  std::vector<double> bids(weights.size(), 0.0);
  const double scale = (budget + prefix_y[k - 1]) / prefix_root[k - 1];
  double placed = 0.0;
  std::size_t largest = order[0];
  for (std::size_t p = 0; p < k; ++p) {
    const std::size_t j = order[p];
    const double y = opponents[j] + epsilon;
    bids[j] = std::max(0.0, root_wy[p] * scale - y);
    placed += bids[j];
    if (bids[j] > bids[largest]) largest = j;
  }
  bids[largest] += budget - placed;  // absorb rounding so the row sums to the budget
  return bids;
}

double analytic_marginal(double weight, double opponent, double bid, double epsilon) {
  const double denom = epsilon + opponent + bid;
  if (denom <= 0.0) return weight > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return weight * (epsilon + opponent) / (denom * denom);
}

std::vector<double> move_step(std::span<const double> bids,
                              const std::vector<double>& marginals, double step) {
  const std::size_t n = bids.size();
  std::size_t highest = 0;
  for (std::size_t j = 1; j < n; ++j)
    if (marginals[j] > marginals[highest]) highest = j;

  std::size_t lowest = n;  // among funded machines only
  for (std::size_t j = 0; j < n; ++j) {
    if (bids[j] <= 0.0) continue;
    if (lowest == n || marginals[j] < marginals[lowest]) lowest = j;
  }

  std::vector<double> next(bids.begin(), bids.end());
  if (lowest == n || lowest == highest) return next;
  if (marginals[highest] - marginals[lowest] <= tol::kMarginalTie) return next;

  const double amount = std::min(step, next[lowest]);
  next[lowest] -= amount;
  next[highest] += amount;
  return next;
}

double default_step(std::span<const double> bids, const GreedyParams& params) {
  if (params.step > 0.0) return params.step;
  const double budget = std::accumulate(bids.begin(), bids.end(), 0.0);
  return 0.01 * budget;
}

}  // namespace

std::vector<double> best_response(std::span<const double> weights,
                                  std::span<const double> opponents, double budget,
                                  double epsilon) {
  return best_response_impl(weights, opponents, budget, nullptr, epsilon);
}

std::vector<double> best_response_on_subset(std::span<const double> weights,
                                            std::span<const double> opponents, double budget,
                                            const std::vector<std::size_t>& machines,
                                            double epsilon) {
  return best_response_impl(weights, opponents, budget, &machines, epsilon);
}

std::vector<double> local_search_best_response(std::span<const double> weights,
                                               std::span<const double> opponents,
                                               double budget, std::size_t parallelism,
                                               double epsilon) {
  check_lengths(weights, opponents);
  const std::size_t n = weights.size();
  if (parallelism == kUnbounded || parallelism >= n)
    return best_response(weights, opponents, budget, epsilon);
  if (parallelism < 1) throw ParameterError("parallelism bound outside [1, n]");

  // Seed: the k best w/y ratios (zero-weight machines rank last).
  std::vector<std::size_t> ranking(n);
  std::iota(ranking.begin(), ranking.end(), std::size_t{0});
  std::sort(ranking.begin(), ranking.end(), [&](std::size_t a, std::size_t b) {
    const double ra = opponents[a] + epsilon > 0.0
                          ? weights[a] / (opponents[a] + epsilon)
                          : (weights[a] > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    const double rb = opponents[b] + epsilon > 0.0
                          ? weights[b] / (opponents[b] + epsilon)
                          : (weights[b] > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    if (ra != rb) return ra > rb;
    return a < b;
  });
  std::vector<std::size_t> support(ranking.begin(),
                                   ranking.begin() + static_cast<std::ptrdiff_t>(parallelism));
  std::sort(support.begin(), support.end());

  auto evaluate = [&](const std::vector<std::size_t>& subset,
                      std::vector<double>& bids) -> double {
    try {
      bids = best_response_on_subset(weights, opponents, budget, subset, epsilon);
    } catch (const IndifferentUserError&) {
      return -std::numeric_limits<double>::infinity();  // worthless subset
    }
    return response_utility(weights, opponents, bids, epsilon);
  };

  std::vector<double> bids;
  double utility = evaluate(support, bids);
  if (!std::isfinite(utility))
    throw IndifferentUserError("user has no positive weight to bid on");

  std::vector<char> in_support(n, 0);
  for (std::size_t j : support) in_support[j] = 1;

  // Single-swap hill climb; rescan from the top after every accepted swap.
  bool improved = true;
  while (improved) {
    improved = false;
    for (std::size_t si = 0; si < support.size() && !improved; ++si) {
      for (std::size_t j = 0; j < n && !improved; ++j) {
        if (in_support[j]) continue;
        std::vector<std::size_t> candidate = support;
        candidate[si] = j;
        std::sort(candidate.begin(), candidate.end());
        std::vector<double> candidate_bids;
        const double candidate_utility = evaluate(candidate, candidate_bids);
        if (candidate_utility > utility + tol::kSwapGain) {
          in_support[support[si]] = 0;
          in_support[j] = 1;
          support = std::move(candidate);
          bids = std::move(candidate_bids);
          utility = candidate_utility;
          improved = true;
        }
      }
    }
  }
  return bids;
}

double response_utility(std::span<const double> weights, std::span<const double> opponents,
                        std::span<const double> bids, double epsilon) {
  double total = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    const double denom = epsilon + opponents[j] + bids[j];
    if (denom > 0.0) total += weights[j] * bids[j] / denom;
  }
  return total;
}

std::vector<double> response_marginals(std::span<const double> weights,
                                       std::span<const double> opponents,
                                       std::span<const double> bids, double epsilon) {
  std::vector<double> marginals(weights.size());
  for (std::size_t j = 0; j < weights.size(); ++j)
    marginals[j] = analytic_marginal(weights[j], opponents[j], bids[j], epsilon);
  return marginals;
}

double kkt_residual(std::span<const double> weights, std::span<const double> opponents,
                    std::span<const double> bids, double epsilon) {
  const std::vector<double> marginals = response_marginals(weights, opponents, bids, epsilon);
  double lambda = 0.0;
  std::size_t support = 0;
  for (std::size_t j = 0; j < bids.size(); ++j) {
    if (bids[j] > 0.0) {
      lambda += marginals[j];
      ++support;
    }
  }
  if (support == 0) return 0.0;
  lambda /= static_cast<double>(support);
  double residual = 0.0;
  for (std::size_t j = 0; j < bids.size(); ++j) {
    const double deviation =
        bids[j] > 0.0 ? std::abs(marginals[j] - lambda) : std::max(0.0, marginals[j] - lambda);
    residual = std::max(residual, deviation);
  }
  return residual;
}

std::vector<double> greedy_adjust_step(std::span<const double> bids,
                                       std::span<const double> weights,
                                       std::span<const double> opponents, double epsilon,
                                       const GreedyParams& params) {
  check_lengths(weights, opponents);
  if (bids.size() != weights.size()) throw DimensionError("bids length mismatch");
  if (bids.size() < 2) throw ParameterError("greedy adjustment needs at least two machines");
  return move_step(bids, response_marginals(weights, opponents, bids, epsilon),
                   default_step(bids, params));
}

std::vector<double> greedy_adjust_step(std::span<const double> bids, const UtilityProbe& utility,
                                       const GreedyParams& params) {
  if (bids.size() < 2) throw ParameterError("greedy adjustment needs at least two machines");
  if (!(params.fd_step > 0.0)) throw ParameterError("fd_step must be positive");
  const double h = params.fd_step;

  std::vector<double> probe(bids.begin(), bids.end());
  std::vector<double> marginals(bids.size());
  const double base = utility(probe);
  for (std::size_t j = 0; j < bids.size(); ++j) {
    const double x = probe[j];
    probe[j] = x + h;
    const double up = utility(probe);
    if (x >= h) {  // central difference when the downward probe stays feasible
      probe[j] = x - h;
      marginals[j] = (up - utility(probe)) / (2.0 * h);
    } else {
      marginals[j] = (up - base) / h;
    }
    probe[j] = x;
  }
  return move_step(bids, marginals, default_step(bids, params));
}

}  // namespace propshare
