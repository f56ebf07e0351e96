#pragma once

#include <functional>
#include <span>
#include <vector>

#include "propshare/game.hpp"

namespace propshare {

// Single-user strategy computations. Throughout, `opponents` is the total
// money the other users have placed on each machine (y_j = Y_j - x_ij) and
// `epsilon` is the reservation added to every denominator, i.e. the user
// optimizes sum_j w_j x_j / (epsilon + x_j + y_j).

// Exact best response without a parallelism bound. Water-filling form: sort
// machines by w/y, keep the longest prefix whose last machine still receives
// a nonnegative bid, and fill it so marginal utilities are equal.
// Throws IndifferentUserError when every weight is zero and
// UnboundedMarginalError when a wanted machine has y + epsilon == 0.
std::vector<double> best_response(std::span<const double> weights,
                                  std::span<const double> opponents, double budget,
                                  double epsilon = 0.0);

// Best response restricted to a machine subset; zero outside `machines`.
std::vector<double> best_response_on_subset(std::span<const double> weights,
                                            std::span<const double> opponents, double budget,
                                            const std::vector<std::size_t>& machines,
                                            double epsilon = 0.0);

// Best response under a parallelism bound k: seeds the support with the k
// best w/y ratios, then hill-climbs over single-machine swaps (restarting the
// scan after each accepted swap) until no swap improves the utility by more
// than tol::kSwapGain. The result is single-swap optimal; it has at most k
// positive bids.
std::vector<double> local_search_best_response(std::span<const double> weights,
                                               std::span<const double> opponents,
                                               double budget, std::size_t parallelism,
                                               double epsilon = 0.0);

// Utility and marginal utilities of one user's bid row against fixed
// opponents, under the epsilon-perturbed payoff.
double response_utility(std::span<const double> weights, std::span<const double> opponents,
                        std::span<const double> bids, double epsilon = 0.0);
std::vector<double> response_marginals(std::span<const double> weights,
                                       std::span<const double> opponents,
                                       std::span<const double> bids, double epsilon = 0.0);

// Stationarity residual of a bid row: deviation from a common marginal on the
// support plus any positive violation off it. Zero at an exact best response.
double kkt_residual(std::span<const double> weights, std::span<const double> opponents,
                    std::span<const double> bids, double epsilon = 0.0);

struct GreedyParams {
  // Money moved per step; 0 selects the default of 1% of the budget.
  double step = 0.0;
  // Probe distance for finite-difference marginals (black-box utilities).
  double fd_step = 1e-6;
};

// One greedy adjustment: move min(step, x_low) from the funded machine with
// the lowest marginal utility to the machine (funded or not) with the
// highest. Returns the row unchanged when marginals are level (stationary).
std::vector<double> greedy_adjust_step(std::span<const double> bids,
                                       std::span<const double> weights,
                                       std::span<const double> opponents, double epsilon,
                                       const GreedyParams& params = {});

// Black-box variant: marginals estimated by finite differences of `utility`
// (central where the bid allows the downward probe, forward otherwise).
using UtilityProbe = std::function<double(std::span<const double>)>;
std::vector<double> greedy_adjust_step(std::span<const double> bids, const UtilityProbe& utility,
                                       const GreedyParams& params = {});

}  // namespace propshare
