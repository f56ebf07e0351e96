#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "propshare/matrix.hpp"

namespace propshare {

// Sentinel: user may bid on any number of machines.
inline constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

namespace tol {
// Row/budget sums.
inline constexpr double kRowSum = 1e-9;
// Recomputed quantities (column sums, normalized rows).
inline constexpr double kRecompute = 1e-12;
// Stationarity residual accepted for a best response.
inline constexpr double kKkt = 1e-7;
// Strict-improvement slack for local-search swaps.
inline constexpr double kSwapGain = 1e-12;
// Marginal spread below which a greedy step is stationary.
inline constexpr double kMarginalTie = 1e-12;
}  // namespace tol

// Fixed-budget bidding game: `users` players spread their budgets over
// `machines` divisible resources. Each machine's price is the total money on
// it and a bidder owns bid/price of the machine. `epsilon` is an optional
// reservation added to price denominators (a virtual bidder that keeps
// marginal utilities finite on momentarily unfunded machines).
struct GameConfig {
  std::size_t users = 0;
  std::size_t machines = 0;
  std::vector<double> budgets;             // per user, > 0
  std::vector<std::size_t> parallelism;    // per user, in [1, machines] or kUnbounded
  double epsilon = 0.0;

  // All budgets 1, no parallelism bound.
  static GameConfig symmetric(std::size_t users, std::size_t machines);

  bool bounded() const;  // any finite parallelism bound?
  void validate() const;
};

// Y_j = sum_i x_ij, the price of each machine.
std::vector<double> compute_prices(const Matrix& bids);

// r_ij = x_ij / (epsilon + Y_j); 0 where the denominator is 0.
Matrix compute_allocation(const Matrix& bids, double epsilon = 0.0);

// sum_j w_j r_j
double utility_linear(std::span<const double> weights, std::span<const double> shares);

// Sum of the k largest products w_j * r_j (value ties broken toward the lower
// machine index). k must lie in [1, n]; k = n reduces to utility_linear.
double utility_finite(std::span<const double> weights, std::span<const double> shares,
                      std::size_t k);

// Dispatch on the parallelism bound (kUnbounded or k >= n -> linear).
double utility_for(std::span<const double> weights, std::span<const double> shares,
                   std::size_t bound);

// Machines wanted by fewer than two users (positive weight). Empty result
// means the game is strongly competitive and an equilibrium exists.
std::vector<std::size_t> strong_competitiveness_violations(const Matrix& weights);
bool strongly_competitive(const Matrix& weights);

void validate_weights(const Matrix& weights);
bool rows_normalized(const Matrix& weights, double tolerance = tol::kRecompute);
Matrix normalize_rows(Matrix weights);

// Checks shape, nonnegativity, budget sums and parallelism supports.
void validate_bids(const Matrix& bids, const GameConfig& config);

}  // namespace propshare
