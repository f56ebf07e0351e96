#include "propshare/game.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "propshare/errors.hpp"

namespace propshare {

GameConfig GameConfig::symmetric(std::size_t users, std::size_t machines) {
  GameConfig config;
  config.users = users;
  config.machines = machines;
  config.budgets.assign(users, 1.0);
  config.parallelism.assign(users, kUnbounded);
  return config;
}

bool GameConfig::bounded() const {
  return std::any_of(parallelism.begin(), parallelism.end(),
                     [&](std::size_t k) { return k < machines; });
}

void GameConfig::validate() const {
  if (users == 0 || machines == 0) throw ParameterError("need at least one user and machine");
  if (budgets.size() != users) throw DimensionError("budgets size != users");
  if (parallelism.size() != users) throw DimensionError("parallelism size != users");
  for (double budget : budgets)
    if (!(budget > 0.0)) throw ParameterError("budgets must be positive");
  for (std::size_t k : parallelism)
    if (k != kUnbounded && (k < 1 || k > machines))
      throw ParameterError("parallelism bound outside [1, machines]");
  if (!(epsilon >= 0.0)) throw ParameterError("epsilon must be nonnegative");
}

std::vector<double> compute_prices(const Matrix& bids) {
  std::vector<double> prices(bids.cols(), 0.0);
  for (std::size_t i = 0; i < bids.rows(); ++i) {
    auto row = bids.row(i);
    for (std::size_t j = 0; j < bids.cols(); ++j) prices[j] += row[j];
  }
  return prices;
}

Matrix compute_allocation(const Matrix& bids, double epsilon) {
  const std::vector<double> prices = compute_prices(bids);
  Matrix alloc(bids.rows(), bids.cols());
  for (std::size_t j = 0; j < bids.cols(); ++j) {
    const double denom = epsilon + prices[j];
    if (denom <= 0.0) continue;  // unfunded machine stays unallocated
    for (std::size_t i = 0; i < bids.rows(); ++i) alloc(i, j) = bids(i, j) / denom;
  }
  return alloc;
}

double utility_linear(std::span<const double> weights, std::span<const double> shares) {
  if (weights.size() != shares.size()) throw DimensionError("weights/shares length mismatch");
  double total = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) total += weights[j] * shares[j];
  return total;
}

double utility_finite(std::span<const double> weights, std::span<const double> shares,
                      std::size_t k) {
  if (weights.size() != shares.size()) throw DimensionError("weights/shares length mismatch");
  const std::size_t n = weights.size();
  if (k < 1 || k > n) throw ParameterError("parallelism bound outside [1, n]");
  if (k == n) return utility_linear(weights, shares);

  std::vector<std::pair<double, std::size_t>> products(n);
  for (std::size_t j = 0; j < n; ++j) products[j] = {weights[j] * shares[j], j};
  std::partial_sort(products.begin(), products.begin() + static_cast<std::ptrdiff_t>(k),
                    products.end(), [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return a.second < b.second;
                    });
  double total = 0.0;
  for (std::size_t j = 0; j < k; ++j) total += products[j].first;
  return total;
}

double utility_for(std::span<const double> weights, std::span<const double> shares,
                   std::size_t bound) {
  if (bound == kUnbounded || bound >= weights.size()) return utility_linear(weights, shares);
  return utility_finite(weights, shares, bound);
}

std::vector<std::size_t> strong_competitiveness_violations(const Matrix& weights) {
  std::vector<std::size_t> violating;
  for (std::size_t j = 0; j < weights.cols(); ++j) {
    std::size_t positive = 0;
    for (std::size_t i = 0; i < weights.rows() && positive < 2; ++i)
      if (weights(i, j) > 0.0) ++positive;
    if (positive < 2) violating.push_back(j);
  }
  return violating;
}

bool strongly_competitive(const Matrix& weights) {
  return strong_competitiveness_violations(weights).empty();
}

void validate_weights(const Matrix& weights) {
  if (weights.rows() == 0 || weights.cols() == 0) throw DimensionError("empty weight matrix");
  for (double w : weights.data())
    if (!(w >= 0.0) || !std::isfinite(w)) throw ParameterError("weights must be finite and >= 0");
}

bool rows_normalized(const Matrix& weights, double tolerance) {
  for (std::size_t i = 0; i < weights.rows(); ++i) {
    auto row = weights.row(i);
    const double sum = std::accumulate(row.begin(), row.end(), 0.0);
    if (std::abs(sum - 1.0) > tolerance) return false;
  }
  return true;
}

Matrix normalize_rows(Matrix weights) {
  for (std::size_t i = 0; i < weights.rows(); ++i) {
    auto row = weights.row(i);
    const double sum = std::accumulate(row.begin(), row.end(), 0.0);
    if (sum <= 0.0) throw ParameterError("cannot normalize a nonpositive row");
    for (double& w : row) w /= sum;
  }
  return weights;
}

void validate_bids(const Matrix& bids, const GameConfig& config) {
  if (bids.rows() != config.users || bids.cols() != config.machines)
    throw DimensionError("bid matrix shape does not match the game");
  for (std::size_t i = 0; i < bids.rows(); ++i) {
    auto row = bids.row(i);
    double sum = 0.0;
    std::size_t support = 0;
    for (double x : row) {
      if (!(x >= 0.0) || !std::isfinite(x)) throw ParameterError("bids must be finite and >= 0");
      sum += x;
      if (x > 0.0) ++support;
    }
    if (std::abs(sum - config.budgets[i]) > tol::kRowSum)
      throw ParameterError("bid row does not sum to the budget");
    if (support > config.parallelism[i])
      throw ParameterError("bid row exceeds the parallelism bound");
  }
}

}  // namespace propshare
