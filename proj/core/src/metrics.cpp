#include "propshare/metrics.hpp"

#include <algorithm>

#include "propshare/errors.hpp"

namespace propshare {

std::vector<double> user_utilities(const Matrix& weights, const Matrix& alloc,
                                   const std::vector<std::size_t>& bounds) {
  if (weights.rows() != alloc.rows() || weights.cols() != alloc.cols())
    throw DimensionError("weights/allocation shape mismatch");
  if (bounds.size() != weights.rows()) throw DimensionError("bounds size != users");
  std::vector<double> utilities(weights.rows());
  for (std::size_t i = 0; i < weights.rows(); ++i)
    utilities[i] = utility_for(weights.row(i), alloc.row(i), bounds[i]);
  return utilities;
}

double welfare(const Matrix& weights, const Matrix& alloc,
               const std::vector<std::size_t>& bounds) {
  const std::vector<double> utilities = user_utilities(weights, alloc, bounds);
  double total = 0.0;
  for (double u : utilities) total += u;
  return total;
}

double efficiency(const Matrix& weights, const Matrix& alloc,
                  const std::vector<std::size_t>& bounds, double optimum) {
  if (!(optimum > 0.0)) throw ParameterError("optimum welfare must be positive");
  return welfare(weights, alloc, bounds) / optimum;
}

double utility_uniformity(std::span<const double> utilities) {
  if (utilities.empty()) throw DimensionError("no utilities");
  const auto [lo, hi] = std::minmax_element(utilities.begin(), utilities.end());
  if (!(*hi > 0.0)) return 0.0;
  return *lo / *hi;
}

EnvyFreeness envy_freeness(const Matrix& weights, const Matrix& alloc,
                           const std::vector<std::size_t>& bounds) {
  if (weights.rows() != alloc.rows() || weights.cols() != alloc.cols())
    throw DimensionError("weights/allocation shape mismatch");
  EnvyFreeness envy;
  bool any_pair = false;
  double worst = 0.0;
  for (std::size_t i = 0; i < weights.rows(); ++i) {
    const double own = utility_for(weights.row(i), alloc.row(i), bounds[i]);
    for (std::size_t j = 0; j < weights.rows(); ++j) {
      if (i == j) continue;
      // The envied bundle is valued with the envier's weights and bound.
      const double others = utility_for(weights.row(i), alloc.row(j), bounds[i]);
      if (others <= 0.0) continue;  // a worthless bundle cannot be envied
      const double ratio = own / others;
      worst = any_pair ? std::min(worst, ratio) : ratio;
      any_pair = true;
    }
  }
  envy.raw = any_pair ? worst : 1.0;
  envy.reported = std::min(envy.raw, 1.0);
  return envy;
}

MetricsReport compute_metrics(const Matrix& weights, const Matrix& alloc,
                              const std::vector<std::size_t>& bounds, double optimum) {
  MetricsReport report;
  const std::vector<double> utilities = user_utilities(weights, alloc, bounds);
  for (double u : utilities) report.welfare += u;
  if (!(optimum > 0.0)) throw ParameterError("optimum welfare must be positive");
  report.efficiency = report.welfare / optimum;
  report.uniformity = utility_uniformity(utilities);
  const EnvyFreeness envy = envy_freeness(weights, alloc, bounds);
  report.envy = envy.reported;
  report.envy_raw = envy.raw;
  return report;
}

}  // namespace propshare
