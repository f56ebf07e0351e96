#pragma once

#include <span>
#include <vector>

#include "propshare/game.hpp"
#include "propshare/matrix.hpp"

namespace propshare {

// U_i(r_i) for every user, using each user's own parallelism bound.
std::vector<double> user_utilities(const Matrix& weights, const Matrix& alloc,
                                   const std::vector<std::size_t>& bounds);

double welfare(const Matrix& weights, const Matrix& alloc,
               const std::vector<std::size_t>& bounds);

// welfare / optimum; optimum must be positive.
double efficiency(const Matrix& weights, const Matrix& alloc,
                  const std::vector<std::size_t>& bounds, double optimum);

// min utility / max utility; 0 when the max is not positive.
double utility_uniformity(std::span<const double> utilities);

struct EnvyFreeness {
  // min over ordered pairs i != j of U_i(r_i)/U_i(r_j), skipping pairs whose
  // denominator is zero; 1 when every pair is skipped. raw >= 1 means no user
  // prefers another's bundle.
  double raw = 1.0;
  double reported = 1.0;  // raw clamped to <= 1 for plotting/comparison
};

// Bundles are valued with the envier's weights and parallelism bound.
EnvyFreeness envy_freeness(const Matrix& weights, const Matrix& alloc,
                           const std::vector<std::size_t>& bounds);

struct MetricsReport {
  double welfare = 0.0;
  double efficiency = 0.0;
  double uniformity = 0.0;
  double envy = 1.0;  // clamped
  double envy_raw = 1.0;
};

MetricsReport compute_metrics(const Matrix& weights, const Matrix& alloc,
                              const std::vector<std::size_t>& bounds, double optimum);

}  // namespace propshare
