#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "propshare/dynamics.hpp"
#include "propshare/game.hpp"
#include "propshare/matrix.hpp"

namespace propshare {

enum class PreferenceModel { kUniform, kCorrelated };
enum class StrategyKind { kBestResponse, kLocalSearch, kGreedy };

std::string to_string(PreferenceModel model);
std::string to_string(StrategyKind strategy);
PreferenceModel preference_model_from(const std::string& name);
StrategyKind strategy_from(const std::string& name);

// i.i.d. U(0,1) weights, rows normalized to sum 1. Deterministic per seed;
// draws come from the child stream (seed, purpose, m, n).
Matrix generate_uniform_preferences(std::size_t users, std::size_t machines,
                                    std::uint64_t seed);

// w_ij = p_i . q_j for user/machine resource profiles drawn i.i.d. from
// U(0,1)^dims (users first, then machines), rows normalized to sum 1.
Matrix generate_correlated_preferences(std::size_t users, std::size_t machines,
                                       std::size_t profile_dims, std::uint64_t seed);

// Baseline: everyone bids proportionally to their weights. Returns bids and
// the resulting allocation.
std::pair<Matrix, Matrix> weight_proportional_allocation(const Matrix& weights,
                                                         std::span<const double> budgets);

struct ScenarioConfig {
  std::size_t users = 0;
  std::size_t machines = 0;
  PreferenceModel model = PreferenceModel::kUniform;
  StrategyKind strategy = StrategyKind::kBestResponse;
  std::size_t parallelism = kUnbounded;  // uniform bound for every user
  std::size_t profile_dims = 3;
  ConvergenceCriterion criterion;
  GreedyParams greedy;
  double epsilon = 1e-9;  // reservation used while bidding
  std::uint64_t seed = 1;
};

struct SweepRow {
  std::size_t users = 0;
  std::uint64_t seed = 0;
  StrategyKind strategy = StrategyKind::kBestResponse;
  PreferenceModel model = PreferenceModel::kUniform;
  std::size_t parallelism = kUnbounded;
  bool converged = false;
  std::size_t iterations = 0;         // iterations-to-converge, or the cap
  std::ptrdiff_t stabilization = -1;  // -1: never stabilized
  double efficiency = 0.0;
  double uniformity = 0.0;
  double envy = 0.0;  // clamped
  double eff_opt = 0.0;
  double eff_wprop = 0.0;
  double unif_opt = 0.0;
  double unif_wprop = 0.0;
  double envy_opt = 0.0;
  double envy_wprop = 0.0;
};

struct ScenarioResult {
  SweepRow row;
  DynamicsTrace trace;
};

// Builds preferences from (seed, model), runs the dynamics and evaluates the
// final allocation plus the social-optimum and weight-proportional baselines.
ScenarioResult run_scenario(const ScenarioConfig& config);

struct SweepFailure {
  std::size_t users = 0;
  std::uint64_t seed = 0;
  std::string message;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // sorted by (users, seed)
  std::vector<SweepFailure> failures;
};

using ScenarioObserver =
    std::function<void(const ScenarioConfig&, const ScenarioResult&)>;

// Runs the template once per (user count, seed); individual failures are
// recorded and the sweep continues.
SweepResult run_sweep(const ScenarioConfig& base, const std::vector<std::size_t>& user_counts,
                      const std::vector<std::uint64_t>& seeds,
                      const ScenarioObserver& observer = {});

// Seeds used for `replicates` repetitions at base seed s: s, s+1, ...
std::vector<std::uint64_t> replicate_seeds(std::uint64_t base, std::size_t replicates);

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

inline constexpr const char* kSweepCsvHeader =
    "m,seed,strategy,model,delta,converged,iters,stab_iters,efficiency,uniformity,envy,"
    "eff_opt,eff_wprop,unif_opt,unif_wprop,envy_opt,envy_wprop";

// Doubles are written with shortest round-trip formatting; delta is the
// bound or "inf"; line endings are '\n'.
std::string to_csv(const SweepResult& result);
void emit_csv(const SweepResult& result, const std::filesystem::path& path);

// Per-iteration welfare/metric series of a single run.
std::string trace_to_csv(const DynamicsTrace& trace);
void emit_trace_csv(const DynamicsTrace& trace, const std::filesystem::path& path);

// Mean of a row field per user count, rows ordered by m ascending.
using RowField = double SweepRow::*;
std::vector<std::pair<std::size_t, double>> mean_by_users(const SweepResult& result,
                                                          RowField field);

// Writes one two-column "m value" text file per metric:
// <prefix>.<metric>.dat for efficiency, uniformity, envy, the four baseline
// columns and iterations.
void emit_plot_series(const SweepResult& result, const std::string& prefix);

struct SvgSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

// Minimal standalone SVG line chart (axes, ticks, legend); no dependencies.
void write_svg_chart(const std::filesystem::path& path, const std::string& title,
                     const std::vector<SvgSeries>& series);

// Shortest round-trip decimal representation (std::to_chars).
std::string format_double(double value);

}  // namespace propshare
