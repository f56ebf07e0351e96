#include "propshare/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "propshare/errors.hpp"
#include "propshare/metrics.hpp"
#include "propshare/optimum.hpp"
#include "propshare/rng.hpp"

namespace propshare {

std::string to_string(PreferenceModel model) {
  return model == PreferenceModel::kUniform ? "uniform" : "correlated";
}

std::string to_string(StrategyKind strategy) {
  switch (strategy) {
    case StrategyKind::kBestResponse: return "br";
    case StrategyKind::kLocalSearch: return "ls";
    case StrategyKind::kGreedy: return "greedy";
  }
  return "br";
}

PreferenceModel preference_model_from(const std::string& name) {
  if (name == "uniform") return PreferenceModel::kUniform;
  if (name == "correlated") return PreferenceModel::kCorrelated;
  throw ParameterError("unknown preference model: " + name);
}

StrategyKind strategy_from(const std::string& name) {
  if (name == "br") return StrategyKind::kBestResponse;
  if (name == "ls") return StrategyKind::kLocalSearch;
  if (name == "greedy") return StrategyKind::kGreedy;
  throw ParameterError("unknown strategy: " + name);
}

namespace {

Matrix normalize_or_even(Matrix weights) {
  for (std::size_t i = 0; i < weights.rows(); ++i) {
    auto row = weights.row(i);
    const double sum = std::accumulate(row.begin(), row.end(), 0.0);
    if (sum > 0.0) {
      for (double& w : row) w /= sum;
    } else {
      for (double& w : row) w = 1.0 / static_cast<double>(row.size());
    }
  }
  return weights;
}

}  // namespace

Matrix generate_uniform_preferences(std::size_t users, std::size_t machines,
                                    std::uint64_t seed) {
  if (users == 0 || machines == 0) throw ParameterError("need at least one user and machine");
  auto gen = rng::engine(rng::derive(seed, {rng::kStreamUniformPrefs, users, machines}));
  Matrix weights(users, machines);
  for (std::size_t i = 0; i < users; ++i)
    for (std::size_t j = 0; j < machines; ++j) weights(i, j) = rng::uniform01(gen);
  return normalize_or_even(std::move(weights));
}

Matrix generate_correlated_preferences(std::size_t users, std::size_t machines,
                                       std::size_t profile_dims, std::uint64_t seed) {
  if (users == 0 || machines == 0) throw ParameterError("need at least one user and machine");
  if (profile_dims < 1) throw ParameterError("profile_dims must be >= 1");
  auto gen = rng::engine(
      rng::derive(seed, {rng::kStreamCorrelatedPrefs, users, machines, profile_dims}));

  // User profiles first, then machine profiles, row-major.
  Matrix user_profiles(users, profile_dims);
  for (std::size_t i = 0; i < users; ++i)
    for (std::size_t d = 0; d < profile_dims; ++d) user_profiles(i, d) = rng::uniform01(gen);
  Matrix machine_profiles(machines, profile_dims);
  for (std::size_t j = 0; j < machines; ++j)
    for (std::size_t d = 0; d < profile_dims; ++d) machine_profiles(j, d) = rng::uniform01(gen);

  Matrix weights(users, machines);
  for (std::size_t i = 0; i < users; ++i)
    for (std::size_t j = 0; j < machines; ++j)
      weights(i, j) = utility_linear(user_profiles.row(i), machine_profiles.row(j));
  return normalize_or_even(std::move(weights));
}

std::pair<Matrix, Matrix> weight_proportional_allocation(const Matrix& weights,
                                                         std::span<const double> budgets) {
  Matrix bids = init_bids_weight_proportional(weights, budgets);
  Matrix alloc = compute_allocation(bids);
  return {std::move(bids), std::move(alloc)};
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
  if (config.users == 0 || config.machines == 0)
    throw ParameterError("need at least one user and machine");
  if (config.parallelism != kUnbounded &&
      (config.parallelism < 1 || config.parallelism > config.machines))
    throw ParameterError("parallelism bound outside [1, machines]");

  const Matrix weights =
      config.model == PreferenceModel::kUniform
          ? generate_uniform_preferences(config.users, config.machines, config.seed)
          : generate_correlated_preferences(config.users, config.machines,
                                            config.profile_dims, config.seed);

  GameConfig game = GameConfig::symmetric(config.users, config.machines);
  game.epsilon = config.epsilon;
  if (config.parallelism != kUnbounded)
    game.parallelism.assign(config.users, config.parallelism);

  const UpdateRule rule = config.strategy == StrategyKind::kGreedy
                              ? greedy_rule(config.greedy)
                              : best_response_rule();

  ScenarioResult result;
  result.trace = run_dynamics(game, weights, rule, config.criterion);

  SweepRow& row = result.row;
  row.users = config.users;
  row.seed = config.seed;
  row.strategy = config.strategy;
  row.model = config.model;
  row.parallelism = config.parallelism;
  row.converged = result.trace.converged;
  row.iterations = result.trace.converged_iteration.value_or(config.criterion.max_iterations);
  row.stabilization =
      result.trace.stabilization_iteration
          ? static_cast<std::ptrdiff_t>(*result.trace.stabilization_iteration)
          : -1;

  const IterationSnapshot& final_state = result.trace.final_state();
  row.efficiency = final_state.efficiency;
  row.uniformity = final_state.uniformity;
  row.envy = final_state.envy;

  // Baselines share the preference matrix and the optimum welfare.
  const double optimum = result.trace.optimum;
  Matrix opt_alloc =
      game.bounded()
          ? matching_allocation(social_optimum_bounded(weights, game.parallelism),
                                config.users, config.machines)
          : assignment_allocation(social_optimum_unbounded(weights), config.users,
                                  config.machines);
  const MetricsReport opt = compute_metrics(weights, opt_alloc, game.parallelism, optimum);
  row.eff_opt = opt.efficiency;
  row.unif_opt = opt.uniformity;
  row.envy_opt = opt.envy;

  const Matrix wprop_bids = init_bids_weight_proportional(
      weights, game.budgets, game.bounded() ? &game.parallelism : nullptr);
  const MetricsReport wprop = compute_metrics(weights, compute_allocation(wprop_bids),
                                              game.parallelism, optimum);
  row.eff_wprop = wprop.efficiency;
  row.unif_wprop = wprop.uniformity;
  row.envy_wprop = wprop.envy;
  return result;
}

std::vector<std::uint64_t> replicate_seeds(std::uint64_t base, std::size_t replicates) {
  std::vector<std::uint64_t> seeds(replicates);
  std::iota(seeds.begin(), seeds.end(), base);
  return seeds;
}

SweepResult run_sweep(const ScenarioConfig& base, const std::vector<std::size_t>& user_counts,
                      const std::vector<std::uint64_t>& seeds,
                      const ScenarioObserver& observer) {
  SweepResult result;
  for (std::size_t users : user_counts) {
    for (std::uint64_t seed : seeds) {
      ScenarioConfig config = base;
      config.users = users;
      config.seed = seed;
      try {
        ScenarioResult scenario = run_scenario(config);
        if (observer) observer(config, scenario);
        result.rows.push_back(scenario.row);
      } catch (const std::exception& e) {
        result.failures.push_back({users, seed, e.what()});
      }
    }
  }
  std::sort(result.rows.begin(), result.rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.users != b.users) return a.users < b.users;
    return a.seed < b.seed;
  });
  return result;
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

std::string format_double(double value) {
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

namespace {

std::string delta_field(std::size_t parallelism) {
  return parallelism == kUnbounded ? "inf" : std::to_string(parallelism);
}

void append_row(std::string& out, const SweepRow& row) {
  out += std::to_string(row.users);
  out += ',';
  out += std::to_string(row.seed);
  out += ',';
  out += to_string(row.strategy);
  out += ',';
  out += to_string(row.model);
  out += ',';
  out += delta_field(row.parallelism);
  out += ',';
  out += row.converged ? '1' : '0';
  out += ',';
  out += std::to_string(row.iterations);
  out += ',';
  out += std::to_string(row.stabilization);
  for (double value : {row.efficiency, row.uniformity, row.envy, row.eff_opt, row.eff_wprop,
                       row.unif_opt, row.unif_wprop, row.envy_opt, row.envy_wprop}) {
    out += ',';
    out += format_double(value);
  }
  out += '\n';
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  file << contents;
  if (!file) throw IoError("failed writing " + path.string());
}

}  // namespace

std::string to_csv(const SweepResult& result) {
  std::string out = kSweepCsvHeader;
  out += '\n';
  for (const SweepRow& row : result.rows) append_row(out, row);
  return out;
}

void emit_csv(const SweepResult& result, const std::filesystem::path& path) {
  write_file(path, to_csv(result));
}

std::string trace_to_csv(const DynamicsTrace& trace) {
  std::string out = "iter,welfare,efficiency,uniformity,envy\n";
  for (std::size_t t = 0; t < trace.snapshots.size(); ++t) {
    const IterationSnapshot& snap = trace.snapshots[t];
    out += std::to_string(t);
    for (double value : {snap.welfare, snap.efficiency, snap.uniformity, snap.envy}) {
      out += ',';
      out += format_double(value);
    }
    out += '\n';
  }
  return out;
}

void emit_trace_csv(const DynamicsTrace& trace, const std::filesystem::path& path) {
  write_file(path, trace_to_csv(trace));
}

std::vector<std::pair<std::size_t, double>> mean_by_users(const SweepResult& result,
                                                          RowField field) {
  std::map<std::size_t, std::pair<double, std::size_t>> sums;
  for (const SweepRow& row : result.rows) {
    auto& [sum, count] = sums[row.users];
    sum += row.*field;
    ++count;
  }
  std::vector<std::pair<std::size_t, double>> means;
  means.reserve(sums.size());
  for (const auto& [users, sum_count] : sums)
    means.emplace_back(users, sum_count.first / static_cast<double>(sum_count.second));
  return means;
}

void emit_plot_series(const SweepResult& result, const std::string& prefix) {
  auto write_series = [&](const std::string& name,
                          const std::vector<std::pair<std::size_t, double>>& points) {
    std::string out;
    for (const auto& [users, value] : points) {
      out += std::to_string(users);
      out += ' ';
      out += format_double(value);
      out += '\n';
    }
    write_file(prefix + "." + name + ".dat", out);
  };

  const std::pair<const char*, RowField> fields[] = {
      {"efficiency", &SweepRow::efficiency}, {"uniformity", &SweepRow::uniformity},
      {"envy", &SweepRow::envy},             {"eff_opt", &SweepRow::eff_opt},
      {"eff_wprop", &SweepRow::eff_wprop},   {"unif_opt", &SweepRow::unif_opt},
      {"unif_wprop", &SweepRow::unif_wprop}, {"envy_opt", &SweepRow::envy_opt},
      {"envy_wprop", &SweepRow::envy_wprop},
  };
  for (const auto& [name, field] : fields) write_series(name, mean_by_users(result, field));

  // Iterations-to-converge, averaged the same way.
  std::map<std::size_t, std::pair<double, std::size_t>> sums;
  for (const SweepRow& row : result.rows) {
    auto& [sum, count] = sums[row.users];
    sum += static_cast<double>(row.iterations);
    ++count;
  }
  std::vector<std::pair<std::size_t, double>> iters;
  for (const auto& [users, sum_count] : sums)
    iters.emplace_back(users, sum_count.first / static_cast<double>(sum_count.second));
  write_series("iters", iters);
}

void write_svg_chart(const std::filesystem::path& path, const std::string& title,
                     const std::vector<SvgSeries>& series) {
  constexpr double kWidth = 640, kHeight = 420;
  constexpr double kLeft = 60, kRight = 20, kTop = 40, kBottom = 40;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  bool first = true;
  for (const SvgSeries& s : series) {
    for (const auto& [x, y] : s.points) {
      if (first) {
        x_min = x_max = x;
        y_min = y_max = y;
        first = false;
      }
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  if (x_max <= x_min) x_max = x_min + 1;
  if (y_max <= y_min) y_max = y_min + 1;

  auto sx = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * plot_w; };
  auto sy = [&](double y) { return kTop + plot_h - (y - y_min) / (y_max - y_min) * plot_h; };

  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b"};
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << kWidth << ' '
      << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w
      << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kTop + plot_h << "\" stroke=\"black\"/>\n";
  auto tick_label = [&](double x, double y, const std::string& text, bool vertical) {
    svg << "<text x=\"" << x << "\" y=\"" << y << "\" text-anchor=\""
        << (vertical ? "end" : "middle") << "\" font-family=\"sans-serif\" "
        << "font-size=\"11\">" << text << "</text>\n";
  };
  tick_label(kLeft, kHeight - 12, format_double(x_min), false);
  tick_label(kLeft + plot_w, kHeight - 12, format_double(x_max), false);
  tick_label(kLeft - 6, kTop + plot_h, format_double(y_min), true);
  tick_label(kLeft - 6, kTop + 10, format_double(y_max), true);

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % std::size(kColors)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : series[s].points) svg << sx(x) << ',' << sy(y) << ' ';
    svg << "\"/>\n";
    svg << "<text x=\"" << kLeft + plot_w - 4 << "\" y=\"" << kTop + 14 * (s + 1)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\""
        << color << "\">" << series[s].label << "</text>\n";
  }
  svg << "</svg>\n";
  write_file(path, svg.str());
}

}  // namespace propshare
