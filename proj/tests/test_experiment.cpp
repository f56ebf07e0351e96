#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "propshare/errors.hpp"
#include "propshare/experiment.hpp"
#include "propshare/metrics.hpp"
#include "support/oracles.hpp"

using namespace propshare;

namespace {

double row_mean_cosine(const Matrix& weights) {
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < weights.rows(); ++a) {
    for (std::size_t b = a + 1; b < weights.rows(); ++b) {
      double dot = 0.0, na = 0.0, nb = 0.0;
      for (std::size_t j = 0; j < weights.cols(); ++j) {
        dot += weights(a, j) * weights(b, j);
        na += weights(a, j) * weights(a, j);
        nb += weights(b, j) * weights(b, j);
      }
      total += dot / std::sqrt(na * nb);
      ++pairs;
    }
  }
  return total / static_cast<double>(pairs);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::stringstream stream(line);
  std::string field;
  while (std::getline(stream, field, sep)) fields.push_back(field);
  return fields;
}

}  // namespace

TEST_CASE("uniform preferences are normalized and reproducible") {
  const Matrix a = generate_uniform_preferences(6, 9, 123);
  const Matrix b = generate_uniform_preferences(6, 9, 123);
  const Matrix c = generate_uniform_preferences(6, 9, 124);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto row = a.row(i);
    CHECK(std::accumulate(row.begin(), row.end(), 0.0) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("uniform entries center on 1/n") {
  const std::size_t m = 10000, n = 10;
  const Matrix weights = generate_uniform_preferences(m, n, 5);
  // Mean of one fixed column against its own sampling error.
  double mean = 0.0;
  for (std::size_t i = 0; i < m; ++i) mean += weights(i, 0);
  mean /= static_cast<double>(m);
  double var = 0.0;
  for (std::size_t i = 0; i < m; ++i) var += (weights(i, 0) - mean) * (weights(i, 0) - mean);
  var /= static_cast<double>(m - 1);
  const double stderr_mean = std::sqrt(var / static_cast<double>(m));
  CHECK(std::abs(mean - 1.0 / static_cast<double>(n)) <= 3.0 * stderr_mean);
}

TEST_CASE("one-dimensional profiles collapse to identical rows") {
  const Matrix weights = generate_correlated_preferences(5, 7, 1, 42);
  for (std::size_t i = 1; i < weights.rows(); ++i)
    for (std::size_t j = 0; j < weights.cols(); ++j)
      CHECK(weights(i, j) == doctest::Approx(weights(0, j)).epsilon(1e-12));
}

TEST_CASE("correlated rows are more aligned than uniform rows") {
  const Matrix uniform = generate_uniform_preferences(100, 100, 11);
  const Matrix correlated = generate_correlated_preferences(100, 100, 3, 11);
  CHECK(row_mean_cosine(correlated) > row_mean_cosine(uniform));
}

TEST_CASE("weight-proportional allocation baseline") {
  const Matrix equal = Matrix::from_rows({{0.5, 0.5}, {0.5, 0.5}});
  const std::vector<double> budgets{1.0, 1.0};
  const auto [bids, alloc] = weight_proportional_allocation(equal, budgets);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(alloc(i, j) == doctest::Approx(0.5));

  const Matrix opposite = Matrix::from_rows({{0.7, 0.3}, {0.3, 0.7}});
  const auto [obids, oalloc] = weight_proportional_allocation(opposite, budgets);
  CHECK(oalloc(0, 0) == doctest::Approx(0.7));
  CHECK(utility_linear(opposite.row(0), oalloc.row(0)) == doctest::Approx(0.58));
}

TEST_CASE("small sweep bookkeeping") {
  ScenarioConfig base;
  base.machines = 6;
  const SweepResult result =
      run_sweep(base, {4, 2, 3}, replicate_seeds(10, 2));
  REQUIRE(result.rows.size() == 6);
  CHECK(result.failures.empty());

  // Rows sorted by (m, seed).
  for (std::size_t r = 1; r < result.rows.size(); ++r) {
    const auto& prev = result.rows[r - 1];
    const auto& next = result.rows[r];
    CHECK((prev.users < next.users ||
           (prev.users == next.users && prev.seed < next.seed)));
  }
  for (const SweepRow& row : result.rows) {
    CHECK(row.efficiency >= 0.0);
    CHECK(row.efficiency <= 1.0 + 1e-9);
    CHECK(row.eff_opt == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("equilibrium beats the weight-proportional baseline on averages") {
  ScenarioConfig base;
  base.machines = 30;
  const SweepResult result = run_sweep(base, {5, 10}, replicate_seeds(1, 3));
  double eff = 0.0, wprop = 0.0;
  for (const SweepRow& row : result.rows) {
    eff += row.efficiency;
    wprop += row.eff_wprop;
  }
  CHECK(eff > wprop);
}

TEST_CASE("csv emission matches the schema") {
  const SweepResult empty;
  CHECK(to_csv(empty) == std::string(kSweepCsvHeader) + "\n");

  ScenarioConfig base;
  base.machines = 5;
  const SweepResult one = run_sweep(base, {3}, {7});
  const std::string csv = to_csv(one);
  const auto lines = split(csv, '\n');
  REQUIRE(lines.size() == 2);  // header + row (trailing newline dropped by split)
  CHECK(lines[0] == kSweepCsvHeader);

  const auto fields = split(lines[1], ',');
  REQUIRE(fields.size() == 17);
  CHECK(fields[0] == "3");
  CHECK(fields[1] == "7");
  CHECK(fields[2] == "br");
  CHECK(fields[3] == "uniform");
  CHECK(fields[4] == "inf");
  CHECK((fields[5] == "0" || fields[5] == "1"));
  // Numeric fields round-trip exactly through shortest formatting.
  CHECK(std::stod(fields[8]) == one.rows[0].efficiency);
  CHECK(std::stod(fields[9]) == one.rows[0].uniformity);
  CHECK(std::stod(fields[10]) == one.rows[0].envy);
  CHECK(format_double(std::stod(fields[16])) == fields[16]);
}

TEST_CASE("identical sweeps produce identical csv bytes") {
  ScenarioConfig base;
  base.machines = 8;
  const SweepResult a = run_sweep(base, {2, 5}, replicate_seeds(3, 2));
  const SweepResult b = run_sweep(base, {2, 5}, replicate_seeds(3, 2));
  CHECK(to_csv(a) == to_csv(b));
}

TEST_CASE("plot series are two-column and m-ascending") {
  ScenarioConfig base;
  base.machines = 6;
  const SweepResult result = run_sweep(base, {5, 2, 3}, replicate_seeds(1, 2));
  const auto dir = std::filesystem::temp_directory_path() / "propshare_plot_test";
  std::filesystem::create_directories(dir);
  const std::string prefix = (dir / "series").string();
  emit_plot_series(result, prefix);

  std::ifstream file(prefix + ".efficiency.dat");
  REQUIRE(file.good());
  std::vector<double> ms;
  std::string line;
  while (std::getline(file, line)) {
    const auto cols = split(line, ' ');
    REQUIRE(cols.size() == 2);
    ms.push_back(std::stod(cols[0]));
  }
  REQUIRE(ms.size() == 3);
  CHECK(std::is_sorted(ms.begin(), ms.end()));
  std::filesystem::remove_all(dir);
}

TEST_CASE("trace csv carries one line per iteration") {
  ScenarioConfig config;
  config.users = 3;
  config.machines = 4;
  config.seed = 2;
  const ScenarioResult result = run_scenario(config);
  const std::string csv = trace_to_csv(result.trace);
  const auto lines = split(csv, '\n');
  CHECK(lines.size() == result.trace.snapshots.size() + 1);
  CHECK(lines[0] == "iter,welfare,efficiency,uniformity,envy");
}

TEST_CASE("svg chart writer emits well-formed markup") {
  const auto path = std::filesystem::temp_directory_path() / "propshare_chart.svg";
  write_svg_chart(path, "efficiency",
                  {{"equilibrium", {{5, 0.9}, {10, 0.91}, {20, 0.9}}},
                   {"baseline", {{5, 0.6}, {10, 0.62}, {20, 0.6}}}});
  std::ifstream file(path);
  REQUIRE(file.good());
  std::stringstream buffer;
  buffer << file.rdbuf();
  const std::string svg = buffer.str();
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("equilibrium") != std::string::npos);
  std::filesystem::remove(path);
}

TEST_CASE("scenario failures are recorded, not fatal") {
  ScenarioConfig base;
  base.machines = 4;
  base.parallelism = 9;  // invalid: above the machine count
  const SweepResult result = run_sweep(base, {3}, {1});
  CHECK(result.rows.empty());
  REQUIRE(result.failures.size() == 1);
  CHECK(result.failures[0].users == 3);
}

TEST_CASE("name round-trips") {
  for (const auto model : {PreferenceModel::kUniform, PreferenceModel::kCorrelated})
    CHECK(preference_model_from(to_string(model)) == model);
  for (const auto strategy :
       {StrategyKind::kBestResponse, StrategyKind::kLocalSearch, StrategyKind::kGreedy})
    CHECK(strategy_from(to_string(strategy)) == strategy);
  CHECK_THROWS_AS((void)strategy_from("nope"), ParameterError);
}
