#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "permcast/estimator.hpp"
#include "permcast/matrix.hpp"

namespace permcast {

struct Shape {
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  bool operator==(const Shape&) const = default;
};

struct ScenarioConfig {
  std::string scenario;
  std::vector<Shape> shapes;  // empty: scenario default
  EntryBounds bounds{1.0, 2.0};
  FieldKind field = FieldKind::Real;
  std::size_t trials = 0;
  std::optional<std::uint64_t> seed;
  std::optional<double> epsilon;
  std::optional<double> s;
  std::optional<double> delta;
  std::optional<double> alpha;
  std::optional<double> rho;
  std::optional<double> gamma;  // sparse-column zero fraction
  std::optional<double> theta;  // sparse-column column fraction
  std::optional<std::size_t> samples_per_estimate;
  std::optional<std::string> matrix_file;
  std::string output;
  int threads = 0;  // 0: available parallelism
};

/// Parses a config object. Unknown keys are rejected.
ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ScenarioConfig& config);

struct TrialRecord {
  std::size_t trial = 0;
  std::string statistic;
  double value = 0.0;
};

/// Aggregate of the finite values recorded under one statistic. Fields are
/// empty when there are too few values to define them.
struct Aggregate {
  std::string statistic;
  std::size_t count = 0;
  std::size_t nonfinite = 0;
  std::optional<double> mean;
  std::optional<double> stddev;
  std::optional<double> standard_error;
  std::optional<std::array<double, 5>> quantiles;
};

/// Groups records by statistic in order of first appearance.
std::vector<Aggregate> aggregate_records(const std::vector<TrialRecord>& records);

struct NamedValue {
  std::string name;
  double value = 0.0;
};

struct ScenarioResult {
  ScenarioConfig config;
  std::vector<TrialRecord> records;
  std::vector<Aggregate> aggregates;
  std::vector<NamedValue> tail_probabilities;
  std::vector<NamedValue> bounds;
  std::vector<NamedValue> checks;  // scenario-specific derived values
  double duration_seconds = 0.0;

  [[nodiscard]] const Aggregate& aggregate(std::string_view statistic) const;
  [[nodiscard]] std::vector<double> values(std::string_view statistic) const;
  [[nodiscard]] double bound(std::string_view name) const;
  [[nodiscard]] double tail_probability(std::string_view name) const;
  [[nodiscard]] double check(std::string_view name) const;
};

/// Names accepted in ScenarioConfig::scenario.
const std::vector<std::string>& scenario_names();

/// Stream seed of trial t: keyed by (master seed, scenario name, t).
std::uint64_t trial_seed(const ScenarioConfig& config, std::size_t trial);

/// Validates the config, runs the scenario and, when config.output is set,
/// writes the result files.
ScenarioResult run_scenario(const ScenarioConfig& config);

struct OutputPaths {
  std::filesystem::path summary;
  std::filesystem::path trials;
};

/// Writes `<prefix>.summary.json` and `<prefix>.trials.csv`.
OutputPaths write_results(const ScenarioResult& result, const std::string& prefix);

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records);
nlohmann::json summary_json(const ScenarioResult& result);

/// Parses a trials CSV back into records.
std::vector<TrialRecord> read_trials_csv(std::istream& in);

namespace detail {
using ScenarioFn = std::function<void(const ScenarioConfig&, ScenarioResult&)>;
const ScenarioFn* find_scenario(std::string_view name);
}  // namespace detail

}  // namespace permcast
