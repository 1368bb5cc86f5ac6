#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "permcast/estimator.hpp"
#include "permcast/exact_perm.hpp"
#include "permcast/matrix.hpp"
#include "permcast/scenario.hpp"

namespace {

using namespace permcast;

void print_value(const char* name, double v) { std::printf("%s %.17g\n", name, v); }

int cmd_run(const std::string& config_path, const std::optional<std::string>& scenario,
            const std::optional<std::uint64_t>& seed, const std::optional<std::size_t>& trials,
            const std::optional<std::string>& out, const std::optional<int>& threads) {
  ScenarioConfig config = load_config(config_path);
  if (scenario) config.scenario = *scenario;
  if (seed) config.seed = *seed;
  if (trials) config.trials = *trials;
  if (out) config.output = *out;
  if (threads) config.threads = *threads;
  const ScenarioResult result = run_scenario(config);
  if (!config.output.empty()) {
    std::printf("wrote %s.summary.json and %s.trials.csv\n", config.output.c_str(), config.output.c_str());
  }
  for (const auto& a : result.aggregates) {
    std::printf("%-32s n=%zu", a.statistic.c_str(), a.count);
    if (a.mean) std::printf(" mean=%.6g", *a.mean);
    if (a.standard_error) std::printf(" se=%.3g", *a.standard_error);
    std::printf("\n");
  }
  for (const auto& v : result.tail_probabilities) std::printf("tail   %-32s %.6g\n", v.name.c_str(), v.value);
  for (const auto& v : result.bounds) std::printf("bound  %-32s %.6g\n", v.name.c_str(), v.value);
  for (const auto& v : result.checks) std::printf("check  %-32s %.6g\n", v.name.c_str(), v.value);
  return 0;
}

int cmd_exact(const std::string& matrix_path, const std::string& method) {
  const DenseMatrix a = read_matrix_file(matrix_path);
  PermValue p;
  if (method == "naive") {
    p = perm_naive(a);
  } else if (method == "ryser") {
    p = perm_ryser(a);
  } else {
    p = perm_rect(a);
  }
  if (p.value) print_value("permanent", static_cast<double>(*p.value));
  print_value("log_permanent", p.log_value);
  return 0;
}

int cmd_estimate(const std::string& matrix_path, std::size_t trials, std::uint64_t seed, const std::string& field) {
  const DenseMatrix a = read_matrix_file(matrix_path);
  const auto est = averaged_estimate(a, trials, parse_field(field), seed);
  print_value("mean", est.mean);
  print_value("standard_error", est.standard_error);
  print_value("log_mean", est.log_mean);
  std::printf("trials %zu\n", est.trials);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian determinant estimates of matrix permanents"};
  app.require_subcommand(1);
  app.set_version_flag("--version", PERMCAST_VERSION);

  std::string config_path;
  std::optional<std::string> scenario;
  std::optional<std::uint64_t> run_seed;
  std::optional<std::size_t> run_trials;
  std::optional<std::string> out;
  std::optional<int> threads;
  auto* run = app.add_subcommand("run", "Run a named scenario from a JSON config");
  run->add_option("--config", config_path, "Scenario config file")->required();
  run->add_option("--scenario", scenario, "Override the scenario name");
  run->add_option("--seed", run_seed, "Override the master seed");
  run->add_option("--trials", run_trials, "Override the trial count");
  run->add_option("--out", out, "Output path prefix");
  run->add_option("--threads", threads, "Worker threads (0 = all)")->check(CLI::NonNegativeNumber);

  std::string matrix_path;
  std::string method = "rect";
  auto* exact = app.add_subcommand("exact", "Exact permanent of a matrix file");
  exact->add_option("--matrix", matrix_path, "Matrix file")->required();
  exact->add_option("--method", method, "naive, ryser or rect")->check(CLI::IsMember({"naive", "ryser", "rect"}));

  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::string field = "real";
  auto* estimate = app.add_subcommand("estimate", "Monte Carlo permanent estimate");
  estimate->add_option("--matrix", matrix_path, "Matrix file")->required();
  estimate->add_option("--trials", trials, "Number of determinant draws")->required();
  estimate->add_option("--seed", seed, "Master seed")->required();
  estimate->add_option("--field", field, "real or complex")->check(CLI::IsMember({"real", "complex"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) return cmd_run(config_path, scenario, run_seed, run_trials, out, threads);
    if (*exact) return cmd_exact(matrix_path, method);
    if (*estimate) return cmd_estimate(matrix_path, trials, seed, field);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
