#include "permcast/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "permcast/random.hpp"
#include "permcast/stats.hpp"

namespace permcast {
namespace {

using nlohmann::json;

const std::vector<std::string> kKnownKeys{"scenario", "shape",   "shapes", "bounds", "field",  "trials",
                                          "seed",     "epsilon", "s",      "delta",  "alpha",  "rho",
                                          "gamma",    "theta",   "samples_per_estimate", "matrix_file",
                                          "output",   "threads"};

Shape parse_shape(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    throw ValidationError("shape must be a pair [n, m] of integers");
  }
  const Shape s{j[0].get<Eigen::Index>(), j[1].get<Eigen::Index>()};
  if (s.m < 1 || s.n < s.m) throw ValidationError("shape requires 1 <= m <= n");
  return s;
}

double parse_number(const json& j, const char* key) {
  if (!j.is_number()) throw ValidationError(std::string(key) + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ValidationError(std::string(key) + " must be finite");
  return v;
}

std::uint64_t parse_seed(const json& j) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer()) {
    const auto v = j.get<std::int64_t>();
    if (v < 0) throw ValidationError("seed must be non-negative");
    return static_cast<std::uint64_t>(v);
  }
  if (j.is_string()) {
    const auto text = j.get<std::string>();
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
      v = std::stoull(text, &used, 10);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size() || text.front() == '-') throw ValidationError("seed string is not a u64");
    return v;
  }
  throw ValidationError("seed must be an unsigned integer");
}

std::size_t parse_count(const json& j, const char* key) {
  if (j.is_number_unsigned()) return j.get<std::size_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::size_t>(j.get<std::int64_t>());
  throw ValidationError(std::string(key) + " must be a non-negative integer");
}

void put_optional(json& j, const char* key, const std::optional<double>& v) {
  if (v) j[key] = *v;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json named_values_json(const std::vector<NamedValue>& values) {
  json out = json::object();
  for (const auto& nv : values) out[nv.name] = std::isfinite(nv.value) ? json(nv.value) : json(format_double(nv.value));
  return out;
}

double lookup(const std::vector<NamedValue>& values, std::string_view name, const char* what) {
  for (const auto& nv : values) {
    if (nv.name == name) return nv.value;
  }
  throw std::out_of_range(std::string("no ") + what + " named " + std::string(name));
}

}  // namespace

ScenarioConfig parse_config(const json& j) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::ranges::find(kKnownKeys, key) == kKnownKeys.end()) throw ValidationError("unknown config key: " + key);
  }
  ScenarioConfig c;
  if (!j.contains("scenario") || !j["scenario"].is_string()) throw ValidationError("config needs a scenario name");
  c.scenario = j["scenario"].get<std::string>();
  if (j.contains("shape") && j.contains("shapes")) throw ValidationError("give either shape or shapes, not both");
  if (j.contains("shape")) c.shapes.push_back(parse_shape(j["shape"]));
  if (j.contains("shapes")) {
    if (!j["shapes"].is_array() || j["shapes"].empty()) throw ValidationError("shapes must be a nonempty list");
    for (const auto& s : j["shapes"]) c.shapes.push_back(parse_shape(s));
  }
  if (j.contains("bounds")) {
    const auto& b = j["bounds"];
    if (b.is_array() && b.size() == 2) {
      c.bounds = {parse_number(b[0], "bounds"), parse_number(b[1], "bounds")};
    } else if (b.is_object() && b.contains("lower") && b.contains("upper") && b.size() == 2) {
      c.bounds = {parse_number(b["lower"], "bounds"), parse_number(b["upper"], "bounds")};
    } else {
      throw ValidationError("bounds must be [lower, upper]");
    }
    c.bounds.validate();
  }
  if (j.contains("field")) {
    if (!j["field"].is_string()) throw ValidationError("field must be a string");
    c.field = parse_field(j["field"].get<std::string>());
  }
  if (j.contains("trials")) c.trials = parse_count(j["trials"], "trials");
  if (j.contains("seed")) c.seed = parse_seed(j["seed"]);
  const auto opt = [&](const char* key, std::optional<double>& slot) {
    if (j.contains(key)) slot = parse_number(j[key], key);
  };
  opt("epsilon", c.epsilon);
  opt("s", c.s);
  opt("delta", c.delta);
  opt("alpha", c.alpha);
  opt("rho", c.rho);
  opt("gamma", c.gamma);
  opt("theta", c.theta);
  if (j.contains("samples_per_estimate")) c.samples_per_estimate = parse_count(j["samples_per_estimate"], "samples_per_estimate");
  if (j.contains("matrix_file")) {
    if (!j["matrix_file"].is_string()) throw ValidationError("matrix_file must be a string");
    c.matrix_file = j["matrix_file"].get<std::string>();
  }
  if (j.contains("output")) {
    if (!j["output"].is_string()) throw ValidationError("output must be a string");
    c.output = j["output"].get<std::string>();
  }
  if (j.contains("threads")) {
    if (!j["threads"].is_number_integer() || j["threads"].get<std::int64_t>() < 0) {
      throw ValidationError("threads must be a non-negative integer");
    }
    c.threads = j["threads"].get<int>();
  }
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

json to_json(const ScenarioConfig& c) {
  json j;
  j["scenario"] = c.scenario;
  if (!c.shapes.empty()) {
    json shapes = json::array();
    for (const auto& s : c.shapes) shapes.push_back({s.n, s.m});
    j["shapes"] = shapes;
  }
  j["bounds"] = {c.bounds.lower, c.bounds.upper};
  j["field"] = std::string(to_string(c.field));
  j["trials"] = c.trials;
  if (c.seed) j["seed"] = *c.seed;
  put_optional(j, "epsilon", c.epsilon);
  put_optional(j, "s", c.s);
  put_optional(j, "delta", c.delta);
  put_optional(j, "alpha", c.alpha);
  put_optional(j, "rho", c.rho);
  put_optional(j, "gamma", c.gamma);
  put_optional(j, "theta", c.theta);
  if (c.samples_per_estimate) j["samples_per_estimate"] = *c.samples_per_estimate;
  if (c.matrix_file) j["matrix_file"] = *c.matrix_file;
  if (!c.output.empty()) j["output"] = c.output;
  j["threads"] = c.threads;
  return j;
}

std::vector<Aggregate> aggregate_records(const std::vector<TrialRecord>& records) {
  std::vector<std::string> order;
  std::vector<std::vector<double>> groups;
  std::vector<std::size_t> nonfinite;
  for (const auto& r : records) {
    auto it = std::ranges::find(order, r.statistic);
    const auto idx = static_cast<std::size_t>(it - order.begin());
    if (it == order.end()) {
      order.push_back(r.statistic);
      groups.emplace_back();
      nonfinite.push_back(0);
    }
    if (std::isfinite(r.value)) {
      groups[idx].push_back(r.value);
    } else {
      nonfinite[idx]++;
    }
  }
  std::vector<Aggregate> out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    Aggregate a;
    a.statistic = order[i];
    a.count = groups[i].size();
    a.nonfinite = nonfinite[i];
    if (a.count >= 1) {
      a.mean = stats::compensated_sum(groups[i]) / static_cast<double>(a.count);
      a.quantiles = stats::reported_quantiles(groups[i]);
    }
    if (a.count >= 2) {
      const auto s = stats::summarize(groups[i]);
      a.stddev = s.stddev;
      a.standard_error = s.standard_error;
    }
    out.push_back(std::move(a));
  }
  return out;
}

const Aggregate& ScenarioResult::aggregate(std::string_view statistic) const {
  for (const auto& a : aggregates) {
    if (a.statistic == statistic) return a;
  }
  throw std::out_of_range("no statistic named " + std::string(statistic));
}

std::vector<double> ScenarioResult::values(std::string_view statistic) const {
  std::vector<double> out;
  for (const auto& r : records) {
    if (r.statistic == statistic) out.push_back(r.value);
  }
  return out;
}

double ScenarioResult::bound(std::string_view name) const { return lookup(bounds, name, "bound"); }
double ScenarioResult::tail_probability(std::string_view name) const {
  return lookup(tail_probabilities, name, "tail probability");
}
double ScenarioResult::check(std::string_view name) const { return lookup(checks, name, "check"); }

std::uint64_t trial_seed(const ScenarioConfig& config, std::size_t trial) {
  if (!config.seed) throw ValidationError("seed is required");
  return rng::derive_seed(*config.seed, rng::fnv1a(config.scenario), trial);
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"unbiasedness", "concentration",     "upper_tail",  "cutoff_concentration",
                                              "tail_statistic", "flat_distribution", "yn_coverage", "gamma_constant",
                                              "laguerre_density", "identities"};
  return names;
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
  const auto* fn = detail::find_scenario(config.scenario);
  if (fn == nullptr) throw ValidationError("unknown scenario: " + config.scenario);
  if (!config.seed) throw ValidationError("seed is required");
  if (config.trials < 1) throw ValidationError("trials must be positive");
  config.bounds.validate();

  const auto start = std::chrono::steady_clock::now();
  ScenarioResult result;
  result.config = config;
  (*fn)(config, result);
  result.aggregates = aggregate_records(result.records);
  result.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!config.output.empty()) write_results(result, config.output);
  return result;
}

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
  out << "trial,statistic,value\n";
  for (const auto& r : records) out << r.trial << ',' << r.statistic << ',' << format_double(r.value) << '\n';
}

std::vector<TrialRecord> read_trials_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "trial,statistic,value") throw ValidationError("missing trials CSV header");
  std::vector<TrialRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.rfind(',');
    if (c1 == std::string::npos || c1 == c2) throw ValidationError("malformed CSV row: " + line);
    TrialRecord r;
    r.trial = std::stoull(line.substr(0, c1));
    r.statistic = line.substr(c1 + 1, c2 - c1 - 1);
    r.value = std::strtod(line.c_str() + c2 + 1, nullptr);
    out.push_back(std::move(r));
  }
  return out;
}

json summary_json(const ScenarioResult& result) {
  json j;
  j["version"] = PERMCAST_VERSION;
  j["config"] = to_json(result.config);
  json aggs = json::array();
  for (const auto& a : result.aggregates) {
    json q = nullptr;
    if (a.quantiles) {
      q = json::object();
      for (std::size_t i = 0; i < stats::kReportedQuantiles.size(); ++i) {
        q[format_double(stats::kReportedQuantiles[i])] = (*a.quantiles)[i];
      }
    }
    aggs.push_back({{"statistic", a.statistic},
                    {"count", a.count},
                    {"nonfinite", a.nonfinite},
                    {"mean", optional_json(a.mean)},
                    {"stddev", optional_json(a.stddev)},
                    {"standard_error", optional_json(a.standard_error)},
                    {"quantiles", q}});
  }
  j["aggregates"] = aggs;
  j["tail_probabilities"] = named_values_json(result.tail_probabilities);
  j["bounds"] = named_values_json(result.bounds);
  j["checks"] = named_values_json(result.checks);
  j["duration_seconds"] = result.duration_seconds;
  return j;
}

OutputPaths write_results(const ScenarioResult& result, const std::string& prefix) {
  if (prefix.empty()) throw ValidationError("output prefix is empty");
  OutputPaths paths{prefix + ".summary.json", prefix + ".trials.csv"};
  {
    std::ofstream out(paths.trials, std::ios::binary);
    if (!out) throw IoError("cannot write " + paths.trials.string());
    write_trials_csv(out, result.records);
    if (!out) throw IoError("failed writing " + paths.trials.string());
  }
  {
    std::ofstream out(paths.summary, std::ios::binary);
    if (!out) throw IoError("cannot write " + paths.summary.string());
    out << summary_json(result).dump(2) << '\n';
    if (!out) throw IoError("failed writing " + paths.summary.string());
  }
  return paths;
}

}  // namespace permcast
