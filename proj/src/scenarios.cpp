#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "permcast/estimator.hpp"
#include "permcast/exact_perm.hpp"
#include "permcast/flat_case.hpp"
#include "permcast/laguerre.hpp"
#include "permcast/parallel.hpp"
#include "permcast/random.hpp"
#include "permcast/scenario.hpp"
#include "permcast/spectrum.hpp"
#include "permcast/stats.hpp"

namespace permcast {
namespace {

std::string label(Eigen::Index n, Eigen::Index m) { return std::to_string(n) + "x" + std::to_string(m); }

std::string format_param(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

int thread_count(const ScenarioConfig& c) { return c.threads > 0 ? c.threads : parallel::default_concurrency(); }

std::uint64_t matrix_seed(const ScenarioConfig& c, std::size_t index) {
  return rng::derive_seed(*c.seed, rng::fnv1a(c.scenario + "/matrix"), index);
}

std::vector<Shape> shapes_or(const ScenarioConfig& c, std::vector<Shape> fallback) {
  return c.shapes.empty() ? std::move(fallback) : c.shapes;
}

double require_in(const std::optional<double>& v, double fallback, double lo, double hi, const char* name) {
  const double x = v.value_or(fallback);
  if (!(x > lo && x < hi)) {
    throw ValidationError(std::string(name) + " must lie in (" + format_param(lo) + ", " + format_param(hi) + ")");
  }
  return x;
}

void require_min_trials(const ScenarioConfig& c, std::size_t minimum) {
  if (c.trials < minimum) {
    throw ValidationError(c.scenario + " needs at least " + std::to_string(minimum) + " trials");
  }
}

PermValue exact_permanent(const DenseMatrix& a) {
  if (a.rows() <= kNaiveMaxRows) return perm_naive(a);
  return perm_rect(a);
}

struct LabelledMatrix {
  std::string label;
  DenseMatrix matrix;
};

// File matrix if given, else one generated matrix per shape.
template <class Gen>
std::vector<LabelledMatrix> scenario_matrices(const ScenarioConfig& c, std::vector<Shape> fallback, Gen&& gen) {
  std::vector<LabelledMatrix> out;
  if (c.matrix_file) {
    if (!c.shapes.empty()) throw ValidationError("matrix_file and shapes are mutually exclusive");
    DenseMatrix a = read_matrix_file(*c.matrix_file);
    out.push_back({label(a.rows(), a.cols()), std::move(a)});
    return out;
  }
  const auto shapes = shapes_or(c, std::move(fallback));
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    out.push_back({label(shapes[i].n, shapes[i].m), gen(shapes[i], i)});
  }
  return out;
}

// Runs trials in parallel; fn(seed of trial t) returns one value per entry of
// `names`. Records are appended trial-major in index order.
template <class Fn>
void collect(const ScenarioConfig& c, ScenarioResult& r, const std::vector<std::string>& names, Fn&& fn) {
  const auto rows = parallel::map_indices<std::vector<double>>(c.trials, thread_count(c), [&](std::size_t t) {
    auto values = fn(trial_seed(c, t));
    if (values.size() != names.size()) throw std::logic_error("trial returned the wrong number of statistics");
    return values;
  });
  r.records.reserve(r.records.size() + rows.size() * names.size());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (std::size_t s = 0; s < names.size(); ++s) r.records.push_back({t, names[s], rows[t][s]});
  }
}

double fraction_above(std::span<const double> xs, double threshold) {
  if (xs.empty()) return 0.0;
  const auto hits = std::ranges::count_if(xs, [&](double x) { return x > threshold; });
  return static_cast<double>(hits) / static_cast<double>(xs.size());
}

double count_zero(std::span<const double> flags) {
  return static_cast<double>(std::ranges::count(flags, 0.0));
}

void run_unbiasedness(const ScenarioConfig& c, ScenarioResult& r) {
  require_min_trials(c, 2);
  const auto mats = scenario_matrices(c, {{5, 3}}, [&](const Shape& s, std::size_t i) {
    return gen_uniform(s.n, s.m, c.bounds, matrix_seed(c, i));
  });
  std::vector<std::string> names;
  for (const auto& lm : mats) {
    names.push_back("det@" + lm.label);
    r.bounds.push_back({"perm@" + lm.label, exact_permanent(lm.matrix).value.value_or(HUGE_VAL)});
  }
  collect(c, r, names, [&](std::uint64_t seed) {
    std::vector<double> v;
    for (std::size_t i = 0; i < mats.size(); ++i) {
      v.push_back(std::exp(log_det_estimate(mats[i].matrix, c.field, rng::derive_seed(seed, i)).log_det));
    }
    return v;
  });
  for (std::size_t i = 0; i < mats.size(); ++i) {
    const auto s = stats::summarize(r.values(names[i]));
    r.checks.push_back({"z_score@" + mats[i].label, (s.mean - r.bounds[i].value) / s.standard_error});
  }
}

void run_concentration(const ScenarioConfig& c, ScenarioResult& r) {
  const double delta = require_in(c.delta, 0.1, 0.0, HUGE_VAL, "delta");
  const auto shapes = shapes_or(c, {{50, 50}, {100, 100}, {200, 200}});
  struct Case {
    std::string name;
    DenseMatrix matrix;
    double log_per;
  };
  std::vector<Case> cases;
  if (c.matrix_file) {
    if (!c.shapes.empty()) throw ValidationError("matrix_file and shapes are mutually exclusive");
    DenseMatrix a = read_matrix_file(*c.matrix_file);
    const double log_per = perm_rect(a).log_value;
    cases.push_back({"file@" + label(a.rows(), a.cols()), std::move(a), log_per});
  } else {
    const double lo = std::sqrt(c.bounds.lower);
    const double hi = std::sqrt(c.bounds.upper);
    for (std::size_t i = 0; i < shapes.size(); ++i) {
      const auto [n, m] = shapes[i];
      cases.push_back({"flat@" + label(n, m), gen_flat(n, m), perm_flat(n, m).log_value});
      auto engine = rng::make_engine(matrix_seed(c, i));
      std::uniform_real_distribution<double> draw(lo, hi);
      std::vector<double> u(static_cast<std::size_t>(n));
      std::vector<double> v(static_cast<std::size_t>(m));
      for (double& x : u) x = lo == hi ? lo : draw(engine);
      for (double& x : v) x = lo == hi ? lo : draw(engine);
      cases.push_back({"rank_one@" + label(n, m), gen_rank_one(u, v), perm_rank_one(u, v).log_value});
    }
  }
  std::vector<std::string> names;
  for (const auto& k : cases) names.push_back(k.name);
  collect(c, r, names, [&](std::uint64_t seed) {
    std::vector<double> v;
    for (std::size_t i = 0; i < cases.size(); ++i) {
      const double ld = log_det_estimate(cases[i].matrix, c.field, rng::derive_seed(seed, i)).log_det;
      v.push_back(std::abs(ld - cases[i].log_per) / static_cast<double>(cases[i].matrix.rows()));
    }
    return v;
  });
  for (const auto& name : names) r.tail_probabilities.push_back({name, fraction_above(r.values(name), delta)});
}

void run_upper_tail(const ScenarioConfig& c, ScenarioResult& r) {
  const double delta = require_in(c.delta, 0.05, 0.0, HUGE_VAL, "delta");
  const auto shapes = shapes_or(c, {{100, 100}});
  std::vector<std::string> names;
  std::vector<DenseMatrix> mats;
  std::vector<double> log_pers;
  for (const auto& [n, m] : shapes) {
    names.push_back("excess@" + label(n, m));
    mats.push_back(gen_flat(n, m));
    log_pers.push_back(perm_flat(n, m).log_value);
    r.bounds.push_back({"markov@" + label(n, m), std::exp(-2.0 * delta * static_cast<double>(n))});
  }
  collect(c, r, names, [&](std::uint64_t seed) {
    std::vector<double> v;
    for (std::size_t i = 0; i < mats.size(); ++i) {
      const double ld = log_det_estimate(mats[i], c.field, rng::derive_seed(seed, i)).log_det;
      v.push_back((ld - log_pers[i]) / static_cast<double>(mats[i].rows()));
    }
    return v;
  });
  for (const auto& name : names) r.tail_probabilities.push_back({name, fraction_above(r.values(name), 2.0 * delta)});
}

void run_cutoff_concentration(const ScenarioConfig& c, ScenarioResult& r) {
  require_min_trials(c, 2);
  const double eps = require_in(c.epsilon, 0.01, 0.0, 1.0, "epsilon");
  const auto mats = scenario_matrices(c, {{20, 10}, {40, 20}, {80, 40}}, [&](const Shape& s, std::size_t i) {
    return gen_uniform(s.n, s.m, c.bounds, matrix_seed(c, i));
  });
  std::vector<std::string> names;
  for (const auto& lm : mats) names.push_back("log_det_eps@" + lm.label);
  collect(c, r, names, [&](std::uint64_t seed) {
    std::vector<double> v;
    for (std::size_t i = 0; i < mats.size(); ++i) {
      const auto report = eigenvalues_of_Z(mats[i].matrix, c.field, rng::derive_seed(seed, i), eps);
      v.push_back(log_det_cutoff(report) / static_cast<double>(mats[i].matrix.rows()));
    }
    return v;
  });
  for (std::size_t i = 0; i < mats.size(); ++i) {
    r.checks.push_back({"stddev@" + mats[i].label, stats::summarize(r.values(names[i])).stddev});
  }
}

void run_tail_statistic(const ScenarioConfig& c, ScenarioResult& r) {
  require_min_trials(c, 2);
  const double eps = require_in(c.epsilon, 0.01, 0.0, 1.0, "epsilon");
  const bool sparse = c.gamma.has_value() || c.theta.has_value();
  if (c.s && !(*c.s > 0.0)) throw ValidationError("s must be positive");
  std::vector<LabelledMatrix> mats;
  if (sparse) {
    if (!c.gamma || !c.theta) throw ValidationError("sparse-column mode needs both gamma and theta");
    const SparseColumnSpec spec{*c.gamma, *c.theta, c.bounds};
    spec.validate();
    mats = scenario_matrices(c, {{40, 16}, {60, 24}, {80, 32}}, [&](const Shape& s, std::size_t i) {
      DenseMatrix a = gen_sparse_column(s.n, spec, matrix_seed(c, i));
      if (a.cols() != s.m) {
        throw ValidationError("sparse-column shape " + label(s.n, s.m) + " must have m = ceil(theta n) = " +
                              std::to_string(a.cols()));
      }
      return a;
    });
  } else {
    mats = scenario_matrices(c, {{12, 6}, {20, 10}}, [&](const Shape& s, std::size_t i) {
      return gen_uniform(s.n, s.m, c.bounds, matrix_seed(c, i));
    });
  }
  std::vector<std::string> names;
  for (const auto& lm : mats) {
    names.push_back("tail@" + lm.label);
    const auto n = lm.matrix.rows();
    const auto m = lm.matrix.cols();
    if (sparse) {
      r.bounds.push_back({"reference@" + lm.label, 10.0 * eps * std::abs(std::log(eps))});
    } else if (n > m + 3 && eps <= std::exp(-1.0)) {
      r.bounds.push_back({"prop31@" + lm.label, prop31_rhs(n, m, c.bounds.lower, eps)});
      r.bounds.push_back({"prop31_corrected@" + lm.label, prop31_rhs_corrected(n, m, c.bounds.lower, eps)});
    }
  }
  collect(c, r, names, [&](std::uint64_t seed) {
    std::vector<double> v;
    for (std::size_t i = 0; i < mats.size(); ++i) {
      const double s = c.s.value_or(static_cast<double>(mats[i].matrix.rows()));
      const auto report = eigenvalues_of_Z(mats[i].matrix, c.field, rng::derive_seed(seed, i), eps, s);
      v.push_back(tail_statistic(report).value);
    }
    return v;
  });
  for (std::size_t i = 0; i < mats.size(); ++i) {
    const auto values = r.values(names[i]);
    r.checks.push_back({"singular_fraction@" + mats[i].label, fraction_above(values, HUGE_VAL)});
    r.tail_probabilities.push_back({"nonzero@" + mats[i].label, fraction_above(values, 0.0)});
  }
}

void run_flat_distribution(const ScenarioConfig& c, ScenarioResult& r) {
  require_min_trials(c, 10);
  const auto shapes = shapes_or(c, {{6, 4}});
  if (shapes.size() != 1) throw ValidationError("flat_distribution takes a single shape");
  const auto [n, m] = shapes.front();
  const DenseMatrix flat = gen_flat(n, m);
  collect(c, r, {"log_det", "chi2_product", "chi2_product_shifted"}, [&](std::uint64_t seed) {
    return std::vector<double>{log_det_estimate(flat, FieldKind::Real, rng::derive_seed(seed, 0)).log_det,
                               chi2_product_sample(n, m, rng::derive_seed(seed, 1)),
                               chi2_product_sample(n + 1, m, rng::derive_seed(seed, 2))};
  });
  const auto estimates = r.values("log_det");
  const auto ks = stats::ks_two_sample(estimates, r.values("chi2_product"));
  const auto control = stats::ks_two_sample(estimates, r.values("chi2_product_shifted"));
  r.checks = {{"ks_statistic", ks.statistic},
              {"ks_p_value", ks.p_value},
              {"control_ks_statistic", control.statistic},
              {"control_ks_p_value", control.p_value}};
  const auto moments = flat_moments(n, m);
  r.bounds = {{"log_mean", moments.log_mean}, {"variance_ratio", moments.variance_ratio}};
}

void run_yn_coverage(const ScenarioConfig& c, ScenarioResult& r) {
  const auto shapes = shapes_or(c, {{6, 4}});
  if (shapes.size() != 1) throw ValidationError("yn_coverage takes a single shape");
  const auto [n, m] = shapes.front();
  const double delta = require_in(c.delta, 0.3, 0.0, HUGE_VAL, "delta");
  if (c.samples_per_estimate && c.rho) throw ValidationError("give samples_per_estimate or rho, not both");
  if (!c.samples_per_estimate && !c.rho) throw ValidationError("yn_coverage needs samples_per_estimate or rho");
  const std::size_t samples = c.samples_per_estimate ? *c.samples_per_estimate : yn_sample_count(n, *c.rho);
  if (samples < 1) throw ValidationError("samples_per_estimate must be positive");
  if (samples > kDefaultDrawBudget / c.trials) {
    throw ValidationError("draw budget exceeded: " + std::to_string(samples) + " x " + std::to_string(c.trials) +
                          " > " + std::to_string(kDefaultDrawBudget));
  }
  const DenseMatrix flat = gen_flat(n, m);
  const double log_per = perm_flat(n, m).log_value;
  collect(c, r, {"relative_error"}, [&](std::uint64_t seed) {
    stats::CompensatedSum acc;
    for (double ld : log_det_samples_serial(flat, FieldKind::Real, seed, samples)) acc.add(std::exp(ld - log_per));
    return std::vector<double>{acc.value() / static_cast<double>(samples) - 1.0};
  });
  const auto errors = r.values("relative_error");
  const auto inside = std::ranges::count_if(errors, [&](double e) { return std::abs(e) <= delta; });
  const double coverage = static_cast<double>(inside) / static_cast<double>(errors.size());
  const double failure = chebyshev_coverage_bound(n, m, delta, samples);
  r.tail_probabilities = {{"coverage", coverage}};
  r.bounds = {{"chebyshev_failure", failure}, {"coverage_lower", 1.0 - failure}};
  r.checks = {{"samples_per_estimate", static_cast<double>(samples)},
              {"binomial_se", stats::binomial_standard_error(coverage, errors.size())}};
}

void run_gamma_constant(const ScenarioConfig& c, ScenarioResult& r) {
  require_min_trials(c, 2);
  const auto shapes = shapes_or(c, {{400, 400}});
  std::vector<std::string> names;
  std::vector<DenseMatrix> mats;
  for (const auto& [n, m] : shapes) {
    if (n != m) throw ValidationError("gamma_constant needs square shapes");
    mats.push_back(gen_identity(n));
    names.push_back("real@" + std::to_string(n));
    names.push_back("complex@" + std::to_string(n));
  }
  collect(c, r, names, [&](std::uint64_t seed) {
    std::vector<double> v;
    for (std::size_t i = 0; i < mats.size(); ++i) {
      const double scale = 1.0 / static_cast<double>(mats[i].rows());
      v.push_back(scale * log_det_estimate(mats[i], FieldKind::Real, rng::derive_seed(seed, 2 * i)).log_det);
      v.push_back(scale * log_det_estimate(mats[i], FieldKind::Complex, rng::derive_seed(seed, 2 * i + 1)).log_det);
    }
    return v;
  });
  const double real_target = stats::digamma(0.5) + std::numbers::ln2;
  const double complex_target = stats::digamma(1.0);
  r.bounds = {{"real_target", real_target},
              {"complex_target", complex_target},
              {"gamma_real", std::exp(real_target)},
              {"gamma_complex", std::exp(complex_target)}};
}

void run_laguerre_density(const ScenarioConfig& c, ScenarioResult& r) {
  const auto shapes = shapes_or(c, {{50, 50}});
  if (shapes.size() != 1 || shapes.front().n != shapes.front().m) {
    throw ValidationError("laguerre_density takes a single square shape");
  }
  const Eigen::Index n = shapes.front().n;
  if (c.alpha && !(*c.alpha >= 0.0 && *c.alpha < 1.0)) throw ValidationError("alpha must lie in [0, 1)");

  const auto eigs = parallel::map_indices<std::vector<double>>(c.trials, thread_count(c), [&](std::size_t t) {
    return complex_wishart_eigs(n, trial_seed(c, t));
  });
  std::vector<double> pooled;
  for (std::size_t t = 0; t < eigs.size(); ++t) {
    r.records.push_back({t, "mean_eigenvalue", stats::compensated_sum(eigs[t]) / static_cast<double>(n)});
    r.records.push_back({t, "min_eigenvalue_scaled", eigs[t].front() * static_cast<double>(n * n)});
    pooled.insert(pooled.end(), eigs[t].begin(), eigs[t].end());
  }
  r.checks.push_back({"histogram_l1", compare_histogram(n, pooled, c.trials, 40, 0.0, 5.0).l1_distance});

  double form_gap = 0.0;
  for (Eigen::Index k = 2; k <= 30; ++k) {
    const LaguerreContext ctx(k);
    for (int i = 0; i < 200; ++i) {
      const auto e = evaluate_density(ctx, 1e-6 * std::pow(1e7, i / 199.0));
      form_gap = std::max(form_gap, std::abs(e.sum_form - e.cd_form) / std::max(1.0, std::abs(e.sum_form)));
    }
  }
  r.checks.push_back({"max_form_gap", form_gap});

  double p1_gap = 0.0;
  const LaguerreContext one(1);
  for (int i = 0; i < 200; ++i) {
    const double x = 20.0 * i / 199.0;
    p1_gap = std::max(p1_gap, std::abs(density_sum_form(one, x) - std::exp(-x)));
  }
  r.checks.push_back({"p1_max_gap", p1_gap});

  for (Eigen::Index k : {1, 2, 5, 20, 50}) {
    r.checks.push_back({"normalization_gap@" + std::to_string(k),
                        std::abs(density_normalization(LaguerreContext(k)).value - 1.0)});
  }

  const std::vector<double> alphas = c.alpha ? std::vector<double>{*c.alpha} : std::vector<double>{0.25, 0.4, 0.6};
  const LaguerreContext hundred(100);
  for (double alpha : alphas) {
    for (double eps : {0.1, 0.05, 0.01, 0.005}) {
      const auto q = integral_A2(hundred, eps, alpha);
      const std::string key = "alpha=" + format_param(alpha) + "/eps=" + format_param(eps);
      r.checks.push_back({"integral_A2@" + key, q.value});
      r.checks.push_back({"scaled_A2@" + key, q.value / std::pow(eps, 0.5 - alpha)});
    }
  }
}

void run_identities(const ScenarioConfig& c, ScenarioResult& r) {
  const auto shapes = shapes_or(c, {{7, 4}});
  if (shapes.size() != 1) throw ValidationError("identities takes a single shape");
  const auto [n, m] = shapes.front();
  collect(c, r, {"factorization_gap", "quadratic_form_ok", "quadratic_form_zeros", "fan_ok", "interlacing_ok"},
          [&](std::uint64_t seed) {
            auto engine = rng::make_engine(rng::derive_seed(seed, 0));
            std::normal_distribution<double> normal;
            std::uniform_int_distribution<int> pick(0, 1 << 20);
            const auto gaussian = [&](Eigen::Index rows, Eigen::Index cols) {
              Eigen::MatrixXd g(rows, cols);
              for (Eigen::Index i = 0; i < rows; ++i) {
                for (Eigen::Index j = 0; j < cols; ++j) g(i, j) = normal(engine);
              }
              return g;
            };

            const Eigen::MatrixXd v = gaussian(8, 5);
            const double gap = factorization_identity_gap(v, pick(engine) % 5);

            const DenseMatrix a = gen_uniform(n, m, c.bounds, rng::derive_seed(seed, 1));
            const Eigen::Index k = pick(engine) % m;
            const auto qf = quadratic_form_spectrum(a, k, c.field, rng::derive_seed(seed, 2), c.bounds);

            const int dim = 1 + pick(engine) % 8;
            const Eigen::MatrixXd b1 = gaussian(dim, dim);
            const Eigen::MatrixXd b2 = gaussian(dim, dim);
            const Eigen::MatrixXd m1 = b1 * b1.transpose() + 0.1 * Eigen::MatrixXd::Identity(dim, dim);
            const Eigen::MatrixXd m2 = b2 * b2.transpose();
            const int i = pick(engine) % dim;
            const int j = pick(engine) % (dim - i);
            const bool fan = fan_inequality_check(m1, m2, i, j);

            const bool interlace = interlacing_check(a, pick(engine) % m, c.field, rng::derive_seed(seed, 3));
            return std::vector<double>{gap, qf.within_bounds ? 1.0 : 0.0, static_cast<double>(qf.zero_count),
                                       fan ? 1.0 : 0.0, interlace ? 1.0 : 0.0};
          });
  const auto gaps = r.values("factorization_gap");
  const auto zeros = r.values("quadratic_form_zeros");
  r.checks = {{"max_factorization_gap", *std::ranges::max_element(gaps)},
              {"quadratic_form_failures", count_zero(r.values("quadratic_form_ok"))},
              {"zero_count_mismatches", static_cast<double>(std::ranges::count_if(
                                            zeros, [&](double z) { return z != static_cast<double>(m - 1); }))},
              {"fan_failures", count_zero(r.values("fan_ok"))},
              {"interlacing_failures", count_zero(r.values("interlacing_ok"))}};
}

}  // namespace

namespace detail {

const ScenarioFn* find_scenario(std::string_view name) {
  static const std::vector<std::pair<std::string, ScenarioFn>> registry{
      {"unbiasedness", run_unbiasedness},
      {"concentration", run_concentration},
      {"upper_tail", run_upper_tail},
      {"cutoff_concentration", run_cutoff_concentration},
      {"tail_statistic", run_tail_statistic},
      {"flat_distribution", run_flat_distribution},
      {"yn_coverage", run_yn_coverage},
      {"gamma_constant", run_gamma_constant},
      {"laguerre_density", run_laguerre_density},
      {"identities", run_identities},
  };
  for (const auto& [key, fn] : registry) {
    if (key == name) return &fn;
  }
  return nullptr;
}

}  // namespace detail
}  // namespace permcast
