// Acceptance suite: one PASS/FAIL line per criterion.
//   permcast_acceptance               run all criteria
//   permcast_acceptance --criterion N run criterion N only

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "permcast/estimator.hpp"
#include "permcast/exact_perm.hpp"
#include "permcast/flat_case.hpp"
#include "permcast/laguerre.hpp"
#include "permcast/matrix.hpp"
#include "permcast/random.hpp"
#include "permcast/scenario.hpp"
#include "permcast/spectrum.hpp"
#include "permcast/stats.hpp"

using namespace permcast;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

struct Criterion {
  int id;
  const char* title;
  double runtime_limit;  // seconds; 0 means none
  std::function<void(Outcome&)> body;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

void unbiasedness(Outcome& out) {
  constexpr std::size_t kTrials = 100000;
  int within = 0;
  double worst_z = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Eigen::Index n = 2 + i % 6;
    const Eigen::Index m = std::max<Eigen::Index>(1, n - i % 4);
    const FieldKind field = i < 10 ? FieldKind::Real : FieldKind::Complex;
    const DenseMatrix a = gen_uniform(n, m, {0.5, 2.0}, rng::derive_seed(101, i));
    const double per = *perm_naive(a).value;
    const auto est = averaged_estimate(a, kTrials, field, rng::derive_seed(102, i));
    const double z = (est.mean - per) / est.standard_error;
    worst_z = std::max(worst_z, std::abs(z));
    if (std::abs(z) <= 4.0) ++within;
    else out.detail << " [" << n << "x" << m << " " << to_string(field) << " z=" << fmt(z) << "]";
  }
  out.detail << within << "/20 matrices within 4 SE, worst |z| = " << fmt(worst_z);
  out.require(within == 20, "every mean within 4 SE");
}

void oracle_agreement(Outcome& out) {
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Eigen::Index n = 1 + i % 8;
    const Eigen::Index m = i % 2 == 0 ? n : 1 + (i / 2) % n;
    const DenseMatrix a = gen_uniform(n, m, {0.1, 1.0}, rng::derive_seed(201, i));
    const double naive = *perm_naive(a).value;
    worst = std::max(worst, rel_diff(naive, *perm_rect(a).value));
    if (n == m) {
      worst = std::max(worst, rel_diff(naive, *perm_ryser(a).value));
      worst = std::max(worst, rel_diff(naive, *perm_ryser_serial(a).value));
    }
  }
  out.detail << "naive/ryser/rect worst relative gap " << fmt(worst);
  out.require(worst <= 1e-10, "relative agreement 1e-10");

  const double flat = *perm_flat(5, 3).value;
  out.detail << "; perm_flat(5,3) = " << flat;
  out.require(flat == 60.0, "perm_flat(5,3) = 60");

  double worst_rank_one = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Eigen::Index n = 1 + i % 7;
    const Eigen::Index m = 1 + (i / 7) % n;
    auto engine = rng::make_engine(rng::derive_seed(202, i));
    std::uniform_real_distribution<double> unit(0.5, 2.0);
    std::vector<double> u(static_cast<std::size_t>(n));
    std::vector<double> v(static_cast<std::size_t>(m));
    for (auto& x : u) x = unit(engine);
    for (auto& x : v) x = unit(engine);
    worst_rank_one =
        std::max(worst_rank_one, rel_diff(*perm_rank_one(u, v).value, *perm_naive(gen_rank_one(u, v)).value));
  }
  out.detail << "; rank-one worst gap " << fmt(worst_rank_one);
  out.require(worst_rank_one <= 1e-10, "rank-one agreement 1e-10");
}

void flat_distribution(Outcome& out) {
  const auto ks = flat_distribution_match(6, 4, 10000, 301);
  const auto control = flat_distribution_match(6, 4, 10000, 301, 1);
  out.detail << "KS p = " << fmt(ks.p_value) << ", shifted control p = " << fmt(control.p_value);
  out.require(ks.p_value > 0.01, "p > 0.01");
  out.require(control.p_value < 0.001, "control p < 0.001");
}

void flat_moments_check(Outcome& out) {
  double worst = 0.0;
  for (Eigen::Index n = 1; n <= 500; ++n) {
    for (Eigen::Index m = 1; m <= n; ++m) {
      const double rhs = perm_flat(n, m).log_value;
      worst = std::max(worst, std::abs(flat_moments(n, m).log_mean - rhs) / std::max(1.0, std::abs(rhs)));
    }
  }
  out.detail << "log mean vs perm_flat worst " << fmt(worst);
  out.require(worst <= 1e-12, "flat mean matches perm_flat to 1e-12");

  const std::pair<Eigen::Index, Eigen::Index> shapes[] = {{4, 2}, {6, 4}, {8, 8}};
  for (const auto& [n, m] : shapes) {
    const auto logs = log_det_samples(gen_flat(n, m), FieldKind::Real, rng::derive_seed(401, n), 100000);
    std::vector<double> squares;
    squares.reserve(logs.size());
    for (double l : logs) squares.push_back(std::exp(2.0 * l));
    const auto s = stats::summarize(squares);
    const double exact = std::exp(flat_moments(n, m).log_second_moment);
    const double z = (s.mean - exact) / s.standard_error;
    out.detail << "; E[det^2] (" << n << "," << m << ") z = " << fmt(z);
    out.require(std::abs(z) <= 4.0, "second moment within 4 SE");
  }

  // prod_{k=n-m+1}^{n} (k+2)/k telescopes to (n+1)(n+2)/((n-m+1)(n-m+2)); checked in integers.
  bool exact_identity = true;
  for (__int128 n = 1; n <= 100; ++n) {
    for (__int128 m = 1; m <= n; ++m) {
      __int128 num = 1;
      __int128 den = 1;
      for (__int128 k = n - m + 1; k <= n; ++k) {
        num *= k + 2;
        den *= k;
        __int128 a = num;
        __int128 b = den;
        while (b != 0) {
          const __int128 t = a % b;
          a = b;
          b = t;
        }
        num /= a;
        den /= a;
      }
      const __int128 closed_num = (n + 1) * (n + 2);
      const __int128 closed_den = (n - m + 1) * (n - m + 2);
      if (num * closed_den != den * closed_num) exact_identity = false;
      const double ratio = static_cast<double>(closed_num) / static_cast<double>(closed_den);
      if (std::abs(flat_moments(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m)).variance_ratio - ratio) >
          1e-12 * ratio) {
        exact_identity = false;
      }
    }
  }
  out.detail << "; telescoped ratio identity " << (exact_identity ? "exact" : "broken");
  out.require(exact_identity, "telescoped ratio identity");
}

void yn_coverage_check(Outcome& out) {
  const auto r = yn_coverage(6, 4, 2000, 0.3, 500, 501);
  const double floor = 1.0 - r.bound - 3.0 * r.binomial_se;
  out.detail << "coverage " << fmt(r.coverage) << " vs floor " << fmt(floor) << " (Chebyshev failure "
             << fmt(r.bound) << ")";
  out.require(r.coverage >= floor, "coverage above Chebyshev floor");
}

void worst_case_constants(Outcome& out) {
  const auto r = run_scenario(parse_config(
      {{"scenario", "gamma_constant"}, {"shape", {400, 400}}, {"trials", 200}, {"seed", 601}}));
  const double real = *r.aggregate("real@400").mean;
  const double cplx = *r.aggregate("complex@400").mean;
  out.detail << "real " << fmt(real) << " (target " << fmt(r.bound("real_target")) << "), complex " << fmt(cplx)
             << " (target " << fmt(r.bound("complex_target")) << ")";
  out.require(std::abs(real - r.bound("real_target")) <= 0.05, "real within 0.05");
  out.require(std::abs(cplx - r.bound("complex_target")) <= 0.05, "complex within 0.05");
}

void concentration(Outcome& out) {
  const auto r = run_scenario(parse_config({{"scenario", "concentration"},
                                            {"shapes", {{50, 50}, {100, 100}, {200, 200}}},
                                            {"delta", 0.1},
                                            {"trials", 200},
                                            {"seed", 701}}));
  for (const char* family : {"rank_one", "flat"}) {
    out.detail << family << " P:";
    double prev = -1.0;
    for (int n : {50, 100, 200}) {
      const std::string name = std::string(family) + "@" + std::to_string(n) + "x" + std::to_string(n);
      const double p = r.tail_probability(name);
      out.detail << " " << fmt(p);
      if (prev >= 0.0) {
        const double se = std::hypot(stats::binomial_standard_error(prev, 200), stats::binomial_standard_error(p, 200));
        out.require(p <= prev + 2.0 * se, name + " nonincreasing within 2 SE");
      }
      prev = p;
    }
    out.require(prev <= 0.05, std::string(family) + " P <= 0.05 at n = 200");
    out.detail << "; ";
  }
}

void upper_tail(Outcome& out) {
  const auto r = run_scenario(parse_config(
      {{"scenario", "upper_tail"}, {"shape", {100, 100}}, {"delta", 0.05}, {"trials", 2000}, {"seed", 801}}));
  const double freq = r.tail_probability("excess@100x100");
  const double bound = r.bound("markov@100x100");
  const double limit = bound + 3.0 * stats::binomial_standard_error(bound, 2000);
  out.detail << "frequency " << fmt(freq) << " vs e^{-2 delta n} + 3 SE = " << fmt(limit);
  out.require(freq <= limit, "upper-tail frequency");
}

void tail_statistic_bound(Outcome& out) {
  const auto dense = run_scenario(parse_config({{"scenario", "tail_statistic"},
                                                {"shapes", {{12, 6}, {20, 10}}},
                                                {"bounds", {1.0, 2.0}},
                                                {"epsilon", 0.01},
                                                {"trials", 1000},
                                                {"seed", 901}}));
  for (const char* label : {"12x6", "20x10"}) {
    const auto& agg = dense.aggregate(std::string("tail@") + label);
    const double rhs = dense.bound(std::string("prop31@") + label);
    const double corrected = dense.bound(std::string("prop31_corrected@") + label);
    out.detail << label << " mean " << fmt(*agg.mean) << " + 3 SE vs rhs " << fmt(rhs) << " (corrected "
               << fmt(corrected) << "); ";
    out.require(agg.nonfinite == 0, std::string(label) + " no singular draws");
    out.require(*agg.mean <= rhs + 3.0 * *agg.standard_error, std::string(label) + " below prop31_rhs");
  }

  const double eps = 0.05;
  const auto sparse = run_scenario(parse_config({{"scenario", "tail_statistic"},
                                                 {"shapes", {{40, 16}, {60, 24}, {80, 32}}},
                                                 {"gamma", 0.3},
                                                 {"theta", 0.4},
                                                 {"epsilon", eps},
                                                 {"trials", 1000},
                                                 {"seed", 902}}));
  const double scale = eps * std::abs(std::log(eps));
  std::vector<std::pair<double, double>> constants;
  out.detail << "sparse C:";
  for (const char* label : {"40x16", "60x24", "80x32"}) {
    const auto& agg = sparse.aggregate(std::string("tail@") + label);
    out.require(agg.nonfinite == 0, std::string(label) + " no singular draws");
    constants.emplace_back(*agg.mean / scale, *agg.standard_error / scale);
    out.detail << " " << fmt(constants.back().first);
    out.require(*agg.mean <= 10.0 * scale, std::string(label) + " below 10 eps|ln eps|");
  }
  const double drift_limit = constants.front().first + 3.0 * std::hypot(constants.front().second, constants.back().second);
  out.require(constants.back().first <= drift_limit, "C stable across n");
}

void identities(Outcome& out) {
  Eigen::MatrixXd v(3, 2);
  v << 1, 0, 0, 1, 1, 1;
  const double fixture_gap = std::max(factorization_identity_gap(v, 0), factorization_identity_gap(v, 1));
  out.detail << "3x2 fixture gap " << fmt(fixture_gap);
  out.require(fixture_gap < 1e-10, "3x2 fixture");

  const auto r =
      run_scenario(parse_config({{"scenario", "identities"}, {"shape", {7, 4}}, {"trials", 500}, {"seed", 1001}}));
  out.detail << "; 500 draws: max 8x5 gap " << fmt(r.check("max_factorization_gap")) << ", sandwich failures "
             << r.check("quadratic_form_failures") << ", zero-count mismatches " << r.check("zero_count_mismatches")
             << ", Fan failures " << r.check("fan_failures") << ", interlacing failures "
             << r.check("interlacing_failures");
  out.require(r.check("max_factorization_gap") < 1e-10, "factorization gap");
  out.require(r.check("quadratic_form_failures") == 0.0, "quadratic-form sandwich");
  out.require(r.check("zero_count_mismatches") == 0.0, "m-1 structural zeros");
  out.require(r.check("fan_failures") == 0.0, "Fan inequality");
  out.require(r.check("interlacing_failures") == 0.0, "interlacing");
}

void laguerre_density(Outcome& out) {
  const auto r = run_scenario(
      parse_config({{"scenario", "laguerre_density"}, {"shape", {50, 50}}, {"trials", 500}, {"seed", 1101}}));
  const double form_gap = r.check("max_form_gap");
  const double p1_gap = r.check("p1_max_gap");
  const double l1 = r.check("histogram_l1");
  double norm_gap = 0.0;
  for (int n : {1, 2, 5, 20, 50}) norm_gap = std::max(norm_gap, r.check("normalization_gap@" + std::to_string(n)));
  out.detail << "sum/CD gap " << fmt(form_gap) << ", normalization gap " << fmt(norm_gap) << ", p1 gap "
             << fmt(p1_gap) << ", histogram L1 " << fmt(l1);
  out.require(form_gap <= 1e-8, "sum and CD forms agree");
  out.require(norm_gap <= 1e-6, "normalization");
  out.require(p1_gap <= 1e-12, "p1 = e^{-x}");
  out.require(l1 <= 0.05, "histogram L1");
}

void singular_integral(Outcome& out) {
  const LaguerreContext ctx(100);
  const double eps_values[] = {0.1, 0.05, 0.01, 0.005};
  for (double alpha : {0.25, 0.4, 0.6}) {
    std::vector<double> values;
    std::vector<double> ratios;
    bool converged = true;
    for (double eps : eps_values) {
      const auto q = integral_A2(ctx, eps, alpha);
      converged = converged && q.converged;
      values.push_back(q.value);
      ratios.push_back(q.value / std::pow(eps, 0.5 - alpha));
    }
    const auto [lo, hi] = std::ranges::minmax(ratios);
    const double growth = ratios.back() / ratios.front();
    out.detail << "alpha " << alpha << ": ratio " << fmt(ratios.front()) << " -> " << fmt(ratios.back()) << "; ";
    const std::string tag = "alpha=" + fmt(alpha);
    out.require(converged, tag + " quadrature converged");
    if (alpha < 0.5) {
      bool decreasing = true;
      for (std::size_t i = 1; i < values.size(); ++i) decreasing = decreasing && values[i] < values[i - 1];
      out.require(decreasing, tag + " strictly decreasing");
      out.require(hi / lo <= 3.0, tag + " ratio within a factor 3");
    } else {
      out.require(growth > 3.0, tag + " ratio grows by more than a factor 3");
    }
  }
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void reproducibility(Outcome& out) {
  const json configs[] = {
      {{"scenario", "unbiasedness"}, {"trials", 200}},
      {{"scenario", "concentration"}, {"shapes", {{30, 30}, {40, 20}}}, {"trials", 40}},
      {{"scenario", "upper_tail"}, {"shape", {40, 40}}, {"trials", 40}},
      {{"scenario", "cutoff_concentration"}, {"shapes", {{20, 10}}}, {"trials", 40}},
      {{"scenario", "tail_statistic"}, {"trials", 40}},
      {{"scenario", "flat_distribution"}, {"trials", 200}},
      {{"scenario", "yn_coverage"}, {"trials", 40}, {"samples_per_estimate", 100}},
      {{"scenario", "gamma_constant"}, {"shape", {60, 60}}, {"trials", 20}},
      {{"scenario", "laguerre_density"}, {"shape", {10, 10}}, {"trials", 40}},
      {{"scenario", "identities"}, {"trials", 40}},
  };
  const auto dir = std::filesystem::temp_directory_path() / "permcast_acceptance";
  std::filesystem::create_directories(dir);
  std::size_t identical = 0;
  for (const auto& base : configs) {
    ScenarioConfig c = parse_config(base);
    c.seed = 1301;
    std::vector<std::string> outputs;
    for (int threads : {1, 8}) {
      for (int run = 0; run < 2; ++run) {
        c.threads = threads;
        c.output = (dir / (c.scenario + "_t" + std::to_string(threads) + "_r" + std::to_string(run))).string();
        run_scenario(c);
        outputs.push_back(slurp(c.output + ".trials.csv"));
      }
    }
    const bool same = !outputs.front().empty() && std::ranges::all_of(outputs, [&](const auto& s) { return s == outputs.front(); });
    if (same) ++identical;
    out.require(same, c.scenario + " CSV identical");
  }
  out.detail << identical << "/" << std::size(configs) << " scenarios byte-identical over 2 runs x threads {1, 8}";
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {1, "unbiasedness", 60.0, unbiasedness},
      {2, "oracle agreement", 10.0, oracle_agreement},
      {3, "flat distribution", 30.0, flat_distribution},
      {4, "flat moments", 0.0, flat_moments_check},
      {5, "Y_n coverage", 120.0, yn_coverage_check},
      {6, "worst-case constants", 30.0, worst_case_constants},
      {7, "concentration", 600.0, concentration},
      {8, "upper tail", 0.0, upper_tail},
      {9, "tail statistic bound", 0.0, tail_statistic_bound},
      {10, "linear-algebra identities", 0.0, identities},
      {11, "Laguerre density", 0.0, laguerre_density},
      {12, "singular integral threshold", 60.0, singular_integral},
      {13, "reproducibility", 0.0, reproducibility},
  };
  return all;
}

bool run(const Criterion& c) {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  try {
    c.body(out);
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail << " [exception: " << e.what() << "]";
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (c.runtime_limit > 0.0) out.require(seconds <= c.runtime_limit, "runtime <= " + fmt(c.runtime_limit) + " s");
  std::printf("C%02d %s  %s: %s (%.1f s)\n", c.id, out.pass ? "PASS" : "FAIL", c.title, out.detail.str().c_str(),
              seconds);
  std::fflush(stdout);
  return out.pass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"permcast acceptance suite"};
  int only = 0;
  app.add_option("--criterion", only, "Run a single criterion (1-13)")->check(CLI::Range(1, 13));
  CLI11_PARSE(app, argc, argv);

  bool all_pass = true;
  for (const auto& c : criteria()) {
    if (only != 0 && c.id != only) continue;
    all_pass = run(c) && all_pass;
  }
  return all_pass ? 0 : 1;
}
