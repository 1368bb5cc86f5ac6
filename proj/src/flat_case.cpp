#include "permcast/flat_case.hpp"

#include <cmath>
#include <random>

#include "permcast/estimator.hpp"
#include "permcast/exact_perm.hpp"
#include "permcast/parallel.hpp"
#include "permcast/random.hpp"

namespace permcast {
namespace {

constexpr std::uint64_t kEstimatorStream = 0x6573746dULL;
constexpr std::uint64_t kChiSquareStream = 0x63686932ULL;

void require_flat_shape(Eigen::Index n, Eigen::Index m) {
  if (m < 1 || n < m) throw ValidationError("flat case requires 1 <= m <= n");
}

}  // namespace

FlatMoments flat_moments(Eigen::Index n, Eigen::Index m) {
  require_flat_shape(n, m);
  const auto lg = [](Eigen::Index k) { return std::lgamma(static_cast<double>(k)); };
  FlatMoments out;
  out.log_mean = lg(n + 1) - lg(n - m + 1);
  // prod k(k+2) = [n!/(n-m)!] [(n+2)!/(n-m+2)!]
  out.log_second_moment = out.log_mean + lg(n + 3) - lg(n - m + 3);
  double ratio = 1.0;
  for (Eigen::Index k = n - m + 1; k <= n; ++k) ratio *= 1.0 + 2.0 / static_cast<double>(k);
  out.variance_ratio = ratio;
  return out;
}

double flat_variance_ratio_closed_form(Eigen::Index n, Eigen::Index m) {
  require_flat_shape(n, m);
  const double a = static_cast<double>(n);
  const double b = static_cast<double>(n - m);
  return (a + 1.0) * (a + 2.0) / ((b + 1.0) * (b + 2.0));
}

double chi2_product_sample(Eigen::Index top_degree, Eigen::Index count, std::uint64_t seed) {
  if (count < 1 || top_degree - count + 1 < 1) throw ValidationError("chi-square degrees must stay >= 1");
  auto engine = rng::make_engine(seed);
  double log_sum = 0.0;
  for (Eigen::Index k = top_degree; k > top_degree - count; --k) {
    std::gamma_distribution<double> gamma(0.5 * static_cast<double>(k), 2.0);
    log_sum += std::log(gamma(engine));
  }
  return log_sum;
}

std::vector<double> chi2_product_samples(Eigen::Index top_degree, Eigen::Index count, std::uint64_t seed,
                                         std::size_t samples, int threads) {
  if (threads <= 0) threads = parallel::default_concurrency();
  return parallel::map_indices<double>(samples, threads, [&](std::size_t t) {
    return chi2_product_sample(top_degree, count, rng::derive_seed(seed, kChiSquareStream, t));
  });
}

stats::KsResult flat_distribution_match(Eigen::Index n, Eigen::Index m, std::size_t trials, std::uint64_t seed,
                                        int degree_shift, int threads) {
  require_flat_shape(n, m);
  if (trials < 1000) throw ValidationError("flat distribution match needs trials >= 1000");
  const auto estimates = log_det_samples(gen_flat(n, m), FieldKind::Real, seed, trials, threads, kEstimatorStream);
  const auto reference = chi2_product_samples(n + degree_shift, m, seed, trials, threads);
  return stats::ks_two_sample(estimates, reference);
}

std::size_t yn_sample_count(Eigen::Index n, double rho) {
  if (n < 2) throw ValidationError("Y_n requires n >= 2");
  if (!(rho > 0.0)) throw ValidationError("rho must be positive");
  return static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(n), 2.0 + rho) - 1e-9));
}

CoverageResult yn_coverage(Eigen::Index n, Eigen::Index m, std::size_t samples_per_estimate, double delta,
                           std::size_t replications, std::uint64_t seed, std::size_t budget, int threads) {
  require_flat_shape(n, m);
  if (samples_per_estimate < 1 || replications < 1) throw ValidationError("coverage needs N >= 1 and replications >= 1");
  if (samples_per_estimate > budget / replications) {
    throw ValidationError("draw budget exceeded: " + std::to_string(samples_per_estimate) + " x " +
                          std::to_string(replications) + " > " + std::to_string(budget));
  }
  if (threads <= 0) threads = parallel::default_concurrency();

  const DenseMatrix flat = gen_flat(n, m);
  const double log_per = perm_flat(n, m).log_value;
  CoverageResult out;
  out.samples_per_estimate = samples_per_estimate;
  out.replications = replications;
  out.bound = chebyshev_coverage_bound(n, m, delta, samples_per_estimate);
  out.relative_errors = parallel::map_indices<double>(replications, threads, [&](std::size_t r) {
    const auto logs = log_det_samples_serial(flat, FieldKind::Real, rng::derive_seed(seed, r), samples_per_estimate);
    stats::CompensatedSum acc;
    for (double ld : logs) acc.add(std::exp(ld - log_per));
    return acc.value() / static_cast<double>(samples_per_estimate) - 1.0;
  });
  std::size_t inside = 0;
  for (double e : out.relative_errors) inside += std::abs(e) <= delta;
  out.coverage = static_cast<double>(inside) / static_cast<double>(replications);
  out.binomial_se = stats::binomial_standard_error(out.coverage, replications);
  return out;
}

CoverageResult yn_coverage_rho(Eigen::Index n, Eigen::Index m, double rho, double delta, std::size_t replications,
                               std::uint64_t seed, std::size_t budget, int threads) {
  return yn_coverage(n, m, yn_sample_count(n, rho), delta, replications, seed, budget, threads);
}

}  // namespace permcast
