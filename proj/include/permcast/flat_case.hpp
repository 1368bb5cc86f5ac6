#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "permcast/stats.hpp"

namespace permcast {

/// Exact moments of det Z(J_nm), where det Z(J_nm) ~ chi2_n chi2_{n-1} ... chi2_{n-m+1}.
struct FlatMoments {
  double log_mean = 0.0;           // log n!/(n-m)!
  double log_second_moment = 0.0;  // log prod_{k=n-m+1}^{n} (k^2 + 2k)
  double variance_ratio = 1.0;     // E[det^2] / E[det]^2 = prod (1 + 2/k)
};

FlatMoments flat_moments(Eigen::Index n, Eigen::Index m);

/// (n+1)(n+2) / ((n-m+1)(n-m+2)).
double flat_variance_ratio_closed_form(Eigen::Index n, Eigen::Index m);

/// log of a product of independent chi-square draws with degrees
/// top_degree, top_degree - 1, ..., top_degree - count + 1.
double chi2_product_sample(Eigen::Index top_degree, Eigen::Index count, std::uint64_t seed);

std::vector<double> chi2_product_samples(Eigen::Index top_degree, Eigen::Index count, std::uint64_t seed,
                                         std::size_t samples, int threads = 0);

/// Two-sample KS between estimator draws of log det Z(J_nm) and the
/// chi-square product law. `degree_shift` offsets the chi-square degrees and
/// exists to check that the test detects a wrong law.
stats::KsResult flat_distribution_match(Eigen::Index n, Eigen::Index m, std::size_t trials, std::uint64_t seed,
                                        int degree_shift = 0, int threads = 0);

inline constexpr std::size_t kDefaultDrawBudget = 1'000'000;

/// ceil(n^(2 + rho)).
std::size_t yn_sample_count(Eigen::Index n, double rho);

struct CoverageResult {
  double coverage = 0.0;       // fraction of replications with |Y/per - 1| <= delta
  double bound = 0.0;          // Chebyshev failure bound (ratio - 1) / (delta^2 N)
  double binomial_se = 0.0;
  std::size_t samples_per_estimate = 0;
  std::size_t replications = 0;
  std::vector<double> relative_errors;  // Y/per - 1 per replication
};

/// Replicates the averaged flat-case estimator Y (mean of `samples_per_estimate`
/// draws) and reports how often it lands within (1 +- delta) per J_nm.
CoverageResult yn_coverage(Eigen::Index n, Eigen::Index m, std::size_t samples_per_estimate, double delta,
                           std::size_t replications, std::uint64_t seed,
                           std::size_t budget = kDefaultDrawBudget, int threads = 0);

/// Same, with N = ceil(n^(2+rho)).
CoverageResult yn_coverage_rho(Eigen::Index n, Eigen::Index m, double rho, double delta, std::size_t replications,
                               std::uint64_t seed, std::size_t budget = kDefaultDrawBudget, int threads = 0);

}  // namespace permcast
