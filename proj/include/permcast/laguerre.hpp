#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "permcast/matrix.hpp"

namespace permcast {

/// Size of the complex Wishart ensemble whose eigenvalue density p_n is
/// evaluated at argument n x.
class LaguerreContext {
 public:
  explicit LaguerreContext(Eigen::Index n);
  [[nodiscard]] Eigen::Index n() const noexcept { return n_; }

 private:
  Eigen::Index n_;
};

/// e^{-x/2} L_k^beta(x) for beta in {0, 1}.
///
/// The three-term recurrence runs on a binary-rescaled mantissa and the
/// damping factor is applied once at the end in log space, so neither the
/// polynomial (which reaches 1e285 near k = 200, x = 2000) nor e^{-x/2}
/// overflows or underflows on its own.
double laguerre_scaled(int k, int beta, double x);

/// laguerre_scaled(k, beta, x) for k = 0..k_max in one recurrence pass.
std::vector<double> laguerre_scaled_sequence(int k_max, int beta, double x);

/// p_n(x) = sum_{k<n} (e^{-nx/2} L_k^0(nx))^2.
double density_sum_form(const LaguerreContext& ctx, double x);

/// Christoffel-Darboux form n [ (l_{n-1}^1)^2 - l_n^1 l_{n-2}^1 ] at nx. Requires n >= 2.
double density_cd_form(const LaguerreContext& ctx, double x);

struct DensityEval {
  double x = 0.0;
  double sum_form = 0.0;
  double cd_form = 0.0;
};
DensityEval evaluate_density(const LaguerreContext& ctx, double x);

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
  bool converged = true;
};

inline constexpr double kQuadratureTolerance = 1e-8;

/// Integral of p_n over [lo, hi]. Panels are no wider than a quarter of the
/// local oscillation period 2 pi sqrt(x) / n, each integrated by adaptive
/// Gauss-Kronrod.
QuadratureResult density_mass(const LaguerreContext& ctx, double lo, double hi);

/// Integral of p_n over [0, inf), truncated at 10 + 40/n where the remainder
/// is below 1e-15.
QuadratureResult density_normalization(const LaguerreContext& ctx);

/// Integral over [0, eps] of x^{-alpha} p_n(x), computed after the change of
/// variables u = x^{1-alpha}, which removes the endpoint singularity.
/// Requires 0 <= alpha < 1 and 0 < eps <= 1.
QuadratureResult integral_A2(const LaguerreContext& ctx, double eps, double alpha);

/// Eigenvalues (ascending) of Y^* Y, Y_ij = (g + i g') / sqrt(2n).
std::vector<double> complex_wishart_eigs(Eigen::Index n, std::uint64_t seed);

struct HistogramComparison {
  std::vector<double> edges;
  std::vector<double> empirical;  // fraction of pooled eigenvalues per bin
  std::vector<double> exact;      // quadrature mass of p_n per bin
  double l1_distance = 0.0;
};

/// Bins eigenvalues pooled from `draws` matrices of size n and compares the
/// empirical law with the mass of p_n in each bin.
HistogramComparison compare_histogram(Eigen::Index n, std::span<const double> pooled, std::size_t draws,
                                      std::size_t bins, double lo, double hi);

/// Samples `draws` matrices (substream t of `seed`) and compares as above.
HistogramComparison compare_histogram(Eigen::Index n, std::size_t draws, std::size_t bins, double lo, double hi,
                                      std::uint64_t seed, int threads = 0);

struct PropA1Table {
  std::vector<Eigen::Index> n_values;
  std::vector<double> eps_values;
  double alpha = 0.0;
  std::vector<std::vector<double>> values;  // [n index][eps index]
  double limit_proxy = 0.0;                 // largest n, smallest eps
};

/// Table of integral_A2 over a grid of (n, eps). Requires alpha < 1/2.
PropA1Table propA1_scan(std::span<const Eigen::Index> n_values, std::span<const double> eps_values, double alpha);

}  // namespace permcast
