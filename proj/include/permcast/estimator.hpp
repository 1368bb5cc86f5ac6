#pragma once

#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "permcast/matrix.hpp"

namespace permcast {

/// REAL: x ~ N(0, 1). COMPLEX: x = (g1 + i g2) / sqrt(2), so E|x|^2 = 1.
enum class FieldKind { Real, Complex };

std::string_view to_string(FieldKind field) noexcept;
FieldKind parse_field(std::string_view text);

/// X(A) with X_ij = sqrt(A_ij) x_ij, real or complex.
using GaussianSample = std::variant<Eigen::MatrixXd, Eigen::MatrixXcd>;

/// One draw of log det Z(A), Z = X^* X.
struct EstimateRun {
  double log_det = 0.0;  // -inf when Z is numerically singular
  FieldKind field = FieldKind::Real;
  std::uint64_t seed = 0;
  Eigen::Index n = 0;
  Eigen::Index m = 0;
};

struct AveragedEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  double log_mean = 0.0;
  std::size_t trials = 0;
};

/// Draws are taken row by row from a stream seeded by `seed`, so the same
/// (A, field, seed) always yields the same X.
GaussianSample sample_X(const DenseMatrix& a, FieldKind field, std::uint64_t seed);

/// X(A~) = X(A) / sqrt(n+m) on the same draw, so Z(A~) = Z(A) / (n+m) and
/// det Z(A) = (n+m)^m det Z(A~).
GaussianSample sample_X_tilde(const DenseMatrix& a, FieldKind field, std::uint64_t seed);

/// Singular values of a sample, descending.
Eigen::VectorXd singular_values(const GaussianSample& x);

/// 2 * sum log sigma_i over the singular values of X.
///
/// When the columns of A have pairwise disjoint supports (identity and other
/// permutation-like patterns) Z is diagonal and the singular values are the
/// column norms; that case skips the SVD.
EstimateRun log_det_estimate(const DenseMatrix& a, FieldKind field, std::uint64_t seed);

/// log det Z for trial streams derive_seed(seed, key, t), t < count.
std::vector<double> log_det_samples(const DenseMatrix& a, FieldKind field, std::uint64_t seed, std::size_t count,
                                    int threads = 0, std::uint64_t key = 0);
std::vector<double> log_det_samples_serial(const DenseMatrix& a, FieldKind field, std::uint64_t seed,
                                           std::size_t count, std::uint64_t key = 0);

/// Sample mean of det Z over `trials` independent draws. Requires trials >= 2.
AveragedEstimate averaged_estimate(const DenseMatrix& a, std::size_t trials, FieldKind field, std::uint64_t seed,
                                   int threads = 0);

/// Chebyshev bound on P(|Y - per J| > delta per J) for the mean Y of
/// `samples` flat-case draws: (variance_ratio - 1) / (delta^2 samples).
double chebyshev_coverage_bound(Eigen::Index n, Eigen::Index m, double delta, std::size_t samples);

bool columns_have_disjoint_support(const DenseMatrix& a);

}  // namespace permcast
