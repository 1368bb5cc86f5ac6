#pragma once

#include <optional>
#include <span>

#include "permcast/matrix.hpp"

namespace permcast {

/// A permanent in log space, with the plain value when it is below 1e300.
struct PermValue {
  double log_value = 0.0;
  std::optional<double> value;

  static PermValue from_value(long double v);
  static PermValue from_log(double log_v);
};

inline constexpr Eigen::Index kNaiveMaxRows = 10;
inline constexpr Eigen::Index kRyserMaxSize = 24;

/// Sum over all injections of columns into rows. Factorial time; n <= 10.
PermValue perm_naive(const DenseMatrix& a);

/// Ryser inclusion-exclusion over Gray-code ordered column subsets, O(2^n n).
/// The subset range is cut into a fixed number of chunks that are summed
/// with OpenMP; the result is identical for any thread count.
PermValue perm_ryser(const DenseMatrix& a, int threads = 0);

/// Single-pass Ryser. Kept as the reference for perm_ryser.
PermValue perm_ryser_serial(const DenseMatrix& a);

/// Rectangular permanent via per A = per([A | J]) / (n - m)!.
PermValue perm_rect(const DenseMatrix& a, int threads = 0);

/// n! / (n - m)!; m = 0 gives 1.
PermValue perm_flat(Eigen::Index n, Eigen::Index m);

/// per(u v^T) = m! e_m(u) prod(v), with e_m evaluated in log space.
PermValue perm_rank_one(std::span<const double> u, std::span<const double> v);

}  // namespace permcast
