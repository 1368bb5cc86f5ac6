#include "permcast/exact_perm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "permcast/parallel.hpp"

namespace permcast {
namespace {

constexpr double kValueCeiling = 1e300;

struct LongNeumaier {
  long double sum = 0.0L;
  long double comp = 0.0L;
  void add(long double x) {
    const long double t = sum + x;
    if (std::fabs(sum) >= std::fabs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  [[nodiscard]] long double value() const { return sum + comp; }
};

void naive_recurse(const Eigen::MatrixXd& a, Eigen::Index col, std::uint32_t used, long double product,
                   LongNeumaier& acc) {
  if (col == a.cols()) {
    acc.add(product);
    return;
  }
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (used & (1u << i)) continue;
    const double x = a(i, col);
    if (x == 0.0) continue;
    naive_recurse(a, col + 1, used | (1u << i), product * x, acc);
  }
}

// Ryser terms for Gray-code indices [first, last), first >= 1.
long double ryser_chunk(const Eigen::MatrixXd& a, std::uint64_t first, std::uint64_t last) {
  const Eigen::Index n = a.rows();
  std::vector<long double> row_sums(static_cast<std::size_t>(n), 0.0L);
  std::uint64_t gray = first ^ (first >> 1);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (gray & (1ULL << j)) {
      for (Eigen::Index i = 0; i < n; ++i) row_sums[static_cast<std::size_t>(i)] += a(i, j);
    }
  }
  LongNeumaier acc;
  auto add_term = [&](std::uint64_t subset) {
    long double prod = 1.0L;
    for (long double s : row_sums) prod *= s;
    acc.add((std::popcount(subset) & 1) ? -prod : prod);
  };
  add_term(gray);
  for (std::uint64_t k = first + 1; k < last; ++k) {
    const int j = std::countr_zero(k);
    gray ^= (1ULL << j);
    const long double sign = (gray & (1ULL << j)) ? 1.0L : -1.0L;
    for (Eigen::Index i = 0; i < n; ++i) row_sums[static_cast<std::size_t>(i)] += sign * a(i, j);
    add_term(gray);
  }
  return acc.value();
}

void require_ryser_domain(const DenseMatrix& a) {
  if (!a.is_square()) throw ValidationError("Ryser requires a square matrix");
  if (a.rows() > kRyserMaxSize) throw ValidationError("Ryser size guard: n > 24");
}

PermValue ryser_finish(long double signed_sum, Eigen::Index n) {
  long double per = (n % 2 == 0) ? signed_sum : -signed_sum;
  // Cancellation can leave a tiny negative residue for permanents that are exactly zero.
  if (per < 0.0L) per = 0.0L;
  return PermValue::from_value(per);
}

}  // namespace

PermValue PermValue::from_value(long double v) {
  PermValue out;
  if (v <= 0.0L) {
    out.log_value = -std::numeric_limits<double>::infinity();
    out.value = 0.0;
    return out;
  }
  out.log_value = static_cast<double>(std::log(v));
  if (v < kValueCeiling) out.value = static_cast<double>(v);
  return out;
}

PermValue PermValue::from_log(double log_v) {
  PermValue out;
  out.log_value = log_v;
  if (log_v == -std::numeric_limits<double>::infinity()) {
    out.value = 0.0;
  } else if (log_v < std::log(kValueCeiling)) {
    out.value = std::exp(log_v);
  }
  return out;
}

PermValue perm_naive(const DenseMatrix& a) {
  if (a.rows() > kNaiveMaxRows) throw ValidationError("naive permanent size guard: n > 10");
  LongNeumaier acc;
  naive_recurse(a.values(), 0, 0u, 1.0L, acc);
  return PermValue::from_value(acc.value());
}

PermValue perm_ryser_serial(const DenseMatrix& a) {
  require_ryser_domain(a);
  const Eigen::Index n = a.rows();
  return ryser_finish(ryser_chunk(a.values(), 1, 1ULL << n), n);
}

PermValue perm_ryser(const DenseMatrix& a, int threads) {
  require_ryser_domain(a);
  const Eigen::Index n = a.rows();
  const std::uint64_t total = 1ULL << n;
  // Chunk count depends only on n, never on the thread count.
  const std::uint64_t chunks = std::min<std::uint64_t>(256, std::max<std::uint64_t>(1, total >> 12));
  const std::uint64_t width = (total - 1 + chunks - 1) / chunks;
  if (threads <= 0) threads = parallel::default_concurrency();

  const auto partials = parallel::map_indices<long double>(chunks, threads, [&](std::size_t c) {
    const std::uint64_t first = 1 + c * width;
    const std::uint64_t last = std::min(total, first + width);
    return first < last ? ryser_chunk(a.values(), first, last) : 0.0L;
  });
  LongNeumaier acc;
  for (long double p : partials) acc.add(p);
  return ryser_finish(acc.value(), n);
}

PermValue perm_rect(const DenseMatrix& a, int threads) {
  if (a.rows() > kRyserMaxSize) throw ValidationError("rectangular permanent size guard: n > 24");
  if (a.is_square()) return perm_ryser(a, threads);
  const Eigen::Index n = a.rows();
  const Eigen::Index m = a.cols();
  Eigen::MatrixXd padded = Eigen::MatrixXd::Ones(n, n);
  padded.leftCols(m) = a.values();
  const PermValue square = perm_ryser(DenseMatrix(std::move(padded)), threads);
  if (square.value) {
    long double fact = 1.0L;
    for (Eigen::Index k = 2; k <= n - m; ++k) fact *= static_cast<long double>(k);
    return PermValue::from_value(static_cast<long double>(*square.value) / fact);
  }
  return PermValue::from_log(square.log_value - std::lgamma(static_cast<double>(n - m + 1)));
}

PermValue perm_flat(Eigen::Index n, Eigen::Index m) {
  if (n < 0 || m < 0 || m > n) throw ValidationError("invalid shape for flat permanent");
  PermValue out;
  out.log_value = std::lgamma(static_cast<double>(n + 1)) - std::lgamma(static_cast<double>(n - m + 1));
  if (out.log_value < std::log(kValueCeiling)) {
    long double prod = 1.0L;
    for (Eigen::Index k = n - m + 1; k <= n; ++k) prod *= static_cast<long double>(k);
    out.value = static_cast<double>(prod);
  }
  return out;
}

PermValue perm_rank_one(std::span<const double> u, std::span<const double> v) {
  const auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (!std::ranges::all_of(u, positive) || !std::ranges::all_of(v, positive)) {
    throw ValidationError("rank-one factors must be positive");
  }
  if (v.empty() || v.size() > u.size()) throw ValidationError("rank-one permanent needs 1 <= m <= n");
  const std::size_t m = v.size();

  // log e_j over the prefix of u processed so far, j = 0..m.
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  std::vector<double> log_e(m + 1, kNegInf);
  log_e[0] = 0.0;
  for (double ui : u) {
    const double log_u = std::log(ui);
    for (std::size_t j = m; j >= 1; --j) {
      const double x = log_e[j];
      const double y = log_u + log_e[j - 1];
      if (y == kNegInf) continue;
      const double hi = std::max(x, y);
      log_e[j] = hi + std::log1p(std::exp(std::min(x, y) - hi));
    }
  }
  double log_v = 0.0;
  for (double vj : v) log_v += std::log(vj);
  return PermValue::from_log(std::lgamma(static_cast<double>(m + 1)) + log_e[m] + log_v);
}

}  // namespace permcast
