#include "permcast/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "permcast/matrix.hpp"

namespace permcast::stats {

void CompensatedSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    compensation_ += (sum_ - t) + x;
  } else {
    compensation_ += (x - t) + sum_;
  }
  sum_ = t;
}

double compensated_sum(std::span<const double> xs) noexcept {
  CompensatedSum acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

Summary summarize(std::span<const double> xs) {
  if (xs.size() < 2) throw ValidationError("summary needs at least two samples");
  Summary s;
  s.count = xs.size();
  const double n = static_cast<double>(xs.size());
  s.mean = compensated_sum(xs) / n;
  CompensatedSum sq;
  for (double x : xs) sq.add((x - s.mean) * (x - s.mean));
  s.stddev = std::sqrt(sq.value() / (n - 1.0));
  s.standard_error = s.stddev / std::sqrt(n);
  return s;
}

ExpSummary summarize_exp(std::span<const double> log_values) {
  if (log_values.size() < 2) throw ValidationError("summary needs at least two samples");
  double shift = -std::numeric_limits<double>::infinity();
  for (double x : log_values) shift = std::max(shift, x);
  ExpSummary out;
  if (!std::isfinite(shift)) {
    out.log_mean = shift;
    return out;
  }
  std::vector<double> scaled(log_values.size());
  std::ranges::transform(log_values, scaled.begin(), [shift](double x) { return std::exp(x - shift); });
  const Summary s = summarize(scaled);
  const double factor = std::exp(shift);
  out.log_mean = shift + std::log(s.mean);
  out.mean = s.mean * factor;
  out.standard_error = s.standard_error * factor;
  return out;
}

double quantile(std::span<const double> xs, double p) {
  if (xs.empty()) throw ValidationError("quantile of empty sample");
  std::vector<double> sorted(xs.begin(), xs.end());
  std::ranges::sort(sorted);
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::array<double, 5> reported_quantiles(std::span<const double> xs) {
  std::array<double, 5> out{};
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = quantile(xs, kReportedQuantiles[i]);
  return out;
}

double binomial_standard_error(double p, std::size_t trials) {
  if (trials == 0) throw ValidationError("binomial standard error needs trials > 0");
  return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(trials));
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;  // series converges slowly here and Q is 1 to double precision
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-16 * std::abs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ValidationError("KS test needs two nonempty samples");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::ranges::sort(x);
  std::ranges::sort(y);
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());

  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double t = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == t) ++i;
    while (j < y.size() && y[j] == t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }

  const double ne = std::sqrt(nx * ny / (nx + ny));
  return {d, kolmogorov_survival((ne + 0.12 + 0.11 / ne) * d)};
}

double digamma(double x) { return boost::math::digamma(x); }
double trigamma(double x) { return boost::math::trigamma(x); }

}  // namespace permcast::stats
