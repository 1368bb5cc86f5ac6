#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace permcast::stats {

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) noexcept;
  [[nodiscard]] double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

double compensated_sum(std::span<const double> xs) noexcept;

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;          // sample (n - 1) standard deviation
  double standard_error = 0.0;  // stddev / sqrt(count)
};

/// Mean and spread of a sample. Requires at least two values.
Summary summarize(std::span<const double> xs);

/// Mean and standard error of exp(x) for log-space samples, evaluated with a
/// common shift so that large exponents do not overflow. -inf maps to 0.
struct ExpSummary {
  double log_mean = 0.0;  // log of the sample mean of exp(x)
  double mean = 0.0;
  double standard_error = 0.0;
};
ExpSummary summarize_exp(std::span<const double> log_values);

/// Linear-interpolated quantile (type 7). Sorts a copy.
double quantile(std::span<const double> xs, double p);

inline constexpr std::array<double, 5> kReportedQuantiles{0.05, 0.25, 0.50, 0.75, 0.95};
std::array<double, 5> reported_quantiles(std::span<const double> xs);

double binomial_standard_error(double p, std::size_t trials);

/// Kolmogorov distribution survival function Q(lambda) = 2 sum (-1)^{k-1} e^{-2 k^2 lambda^2}.
double kolmogorov_survival(double lambda);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value
/// (effective-size correction of Stephens).
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

double digamma(double x);
double trigamma(double x);

}  // namespace permcast::stats
