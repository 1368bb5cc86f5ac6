#include "permcast/laguerre.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "permcast/estimator.hpp"
#include "permcast/matrix.hpp"
#include "permcast/parallel.hpp"
#include "permcast/random.hpp"

namespace permcast {
namespace {

constexpr int kRescaleBits = 512;
constexpr double kRescaleThreshold = 0x1p512;

// Mantissa-with-exponent view of the recurrence state; value = mantissa * 2^exp2.
double damp(double mantissa, long exp2, double x) {
  if (mantissa == 0.0) return 0.0;
  int e = 0;
  const double frac = std::frexp(mantissa, &e);
  const double log_mag = static_cast<double>(exp2 + e) * std::numbers::ln2 - 0.5 * x;
  return frac * std::exp(log_mag);
}

template <class Sink>
void run_recurrence(int k_max, int beta, double x, Sink&& sink) {
  if (beta != 0 && beta != 1) throw ValidationError("laguerre_scaled supports beta in {0, 1}");
  if (k_max < 0) throw ValidationError("Laguerre degree must be >= 0");
  if (!(x >= 0.0) || !std::isfinite(x)) throw ValidationError("Laguerre argument must be finite and >= 0");
  const double b = beta;
  double prev = 1.0;
  long exp2 = 0;
  sink(0, damp(prev, exp2, x));
  if (k_max == 0) return;
  double cur = 1.0 + b - x;
  sink(1, damp(cur, exp2, x));
  for (int k = 1; k < k_max; ++k) {
    const double next = ((2.0 * k + 1.0 + b - x) * cur - (k + b) * prev) / (k + 1.0);
    prev = cur;
    cur = next;
    if (std::abs(cur) > kRescaleThreshold) {
      cur = std::ldexp(cur, -kRescaleBits);
      prev = std::ldexp(prev, -kRescaleBits);
      exp2 += kRescaleBits;
    }
    sink(k + 1, damp(cur, exp2, x));
  }
}

// 31-point Gauss-Kronrod on [a, b], bisected while the Kronrod-Gauss gap
// exceeds 1e-11 relative. The Jacobian is folded into the integrand on [-1, 1].
template <class F>
double integrate_panel(F& f, double a, double b, int depth, double& error) {
  using boost::math::quadrature::gauss_kronrod;
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double err = 0.0;
  const double value =
      gauss_kronrod<double, 31>::integrate([&](double t) { return half * f(mid + half * t); }, -1.0, 1.0, 0, 0.0, &err);
  if (depth == 0 || err <= 1e-11 * std::abs(value)) {
    error += err;
    return value;
  }
  return integrate_panel(f, a, mid, depth - 1, error) + integrate_panel(f, mid, b, depth - 1, error);
}

template <class F>
QuadratureResult integrate_panels(F&& f, std::span<const double> breaks) {
  QuadratureResult out;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) continue;
    out.value += integrate_panel(f, breaks[i], breaks[i + 1], 8, out.error);
  }
  out.converged = out.error <= kQuadratureTolerance;
  return out;
}

// x-space breakpoints on [lo, hi]: width at most a quarter period of the
// cos(2 n sqrt(x)) oscillation, i.e. pi sqrt(x) / (2n), with the hard-edge
// scale 1/n^2 as the first step.
std::vector<double> oscillation_breaks(Eigen::Index n, double lo, double hi) {
  const double nn = static_cast<double>(n);
  const double edge = 1.0 / (nn * nn);
  std::vector<double> breaks{lo};
  double x = lo;
  while (x < hi) {
    const double width = std::max(edge, std::numbers::pi * std::sqrt(x) / (2.0 * nn));
    x = std::min(hi, x + width);
    breaks.push_back(x);
  }
  return breaks;
}

}  // namespace

LaguerreContext::LaguerreContext(Eigen::Index n) : n_(n) {
  if (n < 1) throw ValidationError("Laguerre context requires n >= 1");
}

double laguerre_scaled(int k, int beta, double x) {
  double out = 0.0;
  run_recurrence(k, beta, x, [&](int j, double v) {
    if (j == k) out = v;
  });
  return out;
}

std::vector<double> laguerre_scaled_sequence(int k_max, int beta, double x) {
  std::vector<double> out(static_cast<std::size_t>(std::max(k_max, 0)) + 1);
  run_recurrence(k_max, beta, x, [&](int j, double v) { out[static_cast<std::size_t>(j)] = v; });
  return out;
}

double density_sum_form(const LaguerreContext& ctx, double x) {
  if (!(x >= 0.0)) throw ValidationError("density argument must be >= 0");
  const int n = static_cast<int>(ctx.n());
  double sum = 0.0;
  run_recurrence(n - 1, 0, static_cast<double>(n) * x, [&](int, double v) { sum += v * v; });
  return sum;
}

double density_cd_form(const LaguerreContext& ctx, double x) {
  if (ctx.n() < 2) throw ValidationError("Christoffel-Darboux form requires n >= 2");
  if (!(x >= 0.0)) throw ValidationError("density argument must be >= 0");
  const int n = static_cast<int>(ctx.n());
  const auto l = laguerre_scaled_sequence(n, 1, static_cast<double>(n) * x);
  const auto idx = [](int k) { return static_cast<std::size_t>(k); };
  return static_cast<double>(n) * (l[idx(n - 1)] * l[idx(n - 1)] - l[idx(n)] * l[idx(n - 2)]);
}

DensityEval evaluate_density(const LaguerreContext& ctx, double x) {
  return {x, density_sum_form(ctx, x), density_cd_form(ctx, x)};
}

QuadratureResult density_mass(const LaguerreContext& ctx, double lo, double hi) {
  if (!(lo >= 0.0 && hi >= lo)) throw ValidationError("density_mass needs 0 <= lo <= hi");
  const auto breaks = oscillation_breaks(ctx.n(), lo, hi);
  return integrate_panels([&](double x) { return density_sum_form(ctx, x); }, breaks);
}

QuadratureResult density_normalization(const LaguerreContext& ctx) {
  return density_mass(ctx, 0.0, 10.0 + 40.0 / static_cast<double>(ctx.n()));
}

QuadratureResult integral_A2(const LaguerreContext& ctx, double eps, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ValidationError("integral_A2 requires 0 <= alpha < 1");
  if (!(eps > 0.0 && eps <= 1.0)) throw ValidationError("integral_A2 requires 0 < eps <= 1");
  const double power = 1.0 - alpha;
  // x^{-alpha} dx = du / (1 - alpha) with x = u^{1/(1-alpha)}.
  auto breaks = oscillation_breaks(ctx.n(), 0.0, eps);
  // First panel split geometrically toward 0.
  std::vector<double> head;
  for (int j = 60; j >= 1; --j) head.push_back(std::ldexp(breaks[1], -j));
  breaks.insert(breaks.begin() + 1, head.begin(), head.end());
  for (double& b : breaks) b = std::pow(b, power);
  QuadratureResult r = integrate_panels(
      [&](double u) { return density_sum_form(ctx, std::pow(u, 1.0 / power)); }, breaks);
  r.value /= power;
  r.error /= power;
  r.converged = r.error <= kQuadratureTolerance;
  return r;
}

std::vector<double> complex_wishart_eigs(Eigen::Index n, std::uint64_t seed) {
  const GaussianSample x = sample_X(gen_flat(n, n), FieldKind::Complex, seed);
  const Eigen::VectorXd sigma = singular_values(x);
  std::vector<double> out(static_cast<std::size_t>(sigma.size()));
  const double scale = 1.0 / static_cast<double>(n);
  for (Eigen::Index i = 0; i < sigma.size(); ++i) out[static_cast<std::size_t>(i)] = sigma(i) * sigma(i) * scale;
  std::ranges::sort(out);
  return out;
}

namespace {

std::vector<double> histogram_edges(std::size_t bins, double lo, double hi) {
  if (bins < 1 || !(hi > lo) || lo < 0.0) throw ValidationError("invalid histogram range");
  std::vector<double> edges(bins + 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b <= bins; ++b) edges[b] = lo + width * static_cast<double>(b);
  return edges;
}

std::size_t bin_index(double value, std::size_t bins, double lo, double hi) {
  if (value < lo || value >= hi) return bins;
  const double width = (hi - lo) / static_cast<double>(bins);
  return std::min(bins - 1, static_cast<std::size_t>((value - lo) / width));
}

HistogramComparison finish_histogram(Eigen::Index n, std::vector<double> edges, std::span<const std::size_t> counts,
                                     std::size_t draws) {
  const LaguerreContext ctx(n);
  HistogramComparison out;
  const std::size_t bins = counts.size();
  const double total = static_cast<double>(draws) * static_cast<double>(n);
  out.empirical.resize(bins);
  out.exact.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out.empirical[b] = static_cast<double>(counts[b]) / total;
    out.exact[b] = density_mass(ctx, edges[b], edges[b + 1]).value;
    out.l1_distance += std::abs(out.empirical[b] - out.exact[b]);
  }
  out.edges = std::move(edges);
  return out;
}

}  // namespace

HistogramComparison compare_histogram(Eigen::Index n, std::span<const double> pooled, std::size_t draws,
                                      std::size_t bins, double lo, double hi) {
  auto edges = histogram_edges(bins, lo, hi);
  if (draws < 1) throw ValidationError("histogram needs at least one draw");
  std::vector<std::size_t> counts(bins, 0);
  for (double l : pooled) {
    const std::size_t b = bin_index(l, bins, lo, hi);
    if (b < bins) counts[b]++;
  }
  return finish_histogram(n, std::move(edges), counts, draws);
}

HistogramComparison compare_histogram(Eigen::Index n, std::size_t draws, std::size_t bins, double lo, double hi,
                                      std::uint64_t seed, int threads) {
  auto edges = histogram_edges(bins, lo, hi);
  if (draws < 1) throw ValidationError("histogram needs at least one draw");
  if (threads <= 0) threads = parallel::default_concurrency();
  const auto per_draw = parallel::map_indices<std::vector<std::size_t>>(draws, threads, [&](std::size_t t) {
    std::vector<std::size_t> c(bins + 1, 0);
    for (double l : complex_wishart_eigs(n, rng::derive_seed(seed, t))) c[bin_index(l, bins, lo, hi)]++;
    return c;
  });
  std::vector<std::size_t> counts(bins, 0);
  for (const auto& c : per_draw) {
    for (std::size_t b = 0; b < bins; ++b) counts[b] += c[b];
  }
  return finish_histogram(n, std::move(edges), counts, draws);
}

PropA1Table propA1_scan(std::span<const Eigen::Index> n_values, std::span<const double> eps_values, double alpha) {
  if (!(alpha < 0.5)) throw ValidationError("propA1_scan requires alpha < 1/2");
  if (n_values.empty() || eps_values.empty()) throw ValidationError("propA1_scan needs a nonempty grid");
  PropA1Table table;
  table.n_values.assign(n_values.begin(), n_values.end());
  table.eps_values.assign(eps_values.begin(), eps_values.end());
  table.alpha = alpha;
  for (Eigen::Index n : n_values) {
    const LaguerreContext ctx(n);
    auto& row = table.values.emplace_back();
    for (double eps : eps_values) row.push_back(integral_A2(ctx, eps, alpha).value);
  }
  const auto n_max = std::ranges::max_element(table.n_values) - table.n_values.begin();
  const auto eps_min = std::ranges::min_element(table.eps_values) - table.eps_values.begin();
  table.limit_proxy = table.values[static_cast<std::size_t>(n_max)][static_cast<std::size_t>(eps_min)];
  return table;
}

}  // namespace permcast
