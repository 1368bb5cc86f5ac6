#include "permcast/estimator.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "permcast/flat_case.hpp"
#include "permcast/parallel.hpp"
#include "permcast/random.hpp"
#include "permcast/stats.hpp"

namespace permcast {
namespace {

template <class Matrix>
double log_det_from_singular_values(const Matrix& x, bool diagonal_gram) {
  Eigen::VectorXd sigma;
  if (diagonal_gram) {
    sigma = x.colwise().norm().transpose();
  } else {
    Eigen::BDCSVD<Matrix> svd(x);
    sigma = svd.singularValues();
  }
  stats::CompensatedSum acc;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (!(sigma(i) > 0.0)) return -std::numeric_limits<double>::infinity();
    acc.add(std::log(sigma(i)));
  }
  return 2.0 * acc.value();
}

}  // namespace

std::string_view to_string(FieldKind field) noexcept {
  return field == FieldKind::Real ? "real" : "complex";
}

FieldKind parse_field(std::string_view text) {
  if (text == "real") return FieldKind::Real;
  if (text == "complex") return FieldKind::Complex;
  throw ValidationError("unknown field '" + std::string(text) + "' (expected real|complex)");
}

GaussianSample sample_X(const DenseMatrix& a, FieldKind field, std::uint64_t seed) {
  auto engine = rng::make_engine(seed);
  std::normal_distribution<double> normal;
  const Eigen::Index n = a.rows();
  const Eigen::Index m = a.cols();
  if (field == FieldKind::Real) {
    Eigen::MatrixXd x(n, m);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < m; ++j) x(i, j) = std::sqrt(a(i, j)) * normal(engine);
    return x;
  }
  const double half = std::sqrt(0.5);
  Eigen::MatrixXcd x(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double re = normal(engine);
      const double im = normal(engine);
      x(i, j) = std::sqrt(a(i, j)) * half * std::complex<double>(re, im);
    }
  }
  return x;
}

GaussianSample sample_X_tilde(const DenseMatrix& a, FieldKind field, std::uint64_t seed) {
  GaussianSample x = sample_X(a, field, seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(a.rows() + a.cols()));
  std::visit([scale](auto& mat) { mat *= scale; }, x);
  return x;
}

Eigen::VectorXd singular_values(const GaussianSample& x) {
  return std::visit(
      [](const auto& mat) -> Eigen::VectorXd {
        using M = std::decay_t<decltype(mat)>;
        Eigen::BDCSVD<M> svd(mat);
        return svd.singularValues();
      },
      x);
}

bool columns_have_disjoint_support(const DenseMatrix& a) {
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    int nonzeros = 0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) nonzeros += a(i, j) != 0.0;
    if (nonzeros > 1) return false;
  }
  return true;
}

EstimateRun log_det_estimate(const DenseMatrix& a, FieldKind field, std::uint64_t seed) {
  const bool diagonal = columns_have_disjoint_support(a);
  const GaussianSample x = sample_X(a, field, seed);
  EstimateRun run;
  run.field = field;
  run.seed = seed;
  run.n = a.rows();
  run.m = a.cols();
  run.log_det = std::visit([diagonal](const auto& mat) { return log_det_from_singular_values(mat, diagonal); }, x);
  return run;
}

std::vector<double> log_det_samples(const DenseMatrix& a, FieldKind field, std::uint64_t seed, std::size_t count,
                                    int threads, std::uint64_t key) {
  if (threads <= 0) threads = parallel::default_concurrency();
  return parallel::map_indices<double>(count, threads, [&](std::size_t t) {
    return log_det_estimate(a, field, rng::derive_seed(seed, key, t)).log_det;
  });
}

std::vector<double> log_det_samples_serial(const DenseMatrix& a, FieldKind field, std::uint64_t seed,
                                           std::size_t count, std::uint64_t key) {
  return parallel::map_indices_serial<double>(count, [&](std::size_t t) {
    return log_det_estimate(a, field, rng::derive_seed(seed, key, t)).log_det;
  });
}

AveragedEstimate averaged_estimate(const DenseMatrix& a, std::size_t trials, FieldKind field, std::uint64_t seed,
                                   int threads) {
  if (trials < 2) throw ValidationError("averaged estimate needs at least two trials");
  const auto logs = log_det_samples(a, field, seed, trials, threads);
  const stats::ExpSummary s = stats::summarize_exp(logs);
  return {s.mean, s.standard_error, s.log_mean, trials};
}

double chebyshev_coverage_bound(Eigen::Index n, Eigen::Index m, double delta, std::size_t samples) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ValidationError("delta must be positive and finite");
  if (samples < 1) throw ValidationError("sample count must be >= 1");
  const FlatMoments moments = flat_moments(n, m);
  return (moments.variance_ratio - 1.0) / (delta * delta * static_cast<double>(samples));
}

}  // namespace permcast
