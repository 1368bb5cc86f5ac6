#include "permcast/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace permcast {
namespace {

constexpr double kPsdSlack = 1e-10;
constexpr double kProjectionZero = 1e-8;  // relative to b
constexpr double kInterlacingSlack = 1e-10;
constexpr double kFanSlack = 1e-12;

template <class Matrix>
Matrix drop_column(const Matrix& x, Eigen::Index k) {
  Matrix out(x.rows(), x.cols() - 1);
  out.leftCols(k) = x.leftCols(k);
  out.rightCols(x.cols() - k - 1) = x.rightCols(x.cols() - k - 1);
  return out;
}

// Orthonormal basis of the column span (thin Q of a Householder QR).
template <class Matrix>
Matrix column_basis(const Matrix& x) {
  Eigen::HouseholderQR<Matrix> qr(x);
  return qr.householderQ() * Matrix::Identity(x.rows(), x.cols());
}

std::vector<double> squared_singular_values_ascending(const GaussianSample& x) {
  const Eigen::VectorXd sigma = singular_values(x);
  std::vector<double> out(static_cast<std::size_t>(sigma.size()));
  for (Eigen::Index i = 0; i < sigma.size(); ++i) out[static_cast<std::size_t>(i)] = sigma(i) * sigma(i);
  std::ranges::sort(out);
  return out;
}

template <class Matrix>
QuadraticFormReport quadratic_form_impl(const Matrix& x, const DenseMatrix& a, Eigen::Index k,
                                        const EntryBounds& bounds) {
  const Eigen::Index n = x.rows();
  Matrix projection = Matrix::Identity(n, n);
  if (x.cols() > 1) {
    const Matrix q = column_basis(drop_column(x, k));
    projection -= q * q.adjoint();
  }
  using Scalar = typename Matrix::Scalar;
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> d = a.values().col(k).cwiseSqrt().template cast<Scalar>();
  const Matrix dpd = d.asDiagonal() * projection * d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(dpd, Eigen::EigenvaluesOnly);

  QuadraticFormReport out;
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  out.eigenvalues.assign(lambda.data(), lambda.data() + lambda.size());
  const double zero_tol = kProjectionZero * bounds.upper;
  const double slack = kPsdSlack * bounds.upper;
  bool ok = true;
  for (double l : out.eigenvalues) {
    if (std::abs(l) <= zero_tol) {
      ++out.zero_count;
    } else if (l < bounds.lower - slack || l > bounds.upper + slack) {
      ok = false;
    }
  }
  out.within_bounds = ok && out.zero_count == static_cast<std::size_t>(x.cols() - 1);
  return out;
}

template <class Matrix>
std::vector<double> interlacing_pair(const Matrix& x, Eigen::Index k, std::vector<double>& reduced) {
  reduced = squared_singular_values_ascending(GaussianSample(drop_column(x, k)));
  return squared_singular_values_ascending(GaussianSample(x));
}

std::vector<double> eigenvalues_descending(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& l = eig.eigenvalues();
  return reverse_order(std::span<const double>(l.data(), static_cast<std::size_t>(l.size())));
}

}  // namespace

SpectrumReport make_report(std::vector<double> eigenvalues, double epsilon, double s) {
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  if (!(s > 0.0)) throw ValidationError("normalizer s must be positive");
  for (double& l : eigenvalues) {
    if (!(l >= -kPsdSlack)) throw ValidationError("eigenvalue below PSD slack");
    l = std::max(l, 0.0);
  }
  std::ranges::sort(eigenvalues);
  return {std::move(eigenvalues), epsilon, s};
}

SpectrumReport eigenvalues_of_Z(const DenseMatrix& a, FieldKind field, std::uint64_t seed, double epsilon, double s) {
  return make_report(squared_singular_values_ascending(sample_X_tilde(a, field, seed)), epsilon, s);
}

double log_det_plain(const SpectrumReport& report) {
  double sum = 0.0;
  for (double l : report.eigenvalues) sum += std::log(l);
  return sum;
}

double log_det_cutoff(const SpectrumReport& report) {
  double sum = 0.0;
  for (double l : report.eigenvalues) sum += std::log(std::max(l, report.epsilon));
  return sum;
}

TailStatistic tail_statistic(const SpectrumReport& report) {
  if (!(report.epsilon < 1.0)) throw ValidationError("tail statistic requires epsilon < 1");
  TailStatistic out;
  const double log_eps = std::log(report.epsilon);
  for (double l : report.eigenvalues) {
    if (!(l < report.epsilon)) break;
    ++out.count_below;
    if (l == 0.0) {
      out.singular = true;
      continue;
    }
    out.value -= std::log(l);
    out.cutoff_gap += log_eps - std::log(l);
  }
  if (out.singular) {
    out.value = std::numeric_limits<double>::infinity();
    out.cutoff_gap = std::numeric_limits<double>::infinity();
    return out;
  }
  out.value /= report.s;
  out.cutoff_gap /= report.s;
  return out;
}

namespace {
double prop31_common(Eigen::Index n, Eigen::Index m, double a, double eps, double dof_denominator) {
  if (!(n > m + 3)) throw ValidationError("bound requires n > m + 3");
  if (m < 1) throw ValidationError("bound requires m >= 1");
  if (!(eps > 0.0 && eps <= 1.0 / std::numbers::e)) throw ValidationError("bound requires 0 < eps <= 1/e");
  if (!(a > 0.0)) throw ValidationError("bound requires a > 0");
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  return eps * std::abs(std::log(eps)) / a * (nn + mm) * mm / (nn * dof_denominator);
}
}  // namespace

double prop31_rhs(Eigen::Index n, Eigen::Index m, double a, double eps) {
  return prop31_common(n, m, a, eps, static_cast<double>(n - m + 1));
}

double prop31_rhs_corrected(Eigen::Index n, Eigen::Index m, double a, double eps) {
  return prop31_common(n, m, a, eps, static_cast<double>(n - m - 1));
}

template <class Matrix>
std::vector<double> inverse_gram_diagonal(const Matrix& v) {
  const Eigen::Index m = v.cols();
  std::vector<double> out(static_cast<std::size_t>(m));
  for (Eigen::Index k = 0; k < m; ++k) {
    using Vector = Eigen::Matrix<typename Matrix::Scalar, Eigen::Dynamic, 1>;
    Vector residual = v.col(k);
    if (m > 1) {
      const Matrix q = column_basis(drop_column(v, k));
      residual -= q * (q.adjoint() * residual);
    }
    const double quad = residual.squaredNorm();
    const double floor = std::pow(static_cast<double>(v.rows()) * std::numeric_limits<double>::epsilon(), 2) *
                         v.col(k).squaredNorm();
    out[static_cast<std::size_t>(k)] = quad > floor ? 1.0 / quad : std::numeric_limits<double>::infinity();
  }
  return out;
}

template std::vector<double> inverse_gram_diagonal<Eigen::MatrixXd>(const Eigen::MatrixXd&);
template std::vector<double> inverse_gram_diagonal<Eigen::MatrixXcd>(const Eigen::MatrixXcd&);

std::vector<double> inverse_diagonal(const DenseMatrix& a, FieldKind field, std::uint64_t seed) {
  const GaussianSample x = sample_X_tilde(a, field, seed);
  return std::visit([](const auto& mat) { return inverse_gram_diagonal(mat); }, x);
}

double factorization_identity_gap(const Eigen::MatrixXd& v, Eigen::Index k) {
  const Eigen::Index m = v.cols();
  if (k < 0 || k >= m) throw ValidationError("column index out of range");
  if (m > v.rows()) throw ValidationError("V must have at least as many rows as columns");
  Eigen::FullPivLU<Eigen::MatrixXd> rank_check(v);
  if (rank_check.rank() < m) throw ValidationError("V is rank deficient");

  const Eigen::MatrixXd gram = v.transpose() * v;
  const double det_full = gram.determinant();
  const Eigen::VectorXd vk = v.col(k);
  double det_reduced = 1.0;
  double quad = vk.squaredNorm();
  if (m > 1) {
    const Eigen::MatrixXd vr = drop_column(v, k);
    const Eigen::MatrixXd gram_r = vr.transpose() * vr;
    det_reduced = gram_r.determinant();
    // P_k = I - V_k (V_k^T V_k)^{-1} V_k^T
    const Eigen::VectorXd proj = vr * gram_r.ldlt().solve(vr.transpose() * vk);
    quad -= vk.dot(proj);
  }
  return std::abs(det_full - det_reduced * quad) / std::abs(det_full);
}

QuadraticFormReport quadratic_form_spectrum(const DenseMatrix& a, Eigen::Index k, FieldKind field,
                                            std::uint64_t seed, const EntryBounds& bounds) {
  bounds.validate();
  if (!(bounds.lower > 0.0)) throw ValidationError("quadratic-form bounds need a > 0");
  if (k < 0 || k >= a.cols()) throw ValidationError("column index out of range");
  const GaussianSample x = sample_X(a, field, seed);
  return std::visit([&](const auto& mat) { return quadratic_form_impl(mat, a, k, bounds); }, x);
}

bool quadratic_form_bounds_check(const DenseMatrix& a, Eigen::Index k, FieldKind field, std::uint64_t seed,
                                 const EntryBounds& bounds) {
  return quadratic_form_spectrum(a, k, field, seed, bounds).within_bounds;
}

bool quadratic_form_bounds_check(const DenseMatrix& a, Eigen::Index k, FieldKind field, std::uint64_t seed) {
  return quadratic_form_bounds_check(a, k, field, seed, EntryBounds{a.min_entry(), a.max_entry()});
}

std::vector<double> reverse_order(std::span<const double> eigenvalues) {
  return {eigenvalues.rbegin(), eigenvalues.rend()};
}

bool fan_inequality_check(const Eigen::MatrixXd& m1, const Eigen::MatrixXd& m2, Eigen::Index i, Eigen::Index j) {
  const Eigen::Index dim = m1.rows();
  if (m1.cols() != dim || m2.rows() != dim || m2.cols() != dim) throw ValidationError("Fan check needs equal square matrices");
  if (i < 0 || j < 0 || i + j + 1 > dim) throw ValidationError("Fan index out of range");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig1(m1);
  if (!(eig1.eigenvalues().minCoeff() > 0.0)) throw ValidationError("M1 must be positive definite");
  const Eigen::MatrixXd root = eig1.operatorSqrt();
  const Eigen::MatrixXd product = root * m2 * root;

  const auto l2 = eigenvalues_descending(m2);
  const auto l12 = eigenvalues_descending(0.5 * (product + product.transpose()));
  std::vector<double> linv(static_cast<std::size_t>(dim));
  for (Eigen::Index t = 0; t < dim; ++t) linv[static_cast<std::size_t>(t)] = 1.0 / eig1.eigenvalues()(t);
  std::ranges::sort(linv, std::greater<>());

  const double lhs = l2[static_cast<std::size_t>(i + j)];
  const double rhs = l12[static_cast<std::size_t>(i)] * linv[static_cast<std::size_t>(j)];
  return lhs <= rhs + kFanSlack * std::max(std::abs(lhs), std::abs(rhs));
}

bool interlacing_check(const DenseMatrix& a, Eigen::Index k, FieldKind field, std::uint64_t seed) {
  if (a.cols() < 2) throw ValidationError("interlacing needs m >= 2");
  if (k < 0 || k >= a.cols()) throw ValidationError("column index out of range");
  const GaussianSample x = sample_X_tilde(a, field, seed);
  std::vector<double> reduced;
  const auto full = std::visit([&](const auto& mat) { return interlacing_pair(mat, k, reduced); }, x);
  const double slack = kInterlacingSlack * std::max(1.0, full.back());
  for (std::size_t l = 0; l < reduced.size(); ++l) {
    if (full[l] > reduced[l] + slack) return false;
    if (reduced[l] > full[l + 1] + slack) return false;
  }
  return true;
}

}  // namespace permcast
