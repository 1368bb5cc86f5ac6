#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "permcast/estimator.hpp"
#include "permcast/matrix.hpp"

namespace permcast {

/// Ascending eigenvalues of Z(A~) together with the cutoff and normalizer
/// used by the statistics below.
struct SpectrumReport {
  std::vector<double> eigenvalues;
  double epsilon = 0.01;
  double s = 1.0;
};

/// Sorts ascending and clamps PSD round-off in [-1e-10, 0) to zero.
/// Throws if an eigenvalue is more negative than that, or if epsilon/s are not positive.
SpectrumReport make_report(std::vector<double> eigenvalues, double epsilon, double s);

/// Eigenvalues of Z(A~) = X(A~)^* X(A~) as squared singular values of X(A~).
SpectrumReport eigenvalues_of_Z(const DenseMatrix& a, FieldKind field, std::uint64_t seed, double epsilon = 0.01,
                                double s = 1.0);

double log_det_plain(const SpectrumReport& report);

/// sum_i log(max(lambda_i, epsilon)).
double log_det_cutoff(const SpectrumReport& report);

struct TailStatistic {
  double value = 0.0;       // (1/s) sum_{lambda < eps} log(1/lambda); +inf if some lambda == 0
  std::size_t count_below = 0;
  double cutoff_gap = 0.0;  // (1/s) sum_{lambda < eps} log(eps/lambda) <= value
  bool singular = false;
};

/// Requires epsilon < 1.
TailStatistic tail_statistic(const SpectrumReport& report);

/// (eps |log eps| / a) (n+m) m / (n (n-m+1)); requires n > m + 3, 0 < eps <= 1/e, a > 0.
double prop31_rhs(Eigen::Index n, Eigen::Index m, double a, double eps);

/// Same bound with the inverse chi-square mean 1/(n-m-1) in place of 1/(n-m+1).
double prop31_rhs_corrected(Eigen::Index n, Eigen::Index m, double a, double eps);

/// Diagonal of Z(A~)^{-1}, entry k computed as 1 / (v_k^* P_k v_k) where P_k
/// projects onto the orthogonal complement of the other columns. A singular
/// direction shows up as +inf in that entry.
std::vector<double> inverse_diagonal(const DenseMatrix& a, FieldKind field, std::uint64_t seed);

template <class Matrix>
std::vector<double> inverse_gram_diagonal(const Matrix& v);

/// Relative gap |det(V^T V) - det(V_k^T V_k) v_k^T P_k v_k| / det(V^T V).
/// Throws ValidationError when V is rank deficient.
double factorization_identity_gap(const Eigen::MatrixXd& v, Eigen::Index k);

struct QuadraticFormReport {
  std::vector<double> eigenvalues;  // of D_k P_k D_k, ascending
  std::size_t zero_count = 0;
  bool within_bounds = false;
};

/// Eigenvalues of D_k P_k D_k for X(A): m-1 structural zeros, the rest in [a, b].
QuadraticFormReport quadratic_form_spectrum(const DenseMatrix& a, Eigen::Index k, FieldKind field,
                                            std::uint64_t seed, const EntryBounds& bounds);
bool quadratic_form_bounds_check(const DenseMatrix& a, Eigen::Index k, FieldKind field, std::uint64_t seed);
bool quadratic_form_bounds_check(const DenseMatrix& a, Eigen::Index k, FieldKind field, std::uint64_t seed,
                                 const EntryBounds& bounds);

/// Reverses the order; ascending <-> descending.
std::vector<double> reverse_order(std::span<const double> eigenvalues);

/// Fan's product inequality lambda_{i+j+1}(M2) <= lambda_{i+1}(M1 M2) lambda_{j+1}(M1^{-1})
/// with eigenvalues in decreasing order, i and j counted from zero.
bool fan_inequality_check(const Eigen::MatrixXd& m1, const Eigen::MatrixXd& m2, Eigen::Index i, Eigen::Index j);

/// Cauchy interlacing between Z(A~) and the Gram matrix with column k deleted,
/// both from the same draw.
bool interlacing_check(const DenseMatrix& a, Eigen::Index k, FieldKind field, std::uint64_t seed);

}  // namespace permcast
