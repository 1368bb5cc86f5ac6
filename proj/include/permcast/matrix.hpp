#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace permcast {

/// Raised when an input violates a documented precondition.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when reading or writing a file fails.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Closed entry interval [lower, upper] with 0 <= lower <= upper, upper > 0.
struct EntryBounds {
  double lower = 0.0;
  double upper = 1.0;

  void validate() const;
};

/// Sparse-column ensemble: at most ceil(gamma*n) zeros per column, n x ceil(theta*n)
/// shape, nonzero entries in `bounds`. Requires gamma + theta < 1.
struct SparseColumnSpec {
  double gamma = 0.0;
  double theta = 0.5;
  EntryBounds bounds{1.0, 2.0};

  void validate() const;
};

/// Rectangular nonnegative matrix with n rows and m <= n columns.
///
/// Entries are finite and nonnegative; the invariant is checked on
/// construction and the object is immutable afterwards.
class DenseMatrix {
 public:
  explicit DenseMatrix(Eigen::MatrixXd values);

  [[nodiscard]] Eigen::Index rows() const noexcept { return values_.rows(); }
  [[nodiscard]] Eigen::Index cols() const noexcept { return values_.cols(); }
  [[nodiscard]] double operator()(Eigen::Index i, Eigen::Index j) const { return values_(i, j); }
  [[nodiscard]] const Eigen::MatrixXd& values() const noexcept { return values_; }

  [[nodiscard]] double min_entry() const { return values_.minCoeff(); }
  [[nodiscard]] double max_entry() const { return values_.maxCoeff(); }
  [[nodiscard]] bool is_square() const noexcept { return rows() == cols(); }

  /// Copy with column k removed.
  [[nodiscard]] DenseMatrix without_column(Eigen::Index k) const;

  friend bool operator==(const DenseMatrix& a, const DenseMatrix& b) {
    return a.values_.rows() == b.values_.rows() && a.values_.cols() == b.values_.cols() &&
           a.values_ == b.values_;
  }

 private:
  Eigen::MatrixXd values_;
};

bool validate_class(const DenseMatrix& a, const EntryBounds& bounds);

/// A / sqrt(n + m). The estimator ratio det Z / per is invariant under this scaling.
DenseMatrix scale_tilde(const DenseMatrix& a);

DenseMatrix gen_flat(Eigen::Index n, Eigen::Index m);
DenseMatrix gen_identity(Eigen::Index n);
DenseMatrix gen_uniform(Eigen::Index n, Eigen::Index m, const EntryBounds& bounds, std::uint64_t seed);
DenseMatrix gen_rank_one(std::span<const double> u, std::span<const double> v);
DenseMatrix gen_sparse_column(Eigen::Index n, const SparseColumnSpec& spec, std::uint64_t seed);

// Plain text: "n m" header, then n lines of m space-separated decimals.
DenseMatrix parse_matrix(std::istream& in);
DenseMatrix read_matrix_file(const std::filesystem::path& path);
void write_matrix(std::ostream& out, const DenseMatrix& a);
void write_matrix_file(const std::filesystem::path& path, const DenseMatrix& a);

}  // namespace permcast
