#include "permcast/matrix.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <vector>

#include "permcast/random.hpp"

namespace permcast {
namespace {

constexpr std::uint64_t kUniformStream = 0x756e69666f726dULL;
constexpr std::uint64_t kSparseStream = 0x737061727365ULL;

void require_shape(Eigen::Index n, Eigen::Index m) {
  if (n < 1 || m < 1) throw ValidationError("matrix shape must be positive");
  if (m > n) throw ValidationError("invalid shape: m = " + std::to_string(m) + " exceeds n = " + std::to_string(n));
}

// ceil(x * n) robust to representation error in x (0.3 * 60 must give 18).
Eigen::Index ceil_fraction(double x, Eigen::Index n) {
  return static_cast<Eigen::Index>(std::ceil(x * static_cast<double>(n) - 1e-9));
}

double parse_double(const std::string& token, std::size_t line) {
  const char* begin = token.data();
  const char* end = begin + token.size();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ValidationError("line " + std::to_string(line) + ": cannot parse '" + token + "' as a number");
  }
  if (!std::isfinite(value)) throw ValidationError("line " + std::to_string(line) + ": non-finite entry");
  if (value < 0.0) throw ValidationError("line " + std::to_string(line) + ": negative entry " + token);
  return value;
}

}  // namespace

void EntryBounds::validate() const {
  if (!(std::isfinite(lower) && std::isfinite(upper))) throw ValidationError("entry bounds must be finite");
  if (lower < 0.0) throw ValidationError("entry lower bound must be >= 0");
  if (!(upper > 0.0)) throw ValidationError("entry upper bound must be > 0");
  if (lower > upper) throw ValidationError("entry bounds must satisfy lower <= upper");
}

void SparseColumnSpec::validate() const {
  bounds.validate();
  if (!(bounds.lower > 0.0)) throw ValidationError("sparse-column spec needs a positive lower bound for nonzeros");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ValidationError("gamma must lie in [0, 1)");
  if (!(theta > 0.0 && theta < 1.0)) throw ValidationError("theta must lie in (0, 1)");
  if (!(gamma + theta < 1.0)) throw ValidationError("infeasible sparse-column spec: gamma + theta >= 1");
}

DenseMatrix::DenseMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
  require_shape(values_.rows(), values_.cols());
  for (Eigen::Index j = 0; j < values_.cols(); ++j) {
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
      const double x = values_(i, j);
      if (!std::isfinite(x)) throw ValidationError("matrix entries must be finite");
      if (x < 0.0) throw ValidationError("matrix entries must be nonnegative");
    }
  }
}

DenseMatrix DenseMatrix::without_column(Eigen::Index k) const {
  if (k < 0 || k >= cols()) throw ValidationError("column index out of range");
  if (cols() == 1) throw ValidationError("cannot delete the only column");
  Eigen::MatrixXd out(rows(), cols() - 1);
  out.leftCols(k) = values_.leftCols(k);
  out.rightCols(cols() - k - 1) = values_.rightCols(cols() - k - 1);
  return DenseMatrix(std::move(out));
}

bool validate_class(const DenseMatrix& a, const EntryBounds& bounds) {
  return a.min_entry() >= bounds.lower && a.max_entry() <= bounds.upper;
}

DenseMatrix scale_tilde(const DenseMatrix& a) {
  const double scale = std::sqrt(static_cast<double>(a.rows() + a.cols()));
  return DenseMatrix(a.values() / scale);
}

DenseMatrix gen_flat(Eigen::Index n, Eigen::Index m) {
  require_shape(n, m);
  return DenseMatrix(Eigen::MatrixXd::Ones(n, m));
}

DenseMatrix gen_identity(Eigen::Index n) {
  require_shape(n, n);
  return DenseMatrix(Eigen::MatrixXd::Identity(n, n));
}

DenseMatrix gen_uniform(Eigen::Index n, Eigen::Index m, const EntryBounds& bounds, std::uint64_t seed) {
  require_shape(n, m);
  bounds.validate();
  if (!(bounds.lower > 0.0)) throw ValidationError("uniform generator requires a positive lower bound");
  if (bounds.lower == bounds.upper) return DenseMatrix(Eigen::MatrixXd::Constant(n, m, bounds.lower));

  auto engine = rng::make_engine(rng::derive_seed(seed, kUniformStream, 0));
  std::uniform_real_distribution<double> dist(bounds.lower, bounds.upper);
  Eigen::MatrixXd out(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) out(i, j) = dist(engine);
  return DenseMatrix(std::move(out));
}

DenseMatrix gen_rank_one(std::span<const double> u, std::span<const double> v) {
  const auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (!std::ranges::all_of(u, positive) || !std::ranges::all_of(v, positive)) {
    throw ValidationError("rank-one factors must be positive");
  }
  const auto n = static_cast<Eigen::Index>(u.size());
  const auto m = static_cast<Eigen::Index>(v.size());
  require_shape(n, m);
  Eigen::MatrixXd out(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) out(i, j) = u[i] * v[j];
  return DenseMatrix(std::move(out));
}

DenseMatrix gen_sparse_column(Eigen::Index n, const SparseColumnSpec& spec, std::uint64_t seed) {
  spec.validate();
  const Eigen::Index m = ceil_fraction(spec.theta, n);
  const Eigen::Index zeros = ceil_fraction(spec.gamma, n);
  require_shape(n, m);
  if (zeros >= n) throw ValidationError("infeasible sparse-column spec: every entry of a column would be zero");

  auto engine = rng::make_engine(rng::derive_seed(seed, kSparseStream, 0));
  std::uniform_real_distribution<double> dist(spec.bounds.lower, spec.bounds.upper);
  Eigen::MatrixXd out(n, m);
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) out(i, j) = dist(engine);
    // Partial Fisher-Yates: the first `zeros` picks become zero entries.
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    for (Eigen::Index z = 0; z < zeros; ++z) {
      std::uniform_int_distribution<Eigen::Index> pick(z, n - 1);
      std::swap(rows[static_cast<std::size_t>(z)], rows[static_cast<std::size_t>(pick(engine))]);
      out(rows[static_cast<std::size_t>(z)], j) = 0.0;
    }
  }
  return DenseMatrix(std::move(out));
}

DenseMatrix parse_matrix(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_nonempty = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };

  if (!next_nonempty()) throw ValidationError("matrix file is empty");
  long long n = 0;
  long long m = 0;
  {
    std::istringstream header(line);
    std::string extra;
    if (!(header >> n >> m) || (header >> extra)) throw ValidationError("header must be 'n m'");
  }
  require_shape(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));

  Eigen::MatrixXd values(n, m);
  for (long long i = 0; i < n; ++i) {
    if (!next_nonempty()) throw ValidationError("expected " + std::to_string(n) + " rows, found " + std::to_string(i));
    std::istringstream row(line);
    std::string token;
    long long j = 0;
    while (row >> token) {
      if (j >= m) throw ValidationError("line " + std::to_string(line_no) + ": too many entries");
      values(i, j++) = parse_double(token, line_no);
    }
    if (j != m) throw ValidationError("line " + std::to_string(line_no) + ": expected " + std::to_string(m) + " entries");
  }
  if (next_nonempty()) throw ValidationError("line " + std::to_string(line_no) + ": trailing content after matrix");
  return DenseMatrix(std::move(values));
}

DenseMatrix read_matrix_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open matrix file " + path.string());
  try {
    return parse_matrix(in);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_matrix(std::ostream& out, const DenseMatrix& a) {
  out << a.rows() << ' ' << a.cols() << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (j) out << ' ';
      out << a(i, j);
    }
    out << '\n';
  }
}

void write_matrix_file(const std::filesystem::path& path, const DenseMatrix& a) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write matrix file " + path.string());
  write_matrix(out, a);
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace permcast
