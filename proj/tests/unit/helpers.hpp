#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "permcast/matrix.hpp"

namespace test {

inline bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1e-300, std::abs(a), std::abs(b)});
}

inline Eigen::MatrixXd from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto m = static_cast<Eigen::Index>(rows.begin()->size());
  Eigen::MatrixXd out(n, m);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) out(i, j++) = v;
    ++i;
  }
  return out;
}

inline permcast::DenseMatrix dense(std::initializer_list<std::initializer_list<double>> rows) {
  return permcast::DenseMatrix(from_rows(rows));
}

}  // namespace test
