#include <random>

#include "doctest.h"
#include "permcast/random.hpp"
#include "permcast/spectrum.hpp"
#include "permcast/stats.hpp"
#include "unit/helpers.hpp"

using namespace permcast;

TEST_CASE("make_report clamps round-off and rejects real negatives") {
  const auto r = make_report({0.5, -1e-11, 0.1}, 0.01, 1.0);
  CHECK(r.eigenvalues == std::vector<double>{0.0, 0.1, 0.5});
  CHECK_THROWS_AS(make_report({0.5, -1e-9}, 0.01, 1.0), ValidationError);
  CHECK_THROWS_AS(make_report({0.5}, 0.0, 1.0), ValidationError);
  CHECK_THROWS_AS(make_report({0.5}, 0.1, 0.0), ValidationError);
}

TEST_CASE("eigenvalues_of_Z") {
  SUBCASE("1x1 identity: x^2 / 2") {
    auto engine = rng::make_engine(6);
    const double x = std::normal_distribution<double>()(engine);
    const auto r = eigenvalues_of_Z(gen_identity(1), FieldKind::Real, 6);
    REQUIRE(r.eigenvalues.size() == 1);
    CHECK(r.eigenvalues[0] == doctest::Approx(x * x / 2.0).epsilon(1e-14));
  }
  SUBCASE("trace identity on the same draw") {
    const DenseMatrix a = gen_uniform(7, 4, {0.5, 2.0}, 2);
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto r = eigenvalues_of_Z(a, FieldKind::Real, s);
      CHECK(r.eigenvalues.size() == 4);
      CHECK(std::is_sorted(r.eigenvalues.begin(), r.eigenvalues.end()));
      const auto raw = std::get<Eigen::MatrixXd>(sample_X(gen_flat(7, 4), FieldKind::Real, s));
      const double trace = (a.values().array() * raw.array().square()).sum() / 11.0;
      CHECK(stats::compensated_sum(r.eigenvalues) == doctest::Approx(trace).epsilon(1e-12));
    }
  }
  SUBCASE("largest eigenvalue mean is at most b n") {
    const double b = 2.0;
    const DenseMatrix a = gen_uniform(10, 10, {0.01, b}, 3);
    double sum = 0.0;
    for (std::uint64_t s = 0; s < 200; ++s) sum += eigenvalues_of_Z(a, FieldKind::Real, s).eigenvalues.back();
    CHECK(sum / 200.0 <= b * 10.0);
  }
}

TEST_CASE("cutoff log determinant") {
  const auto all_large = make_report({0.5, 1.0, 3.0}, 0.1, 1.0);
  CHECK(log_det_cutoff(all_large) == doctest::Approx(log_det_plain(all_large)));
  const auto r = make_report({0.05, 1.0}, 0.1, 1.0);
  CHECK(log_det_cutoff(r) == doctest::Approx(std::log(0.1)));

  const DenseMatrix a = gen_uniform(8, 6, {0.5, 2.0}, 4);
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto rep = eigenvalues_of_Z(a, FieldKind::Real, s, 0.01, 8.0);
    double prev = -HUGE_VAL;
    for (double eps : {1e-4, 1e-3, 1e-2, 0.05, 0.2}) {
      rep.epsilon = eps;
      const double c = log_det_cutoff(rep);
      CHECK(c >= prev);
      prev = c;
      const auto tail = tail_statistic(rep);
      CHECK(tail.cutoff_gap >= 0.0);
      CHECK(c - log_det_plain(rep) == doctest::Approx(tail.cutoff_gap * rep.s).epsilon(1e-10));
    }
  }
}

TEST_CASE("tail statistic") {
  CHECK(tail_statistic(make_report({0.5, 1.0}, 0.1, 1.0)).value == 0.0);
  const auto t = tail_statistic(make_report({std::exp(-2.0), std::exp(-1.0), 1.0}, 0.5, 1.0));
  CHECK(t.value == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(t.count_below == 2);
  const auto z = tail_statistic(make_report({0.0, 1.0}, 0.5, 1.0));
  CHECK(z.singular);
  CHECK(z.value == HUGE_VAL);
  CHECK_THROWS_AS(tail_statistic(make_report({0.5}, 1.0, 1.0)), ValidationError);
}

TEST_CASE("prop31_rhs") {
  CHECK(prop31_rhs(12, 6, 1.0, 0.01) == doctest::Approx(0.01 * std::log(100.0) * 18.0 * 6.0 / (12.0 * 7.0)).epsilon(1e-14));
  CHECK(prop31_rhs(12, 6, 1.0, 0.01) == doctest::Approx(0.0592).epsilon(1e-3));
  CHECK(prop31_rhs(12, 6, 2.0, 0.01) == doctest::Approx(prop31_rhs(12, 6, 1.0, 0.01) / 2.0).epsilon(1e-15));
  CHECK(prop31_rhs_corrected(12, 6, 1.0, 0.01) == doctest::Approx(0.01 * std::log(100.0) * 18.0 * 6.0 / (12.0 * 5.0)).epsilon(1e-14));
  CHECK_THROWS_AS(prop31_rhs(12, 6, 1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(prop31_rhs(9, 6, 1.0, 0.01), ValidationError);
  CHECK_THROWS_AS(prop31_rhs(12, 6, 0.0, 0.01), ValidationError);
}

TEST_CASE("Monte Carlo tail statistic stays below the closed-form bound") {
  const DenseMatrix a = gen_uniform(12, 6, {1.0, 2.0}, 5);
  std::vector<double> values;
  for (std::size_t t = 0; t < 1000; ++t) {
    values.push_back(tail_statistic(eigenvalues_of_Z(a, FieldKind::Real, rng::derive_seed(6, t), 0.01, 12.0)).value);
  }
  const auto s = stats::summarize(values);
  CHECK(s.mean <= prop31_rhs(12, 6, 1.0, 0.01) + 3.0 * s.standard_error);
}

TEST_CASE("inverse_diagonal") {
  SUBCASE("m = 1") {
    const DenseMatrix a = gen_uniform(5, 1, {0.5, 2.0}, 7);
    const auto x = std::get<Eigen::MatrixXd>(sample_X_tilde(a, FieldKind::Real, 3));
    CHECK(inverse_diagonal(a, FieldKind::Real, 3)[0] == doctest::Approx(1.0 / x.squaredNorm()).epsilon(1e-13));
  }
  SUBCASE("dense inverse oracle") {
    const DenseMatrix a = gen_uniform(9, 5, {0.5, 2.0}, 8);
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto xr = std::get<Eigen::MatrixXd>(sample_X_tilde(a, FieldKind::Real, s));
      const Eigen::MatrixXd inv = (xr.transpose() * xr).inverse();
      const auto dr = inverse_diagonal(a, FieldKind::Real, s);
      for (Eigen::Index k = 0; k < 5; ++k) CHECK(test::close_rel(dr[k], inv(k, k), 1e-8));

      const auto xc = std::get<Eigen::MatrixXcd>(sample_X_tilde(a, FieldKind::Complex, s));
      const Eigen::MatrixXcd invc = (xc.adjoint() * xc).inverse();
      const auto dc = inverse_diagonal(a, FieldKind::Complex, s);
      for (Eigen::Index k = 0; k < 5; ++k) CHECK(test::close_rel(dc[k], invc(k, k).real(), 1e-8));
    }
  }
  SUBCASE("singular direction is flagged as +inf") {
    const auto d = inverse_gram_diagonal(Eigen::MatrixXd(test::from_rows({{1, 2}, {2, 4}, {3, 6}})));
    CHECK(d[0] == HUGE_VAL);
  }
  SUBCASE("inverse chi-square mean bound") {
    const Eigen::Index n = 10;
    const Eigen::Index m = 4;
    const double lo = 1.0;
    const DenseMatrix a = gen_uniform(n, m, {lo, 2.0}, 9);
    std::vector<std::vector<double>> entries(m);
    for (std::size_t t = 0; t < 4000; ++t) {
      const auto d = inverse_diagonal(a, FieldKind::Real, rng::derive_seed(10, t));
      for (Eigen::Index k = 0; k < m; ++k) entries[k].push_back(d[k]);
    }
    const double bound = static_cast<double>(n + m) / (lo * static_cast<double>(n - m - 1));
    for (const auto& e : entries) {
      const auto s = stats::summarize(e);
      CHECK(s.mean <= bound + 3.0 * s.standard_error);
    }
  }
}

TEST_CASE("factorization identity") {
  const Eigen::MatrixXd v = test::from_rows({{1, 0}, {0, 1}, {1, 1}});
  CHECK((v.transpose() * v).determinant() == doctest::Approx(3.0));
  CHECK(factorization_identity_gap(v, 1) < 1e-15);
  CHECK(factorization_identity_gap(v, 0) < 1e-15);

  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(Eigen::MatrixXd::Random(6, 3)).householderQ() *
                            Eigen::MatrixXd::Identity(6, 3);
  for (Eigen::Index k = 0; k < 3; ++k) CHECK(factorization_identity_gap(q, k) < 1e-13);

  auto engine = rng::make_engine(11);
  std::normal_distribution<double> normal;
  for (int t = 0; t < 20; ++t) {
    Eigen::MatrixXd g(8, 5);
    for (Eigen::Index i = 0; i < 8; ++i)
      for (Eigen::Index j = 0; j < 5; ++j) g(i, j) = normal(engine);
    for (Eigen::Index k = 0; k < 5; ++k) CHECK(factorization_identity_gap(g, k) < 1e-10);
  }
  CHECK_THROWS_AS(factorization_identity_gap(test::from_rows({{1, 2}, {2, 4}, {3, 6}}), 0), ValidationError);
  CHECK_THROWS_AS(factorization_identity_gap(v, 2), ValidationError);
}

TEST_CASE("quadratic-form eigenvalue sandwich") {
  SUBCASE("flat matrix: nonzero eigenvalues are exactly one") {
    const auto r = quadratic_form_spectrum(gen_flat(6, 3), 1, FieldKind::Real, 4, {1.0, 1.0});
    CHECK(r.within_bounds);
    CHECK(r.zero_count == 2);
    for (double l : r.eigenvalues) CHECK((std::abs(l) < 1e-8 || std::abs(l - 1.0) < 1e-12));
  }
  SUBCASE("random (6,3) in [1,2]") {
    for (std::uint64_t s = 0; s < 30; ++s) {
      const DenseMatrix a = gen_uniform(6, 3, {1.0, 2.0}, 100 + s);
      for (Eigen::Index k = 0; k < 3; ++k) {
        for (FieldKind field : {FieldKind::Real, FieldKind::Complex}) {
          CHECK(quadratic_form_bounds_check(a, k, field, s));
          CHECK(quadratic_form_bounds_check(a, k, field, s, {1.0, 2.0}));
          CHECK(quadratic_form_spectrum(a, k, field, s, {1.0, 2.0}).zero_count == 2);
        }
      }
    }
  }
  CHECK_THROWS_AS(quadratic_form_spectrum(gen_flat(6, 3), 3, FieldKind::Real, 1, {1.0, 1.0}), ValidationError);
}

TEST_CASE("Fan's inequality") {
  const Eigen::MatrixXd m1 = Eigen::Vector2d(2, 1).asDiagonal();
  const Eigen::MatrixXd m2 = Eigen::Vector2d(4, 3).asDiagonal();
  CHECK(fan_inequality_check(m1, m2, 0, 0));
  CHECK(fan_inequality_check(m1, m2, 0, 1));
  CHECK(fan_inequality_check(m1, m2, 1, 0));
  CHECK_THROWS_AS(fan_inequality_check(m1, m2, 1, 1), ValidationError);
  CHECK_THROWS_AS(fan_inequality_check(m1, m2, -1, 0), ValidationError);
  CHECK_THROWS_AS(fan_inequality_check(Eigen::MatrixXd::Zero(2, 2), m2, 0, 0), ValidationError);
  CHECK(reverse_order(std::vector<double>{1, 2, 3}) == std::vector<double>{3, 2, 1});

  auto engine = rng::make_engine(12);
  std::normal_distribution<double> normal;
  const auto gaussian = [&](int d) {
    Eigen::MatrixXd g(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) g(i, j) = normal(engine);
    return g;
  };
  for (int t = 0; t < 500; ++t) {
    const int d = 1 + t % 8;
    const Eigen::MatrixXd b1 = gaussian(d);
    const Eigen::MatrixXd b2 = gaussian(d);
    const Eigen::MatrixXd p1 = b1 * b1.transpose() + 1e-3 * Eigen::MatrixXd::Identity(d, d);
    const Eigen::MatrixXd p2 = b2 * b2.transpose();
    for (int i = 0; i < d; ++i) {
      for (int j = 0; i + j < d; ++j) {
        CHECK(fan_inequality_check(p1, p2, i, j));
        CHECK(fan_inequality_check(Eigen::MatrixXd::Identity(d, d), p2, i, j));
      }
    }
  }
}

TEST_CASE("interlacing under column deletion") {
  const DenseMatrix pair = gen_uniform(5, 2, {0.5, 2.0}, 13);
  for (std::uint64_t s = 0; s < 20; ++s) {
    CHECK(interlacing_check(pair, 0, FieldKind::Real, s));
    CHECK(interlacing_check(pair, 1, FieldKind::Complex, s));
  }
  for (std::uint64_t s = 0; s < 100; ++s) {
    const DenseMatrix a = gen_uniform(7, 4, {0.5, 2.0}, 200 + s);
    for (Eigen::Index k = 0; k < 4; ++k) CHECK(interlacing_check(a, k, FieldKind::Real, s));
  }
  for (Eigen::Index k = 0; k < 3; ++k) CHECK(interlacing_check(gen_flat(5, 3), k, FieldKind::Complex, 14));
  CHECK_THROWS_AS(interlacing_check(gen_flat(5, 1), 0, FieldKind::Real, 1), ValidationError);
}

TEST_CASE("cutoff log determinant concentrates as n grows") {
  double prev_sd = HUGE_VAL;
  double prev_se = 0.0;
  for (Eigen::Index n : {20, 40, 80}) {
    const DenseMatrix a = gen_uniform(n, n / 2, {0.05, 2.0}, 300 + n);
    std::vector<double> values;
    for (std::size_t t = 0; t < 300; ++t) {
      const auto r = eigenvalues_of_Z(a, FieldKind::Real, rng::derive_seed(15, t), 0.01);
      values.push_back(log_det_cutoff(r) / static_cast<double>(n));
    }
    const double sd = stats::summarize(values).stddev;
    const double se = sd / std::sqrt(2.0 * (values.size() - 1));
    CHECK(sd <= prev_sd + 2.0 * std::hypot(se, prev_se));
    prev_sd = sd;
    prev_se = se;
  }
}

TEST_CASE("sparse-column tail statistic does not blow up with n") {
  const double eps = 0.05;
  const double scale = eps * std::abs(std::log(eps));
  std::vector<double> constants;
  for (Eigen::Index n : {40, 60, 80}) {
    const DenseMatrix a = gen_sparse_column(n, {0.3, 0.4, {1.0, 2.0}}, 400 + n);
    std::vector<double> values;
    for (std::size_t t = 0; t < 300; ++t) {
      const auto r = eigenvalues_of_Z(a, FieldKind::Real, rng::derive_seed(16, t), eps, static_cast<double>(n));
      values.push_back(tail_statistic(r).value);
    }
    constants.push_back(stats::summarize(values).mean / scale);
  }
  for (double c : constants) CHECK(c <= 10.0);
}
