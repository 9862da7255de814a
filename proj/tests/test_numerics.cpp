#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstring>

#include "dcsca/numerics.hpp"
#include "doctest.h"

using namespace dcsca;

TEST_CASE("soft_threshold scalar cases") {
  CHECK(soft_threshold(3.0, 1.0) == doctest::Approx(2.0));
  CHECK(soft_threshold(-3.0, 1.0) == doctest::Approx(-2.0));
  CHECK(soft_threshold(0.5, 1.0) == 0.0);
  CHECK(soft_threshold(-0.5, 1.0) == 0.0);
  CHECK(soft_threshold(2.0, 2.0) == 0.0);  // boundary maps to zero
  CHECK(soft_threshold(0.0, 0.0) == 0.0);
  CHECK_THROWS_AS(soft_threshold(1.0, -0.1), std::invalid_argument);
}

TEST_CASE("soft_threshold vector matches scalar") {
  Vector v(4);
  v << 3.0, -3.0, 0.5, 0.0;
  const Vector out = soft_threshold(v, 1.0);
  for (Index i = 0; i < 4; ++i)
    CHECK(out(i) == soft_threshold(v(i), 1.0));
}

TEST_CASE("parallel soft_threshold_inplace is bitwise equal to reference") {
  RngStream rng(11);
  const Matrix m = rng.normal_matrix(37, 53, 0.0, 2.0);
  for (int threads : {1, 2, 4, 8}) {
    set_num_threads(threads);
    Matrix a = m, b = m;
    soft_threshold_inplace(a, 0.7);
    reference::soft_threshold_inplace(b, 0.7);
    REQUIRE(std::memcmp(a.data(), b.data(), sizeof(double) * size_t(a.size())) == 0);
  }
  set_num_threads(1);
}

TEST_CASE("rng stream is deterministic and forks are independent") {
  RngStream a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  RngStream c(123);
  RngStream f1 = c.fork(1), f2 = c.fork(2), f1b = c.fork(1);
  CHECK(f1.next_u64() != f2.next_u64());
  RngStream f1c = c.fork(1);
  CHECK(f1b.next_u64() == f1c.next_u64());
}

TEST_CASE("uniform01 stays in [0,1) and normal has sane moments") {
  RngStream rng(7);
  double sum = 0.0, sum2 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal(0.0, 1.0);
    sum += z;
    sum2 += z * z;
  }
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(std::abs(sum2 / n - 1.0) < 0.03);
}

TEST_CASE("normal_matrix respects mean and stddev") {
  RngStream rng(9);
  const Matrix m = rng.normal_matrix(200, 200, 3.0, 0.5);
  CHECK(m.mean() == doctest::Approx(3.0).epsilon(0.01));
  const double var = (m.array() - m.mean()).square().mean();
  CHECK(std::sqrt(var) == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("cubic_real_roots on factored polynomials") {
  // (x-1)(x-2)(x-3) = x^3 - 6x^2 + 11x - 6
  auto r = cubic_real_roots(1.0, -6.0, 11.0, -6.0);
  REQUIRE(r.size() == 3);
  CHECK(r[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r[1] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(r[2] == doctest::Approx(3.0).epsilon(1e-10));

  // x^3 + x has a single real root at 0.
  r = cubic_real_roots(1.0, 0.0, 1.0, 0.0);
  REQUIRE(r.size() == 1);
  CHECK(r[0] == doctest::Approx(0.0));

  // 2(x-5)^3: triple root, scaled leading coefficient.
  r = cubic_real_roots(2.0, -30.0, 150.0, -250.0);
  REQUIRE(!r.empty());
  CHECK(r[0] == doctest::Approx(5.0).epsilon(1e-6));

  CHECK_THROWS_AS(cubic_real_roots(0.0, 1.0, 1.0, 1.0), DegenerateCubic);
}

TEST_CASE("cubic roots satisfy the polynomial on random coefficients") {
  RngStream rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const double c3 = rng.normal(0.0, 1.0) + 2.0;  // keep away from zero
    const double c2 = rng.normal(0.0, 3.0);
    const double c1 = rng.normal(0.0, 3.0);
    const double c0 = rng.normal(0.0, 3.0);
    for (double x : cubic_real_roots(c3, c2, c1, c0)) {
      const double p = ((c3 * x + c2) * x + c1) * x + c0;
      const double scale = std::max(1.0, std::abs(x));
      CHECK(std::abs(p) < 1e-7 * scale * scale * scale);
    }
  }
}

TEST_CASE("quartic_min_unit closed cases") {
  // Pure quadratic phi' = g - 0.3.
  CHECK(quartic_min_unit(0.0, 0.0, 1.0, -0.3) == doctest::Approx(0.3));
  // Nonnegative slope everywhere: minimum at 0.
  CHECK(quartic_min_unit(0.0, 0.0, 1.0, 0.5) == 0.0);
  // Strongly decreasing on [0,1]: minimum at 1.
  CHECK(quartic_min_unit(0.0, 0.0, 1.0, -5.0) == 1.0);
  // Zero polynomial: tie broken toward the smaller argument.
  CHECK(quartic_min_unit(0.0, 0.0, 0.0, 0.0) == 0.0);
}

TEST_CASE("quartic_min_unit matches a dense grid on random coefficients") {
  RngStream rng(21);
  for (int trial = 0; trial < 500; ++trial) {
    const double a = std::abs(rng.normal(0.0, 2.0));  // convex-like quartic term
    const double b = rng.normal(0.0, 2.0);
    const double c = rng.normal(0.0, 2.0);
    const double d = rng.normal(0.0, 2.0);
    auto phi = [&](double g) {
      return ((a / 4.0 * g + b / 3.0) * g + c / 2.0) * g * g + d * g;
    };
    const double gm = quartic_min_unit(a, b, c, d);
    double best = 0.0, bestv = phi(0.0);
    for (int i = 1; i <= 10000; ++i) {
      const double g = double(i) / 10000.0;
      const double v = phi(g);
      if (v < bestv) {
        bestv = v;
        best = g;
      }
    }
    CHECK(phi(gm) <= bestv + 1e-9);
    (void)best;
  }
}

TEST_CASE("spectral_norm matches the largest singular value") {
  RngStream rng(3);
  const Matrix m = rng.normal_matrix(20, 30, 0.0, 1.0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd{Eigen::MatrixXd(m)};
  CHECK(spectral_norm(m) ==
        doctest::Approx(svd.singularValues()(0)).epsilon(1e-6));

  Matrix diag = Matrix::Zero(3, 3);
  diag(0, 0) = 1.0;
  diag(1, 1) = -7.0;
  diag(2, 2) = 2.0;
  CHECK(spectral_norm(diag) == doctest::Approx(7.0).epsilon(1e-7));
}

TEST_CASE("solve_spd solves and rejects indefinite input") {
  RngStream rng(17);
  const Matrix g = rng.normal_matrix(12, 12, 0.0, 1.0);
  Matrix spd = g * g.transpose();
  spd.diagonal().array() += 1.0;
  const Matrix b = rng.normal_matrix(12, 3, 0.0, 1.0);
  const Matrix x = solve_spd(spd, b);
  CHECK((spd * x - b).norm() < 1e-9 * b.norm());

  Matrix indef = Matrix::Zero(2, 2);
  indef(0, 0) = 1.0;
  indef(1, 1) = -1.0;
  CHECK_THROWS_AS(solve_spd(indef, Matrix::Identity(2, 2)), NotPositiveDefinite);
}
