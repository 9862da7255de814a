#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstring>
#include <numeric>

#include "dcsca/capped_l1.hpp"
#include "dcsca/oracles.hpp"
#include "doctest.h"

using namespace dcsca;
using namespace dcsca::capped_l1;

namespace {

Problem one_dim() {
  Matrix A(1, 1);
  A(0, 0) = 1.0;
  Vector b(1);
  b << 3.0;
  return Problem::make(A, b, 1.0, 1.0);
}

}  // namespace

TEST_CASE("problem construction validates its inputs") {
  RngStream rng(1);
  Matrix A = rng.normal_matrix(4, 3, 0.0, 1.0);
  Vector b = rng.normal_vector(4, 0.0, 1.0);
  CHECK_NOTHROW(Problem::make(A, b, 1.0, 1.0));
  CHECK_THROWS_AS(Problem::make(A, b, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Problem::make(A, b, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Problem::make(A, rng.normal_vector(3, 0.0, 1.0), 1.0, 1.0),
                  std::invalid_argument);
  Matrix Az = A;
  Az.col(1).setZero();
  CHECK_THROWS_AS(Problem::make(Az, b, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("objective value on hand-checked points") {
  const Problem p = one_dim();
  Vector x(1);
  x << 0.0;
  CHECK(h_eval(p, x) == doctest::Approx(4.5));
  x << 2.0;
  CHECK(h_eval(p, x) == doctest::Approx(1.5));
  x << 3.0;
  CHECK(h_eval(p, x) == doctest::Approx(1.0));
  CHECK_THROWS_AS(h_eval(p, Vector::Zero(2)), std::invalid_argument);
}

TEST_CASE("concave-part subgradient uses the closed boundary convention") {
  RngStream rng(2);
  Matrix A = rng.normal_matrix(3, 5, 0.0, 1.0);
  Vector b = rng.normal_vector(3, 0.0, 1.0);
  const Problem p = Problem::make(A, b, 0.7, 1.5);
  Vector x(5);
  x << 2.0, 1.5, 0.3, -1.5, -4.0;
  const Vector xi = xi_minus(p, x);
  CHECK(xi(0) == doctest::Approx(0.7));
  CHECK(xi(1) == doctest::Approx(0.7));   // boundary counts as the outer piece
  CHECK(xi(2) == 0.0);
  CHECK(xi(3) == doctest::Approx(-0.7));
  CHECK(xi(4) == doctest::Approx(-0.7));
}

TEST_CASE("direction kernel equals the serial reference bitwise") {
  auto gi = generate_data(30, 80, 0.1, 1e-4, 5);
  const Problem& p = gi.problem;
  RngStream rng(9);
  const Vector x = rng.normal_vector(80, 0.0, 1.0);
  const Vector grad = p.A.transpose() * (p.A * x - p.b);
  const Vector xi = xi_minus(p, x);
  for (int threads : {1, 2, 4}) {
    set_num_threads(threads);
    const Vector par = stela_direction(p, x, grad, xi);
    const Vector ser = capped_l1::reference::stela_direction(p, x, grad, xi);
    REQUIRE(std::memcmp(par.data(), ser.data(),
                        sizeof(double) * size_t(par.size())) == 0);
  }
  set_num_threads(1);
}

TEST_CASE("direction coordinates match the scalar grid oracle") {
  auto gi = generate_data(25, 40, 0.1, 1e-4, 6);
  const Problem& p = gi.problem;
  RngStream rng(10);
  const Vector x = rng.normal_vector(40, 0.0, 1.0);
  const Vector grad = p.A.transpose() * (p.A * x - p.b);
  const Vector xi = xi_minus(p, x);
  const Vector bx = stela_direction(p, x, grad, xi);
  for (Index k = 0; k < 40; ++k) {
    // Coordinate model: 1/2 d_k y^2 + (grad_k - d_k x_k - xi_k) y + mu |y|.
    const double dk = p.diagAtA(k);
    const double lin = grad(k) - dk * x(k) - xi(k);
    auto phi = [&](double y) { return 0.5 * dk * y * y + lin * y + p.mu * std::abs(y); };
    const double half = std::abs(lin) / dk + 1.0;
    const auto gm = oracles::grid_min_1d(phi, {-half, half, 200001});
    CHECK(std::abs(bx(k) - gm.argmin) <= 1e-4);
  }
}

TEST_CASE("stepsize matches the grid minimizer of the line-search model") {
  auto gi = generate_data(25, 40, 0.1, 1e-4, 7);
  const Problem& p = gi.problem;
  RngStream rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector x = rng.normal_vector(40, 0.0, 1.0);
    const Vector bx = stela_direction(p, x);
    const Vector d = bx - x;
    if (d.norm() < 1e-12) continue;
    const double gamma = stela_stepsize(p, x, bx);
    const Vector xi = xi_minus(p, x);
    const double dl1 = p.mu * (bx.template lpNorm<1>() - x.template lpNorm<1>());
    auto phi = [&](double g) {
      return 0.5 * (p.A * (x + g * d) - p.b).squaredNorm() +
             g * (dl1 - d.dot(xi));
    };
    const auto gm = oracles::grid_min_1d(phi, {0.0, 1.0, 10001});
    CHECK((std::abs(gamma - gm.argmin) <= 1e-4 || phi(gamma) <= gm.min + 1e-9));
  }
}

TEST_CASE("1-D solve walks 0 -> 2 -> 3 and stops at the cap objective") {
  const Problem p = one_dim();
  const auto res = run_stela(p, Vector::Zero(1), 1e-10, 50);
  CHECK(res.converged);
  CHECK(res.x(0) == doctest::Approx(3.0));
  REQUIRE(res.trace.size() == 3);
  CHECK(res.trace[1].h_value == doctest::Approx(1.5));
  CHECK(res.trace[1].step_size == doctest::Approx(1.0));
  CHECK(res.trace[1].stationarity_gap == doctest::Approx(4.0));
  CHECK(res.trace[2].h_value == doctest::Approx(1.0));
  CHECK(res.trace[2].stationarity_gap == doctest::Approx(1.0));
  for (int solves : res.model_solves) CHECK(solves == 1);
}

TEST_CASE("solver descends monotonically on generated data") {
  auto gi = generate_data(50, 120, 0.1, 1e-4, 12);
  const auto res = run_stela(gi.problem, Vector::Zero(120), 1e-8, 2000);
  CHECK(res.converged);
  for (size_t i = 1; i < res.trace.size(); ++i)
    CHECK(res.trace[i].h_value <= res.trace[i - 1].h_value + 1e-10);
}

TEST_CASE("classic outer loop walks 0 -> 2 -> 3 on the 1-D problem") {
  const Problem p = one_dim();
  const auto res = run_classic_mm(p, Vector::Zero(1), 10, 1e-10);
  CHECK(res.converged);
  CHECK(res.x(0) == doctest::Approx(3.0));
  // Warm-started inner solves: once the outer iterate repeats, zero inner
  // steps are needed and the loop exits early.
  REQUIRE(res.model_solves.size() >= 2);
  CHECK(res.model_solves.back() == 0);
  for (size_t i = 1; i < res.trace.size(); ++i)
    CHECK(res.trace[i].h_value <= res.trace[i - 1].h_value + 1e-10);
}

TEST_CASE("scalar cap prox matches the brute-force oracle") {
  RngStream rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    const double u = rng.normal(0.0, 2.0);
    const double w = 0.1 + 3.0 * rng.uniform01();
    const double mu = 0.05 + rng.uniform01();
    const double theta = 0.2 + 2.0 * rng.uniform01();
    const double fast = capped_prox_scalar(u, w, mu, theta);
    const double slow = oracles::scalar_capped_prox_oracle(u, w, mu, theta);
    auto obj = [&](double x) {
      return 0.5 * w * (x - u) * (x - u) + mu * std::min(std::abs(x), theta);
    };
    // Either the same point or an equal-value minimizer (ties are possible).
    CHECK(obj(fast) <= obj(slow) + 1e-9);
  }
  CHECK_THROWS_AS(capped_prox_scalar(1.0, 0.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("proximal outer loop reaches the 1-D solution") {
  const Problem p = one_dim();
  const auto res = run_proximal_mm(p, Vector::Zero(1), 0.5, 0.5, 200, 1e-10);
  CHECK(res.converged);
  CHECK(res.x(0) == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(h_eval(p, res.x) == doctest::Approx(1.0).epsilon(1e-8));
  for (int c : res.model_solves) CHECK(c >= 1);
  CHECK_THROWS_AS(run_proximal_mm(p, Vector::Zero(1), 1.5, 0.5, 10, 1e-6),
                  std::invalid_argument);
}

TEST_CASE("the three solvers agree on generated data") {
  auto gi = generate_data(60, 150, 0.1, 1e-4, 21);
  const Problem& p = gi.problem;
  const Vector x0 = Vector::Zero(150);
  const double h1 = h_eval(p, run_stela(p, x0, 1e-9, 5000).x);
  const double h2 = h_eval(p, run_classic_mm(p, x0, 200, 1e-9).x);
  const double h3 = h_eval(p, run_proximal_mm(p, x0, 0.5, 0.5, 5000, 1e-9).x);
  CHECK(std::abs(h1 - h2) / h1 < 1e-6);
  CHECK(std::abs(h1 - h3) / h1 < 1e-6);
}

TEST_CASE("generated data matches the documented distributions") {
  const Index n = 80, k = 200;
  auto gi = generate_data(n, k, 0.1, 1e-4, 33);
  const Problem& p = gi.problem;
  CHECK(p.A.rows() == n);
  CHECK(p.A.cols() == k);
  for (Index r = 0; r < n; ++r)
    CHECK(p.A.row(r).norm() == doctest::Approx(1.0).epsilon(1e-12));
  const Index nnz = Index((gi.x_true.array() != 0.0).count());
  CHECK(nnz == Index(std::ceil(0.1 * double(k))));
  CHECK(p.theta == 1.0);
  CHECK(p.mu ==
        doctest::Approx(0.1 * (p.A.transpose() * p.b).cwiseAbs().maxCoeff()));

  auto gi2 = generate_data(n, k, 0.1, 1e-4, 33);
  CHECK(gi2.problem.A == p.A);
  CHECK(gi2.problem.b == p.b);
  CHECK(gi2.x_true == gi.x_true);
  CHECK_THROWS_AS(generate_data(n, k, 0.0, 1e-4, 1), std::invalid_argument);
}
