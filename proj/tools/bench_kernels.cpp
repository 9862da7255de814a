// Micro-benchmark of the OpenMP kernels against their serial reference
// implementations, with a bitwise-equality check on every result.

#include <cstdio>
#include <cstring>

#include "dcsca/capped_l1.hpp"
#include "dcsca/numerics.hpp"
#include "dcsca/trace.hpp"

using namespace dcsca;

namespace {

bool bitwise_equal(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * size_t(a.size())) == 0;
}

double time_soft_threshold(const Matrix& m, double tau, int reps, bool serial) {
  Stopwatch clock;
  Matrix work;
  for (int r = 0; r < reps; ++r) {
    work = m;
    if (serial)
      reference::soft_threshold_inplace(work, tau);
    else
      soft_threshold_inplace(work, tau);
  }
  return clock.seconds();
}

}  // namespace

int main(int argc, char** argv) {
  const int threads = argc > 1 ? std::atoi(argv[1]) : 4;
  const int reps = 50;
  RngStream rng(42);

  std::printf("kernel benchmark: %d reps, %d threads vs serial reference\n",
              reps, threads);

  {
    const Matrix m = rng.normal_matrix(2000, 2000, 0.0, 1.0);
    Matrix a = m, b = m;
    set_num_threads(threads);
    soft_threshold_inplace(a, 0.5);
    reference::soft_threshold_inplace(b, 0.5);
    if (!bitwise_equal(a, b)) {
      std::fprintf(stderr, "soft_threshold: parallel != serial\n");
      return 1;
    }
    set_num_threads(1);
    const double t_serial = time_soft_threshold(m, 0.5, reps, true);
    set_num_threads(threads);
    const double t_par = time_soft_threshold(m, 0.5, reps, false);
    std::printf("soft_threshold_inplace 2000x2000: serial %.4fs  parallel %.4fs  "
                "speedup %.2fx\n",
                t_serial, t_par, t_serial / t_par);
  }

  {
    auto gi = capped_l1::generate_data(500, 20000, 0.1, 1e-4, 7);
    const capped_l1::Problem& p = gi.problem;
    const Vector x = rng.normal_vector(p.A.cols(), 0.0, 1.0);
    const Vector grad = p.A.transpose() * (p.A * x - p.b);
    const Vector xi = capped_l1::xi_minus(p, x);

    set_num_threads(threads);
    const Vector bx_par = capped_l1::stela_direction(p, x, grad, xi);
    const Vector bx_ser = capped_l1::reference::stela_direction(p, x, grad, xi);
    if (std::memcmp(bx_par.data(), bx_ser.data(),
                    sizeof(double) * size_t(bx_par.size())) != 0) {
      std::fprintf(stderr, "stela_direction: parallel != serial\n");
      return 1;
    }

    Stopwatch c1;
    set_num_threads(1);
    for (int r = 0; r < reps; ++r)
      capped_l1::reference::stela_direction(p, x, grad, xi);
    const double t_serial = c1.seconds();
    set_num_threads(threads);
    Stopwatch c2;
    for (int r = 0; r < reps; ++r) capped_l1::stela_direction(p, x, grad, xi);
    const double t_par = c2.seconds();
    std::printf("stela_direction K=20000: serial %.4fs  parallel %.4fs  "
                "speedup %.2fx\n",
                t_serial, t_par, t_serial / t_par);
  }

  std::printf("all kernels bitwise-identical to reference\n");
  return 0;
}
