#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dcsca {

// Row-major storage so that serialized files are plain row-major doubles.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

struct ConvergenceFailure : std::runtime_error {
  double best_estimate;
  ConvergenceFailure(const std::string& msg, double estimate)
      : std::runtime_error(msg), best_estimate(estimate) {}
};

struct NotPositiveDefinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateCubic : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct LineSearchFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Deterministic random stream: mt19937_64 raw words with explicit
/// uniform/Box-Muller transforms, so draw sequences are identical across
/// platforms, runs and thread counts. One stream per thread; fork() derives
/// an independent stream by seed mixing.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t next_u64();
  double uniform01();                       // [0, 1)
  double normal(double mean = 0.0, double stddev = 1.0);
  RngStream fork(std::uint64_t salt) const;

  Matrix normal_matrix(Index rows, Index cols, double mean, double stddev);
  Vector normal_vector(Index len, double mean, double stddev);

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t state_[2];
};

// Number of threads used by the parallel kernels (1 = serial).
void set_num_threads(int n);
int num_threads();

double soft_threshold(double x, double tau);

// Entrywise soft-thresholding; parallel over rows.
void soft_threshold_inplace(Matrix& m, double tau);
Vector soft_threshold(const Vector& v, double tau);

namespace reference {
// Serial implementations kept as ground truth for the parallel kernels.
void soft_threshold_inplace(Matrix& m, double tau);
}  // namespace reference

/// Real roots of c3 x^3 + c2 x^2 + c1 x + c0, c3 != 0. Each root gets one
/// Newton polishing step (Cardano is cancellation-prone near Sigma1^2 +
/// Sigma2^3 = 0). Returns 1 to 3 values, ascending, deduplicated.
std::vector<double> cubic_real_roots(double c3, double c2, double c1, double c0);

/// Global minimizer over [0,1] of phi(g) = a/4 g^4 + b/3 g^3 + c/2 g^2 + d g.
/// Candidates are the real stationary points clipped to [0,1] plus both
/// endpoints; ties break toward the smaller argument.
double quartic_min_unit(double a, double b, double c, double d);

/// Largest singular value by power iteration on M^T M. Deterministic
/// all-ones start, relative tolerance 1e-8, cap 10000 iterations.
double spectral_norm(const Matrix& m);

/// Solve M X = B for symmetric positive definite M (Cholesky, one step of
/// iterative refinement).
Matrix solve_spd(const Matrix& m, const Matrix& b);

}  // namespace dcsca
