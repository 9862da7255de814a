#include "dcsca/numerics.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dcsca {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

int g_threads = 1;

}  // namespace

RngStream::RngStream(std::uint64_t seed) : seed_(seed) {
  std::uint64_t s = seed;
  state_[0] = splitmix64(s);
  state_[1] = splitmix64(s);
}

// xoroshiro128++
std::uint64_t RngStream::next_u64() {
  const std::uint64_t s0 = state_[0];
  std::uint64_t s1 = state_[1];
  const std::uint64_t result = rotl(s0 + s1, 17) + s0;
  s1 ^= s0;
  state_[0] = rotl(s0, 49) ^ s1 ^ (s1 << 21);
  state_[1] = rotl(s1, 28);
  return result;
}

double RngStream::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::normal(double mean, double stddev) {
  // Box-Muller, cosine branch only: two words per draw, no hidden state.
  const double u1 = 1.0 - uniform01();  // (0, 1]
  const double u2 = uniform01();
  const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  return mean + stddev * z;
}

RngStream RngStream::fork(std::uint64_t salt) const {
  std::uint64_t s = seed_ ^ (0xd1b54a32d192ed03ULL * (salt + 1));
  return RngStream(splitmix64(s));
}

Matrix RngStream::normal_matrix(Index rows, Index cols, double mean, double stddev) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = normal(mean, stddev);
  return m;
}

Vector RngStream::normal_vector(Index len, double mean, double stddev) {
  Vector v(len);
  for (Index i = 0; i < len; ++i) v(i) = normal(mean, stddev);
  return v;
}

void set_num_threads(int n) {
  g_threads = std::max(1, n);
#ifdef _OPENMP
  omp_set_num_threads(g_threads);
#endif
}

int num_threads() { return g_threads; }

double soft_threshold(double x, double tau) {
  if (tau < 0) throw std::invalid_argument("soft_threshold: tau must be >= 0");
  return std::max(x - tau, 0.0) - std::max(-x - tau, 0.0);
}

void soft_threshold_inplace(Matrix& m, double tau) {
  if (tau < 0) throw std::invalid_argument("soft_threshold: tau must be >= 0");
  const Index rows = m.rows(), cols = m.cols();
#pragma omp parallel for schedule(static) if (g_threads > 1)
  for (Index i = 0; i < rows; ++i) {
    double* row = m.data() + i * cols;
    for (Index j = 0; j < cols; ++j)
      row[j] = std::max(row[j] - tau, 0.0) - std::max(-row[j] - tau, 0.0);
  }
}

Vector soft_threshold(const Vector& v, double tau) {
  if (tau < 0) throw std::invalid_argument("soft_threshold: tau must be >= 0");
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) out(i) = soft_threshold(v(i), tau);
  return out;
}

namespace reference {
void soft_threshold_inplace(Matrix& m, double tau) {
  if (tau < 0) throw std::invalid_argument("soft_threshold: tau must be >= 0");
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      m(i, j) = std::max(m(i, j) - tau, 0.0) - std::max(-m(i, j) - tau, 0.0);
}
}  // namespace reference

namespace {

double polish_root(double c3, double c2, double c1, double c0, double x) {
  // One Newton step.
  const double p = ((c3 * x + c2) * x + c1) * x + c0;
  const double dp = (3.0 * c3 * x + 2.0 * c2) * x + c1;
  if (dp != 0.0 && std::isfinite(p / dp)) {
    const double y = x - p / dp;
    const double py = ((c3 * y + c2) * y + c1) * y + c0;
    if (std::abs(py) < std::abs(p)) return y;
  }
  return x;
}

}  // namespace

std::vector<double> cubic_real_roots(double c3, double c2, double c1, double c0) {
  if (c3 == 0.0) throw DegenerateCubic("cubic_real_roots: leading coefficient is zero");

  // Depressed form t^3 + p t + q with x = t - a/3, for x^3 + a x^2 + b x + c.
  const double a = c2 / c3, b = c1 / c3, c = c0 / c3;
  const double q = (a * a - 3.0 * b) / 9.0;
  const double r = (a * (2.0 * a * a - 9.0 * b) + 27.0 * c) / 54.0;
  const double q3 = q * q * q;
  const double r2 = r * r;

  std::vector<double> roots;
  if (r2 < q3) {
    // Three real roots, trigonometric branch.
    double t = r / std::sqrt(q3);
    t = std::clamp(t, -1.0, 1.0);
    t = std::acos(t);
    const double shift = a / 3.0;
    const double s = -2.0 * std::sqrt(q);
    roots = {s * std::cos(t / 3.0) - shift,
             s * std::cos((t + 2.0 * M_PI) / 3.0) - shift,
             s * std::cos((t - 2.0 * M_PI) / 3.0) - shift};
  } else {
    const double u3 = -r - std::copysign(std::sqrt(r2 - q3), r);
    const double u = std::cbrt(u3);
    const double v = (u == 0.0) ? 0.0 : q / u;
    roots = {u + v - a / 3.0};
    // Double root when the discriminant vanishes.
    if (r2 == q3 && (u + v) != 0.0) roots.push_back(-0.5 * (u + v) - a / 3.0);
  }

  for (double& x : roots) x = polish_root(c3, c2, c1, c0, x);
  std::sort(roots.begin(), roots.end());

  // Deduplicate numerically coincident roots.
  const double scale = std::max({1.0, std::abs(c3), std::abs(c2), std::abs(c1), std::abs(c0)});
  std::vector<double> out;
  for (double x : roots)
    if (out.empty() || std::abs(x - out.back()) > 1e-12 * std::max(1.0, std::abs(x)))
      out.push_back(x);
  (void)scale;
  return out;
}

double quartic_min_unit(double a, double b, double c, double d) {
  auto phi = [&](double g) {
    return ((a / 4.0 * g + b / 3.0) * g + c / 2.0) * g * g + d * g;
  };

  std::vector<double> candidates = {0.0, 1.0};
  // Stationary points: a g^3 + b g^2 + c g + d = 0.
  if (a != 0.0) {
    for (double r : cubic_real_roots(a, b, c, d)) candidates.push_back(std::clamp(r, 0.0, 1.0));
  } else if (b != 0.0) {
    const double disc = c * c - 4.0 * b * d;
    if (disc >= 0.0) {
      const double s = std::sqrt(disc);
      candidates.push_back(std::clamp((-c + s) / (2.0 * b), 0.0, 1.0));
      candidates.push_back(std::clamp((-c - s) / (2.0 * b), 0.0, 1.0));
    }
  } else if (c != 0.0) {
    candidates.push_back(std::clamp(-d / c, 0.0, 1.0));
  }

  std::sort(candidates.begin(), candidates.end());
  double best_g = candidates.front();
  double best_v = phi(best_g);
  for (double g : candidates) {
    const double v = phi(g);
    if (v < best_v) {
      best_v = v;
      best_g = g;
    }
  }
  return best_g;
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) throw std::invalid_argument("spectral_norm: empty matrix");
  Vector v = Vector::Ones(m.cols());
  v /= v.norm();
  double sigma = 0.0;
  const int cap = 10000;
  for (int it = 0; it < cap; ++it) {
    Vector w = m.transpose() * (m * v);
    const double n = w.norm();
    if (n == 0.0) return 0.0;  // reached the null space: all singular values seen are 0
    const double sigma_new = std::sqrt(n);
    v = w / n;
    if (it > 0 && std::abs(sigma_new - sigma) <= 1e-8 * std::max(1.0, sigma_new))
      return sigma_new;
    sigma = sigma_new;
  }
  throw ConvergenceFailure("spectral_norm: power iteration cap reached", sigma);
}

Matrix solve_spd(const Matrix& m, const Matrix& b) {
  const Eigen::LLT<Eigen::MatrixXd> llt{Eigen::MatrixXd(m)};
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("solve_spd: Cholesky factorization failed");
  Eigen::MatrixXd x = llt.solve(Eigen::MatrixXd(b));
  // One step of iterative refinement.
  Eigen::MatrixXd res = Eigen::MatrixXd(b) - Eigen::MatrixXd(m) * x;
  x += llt.solve(res);
  return Matrix(x);
}

}  // namespace dcsca
