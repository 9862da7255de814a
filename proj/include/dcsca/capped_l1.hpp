#pragma once

#include "dcsca/numerics.hpp"
#include "dcsca/trace.hpp"

namespace dcsca {
namespace capped_l1 {

/// minimize over x: 1/2 ||A x - b||^2 + mu * sum_k min(|x_k|, theta)
struct Problem {
  Matrix A;  // N x K
  Vector b;
  double mu = 0.0;
  double theta = 0.0;
  Vector diagAtA;  // column squared norms of A, every entry > 0

  static Problem make(Matrix A, Vector b, double mu, double theta);
};

struct Result {
  Vector x;
  std::vector<IterationTrace> trace;
  bool converged = false;
  double final_gap = 0.0;
  std::vector<int> model_solves;
};

double h_eval(const Problem& p, const Vector& x);

/// Subgradient of g-(x) = mu (||x||_1 - ||min(|x|, theta)||_1), entrywise
/// mu for x_k >= theta, -mu for x_k <= -theta, else 0 (closed boundary).
Vector xi_minus(const Problem& p, const Vector& x);

/// Best response of the per-coordinate surrogate (entrywise soft threshold
/// of r = diag(A^T A) x + xi- - A^T(Ax - b), scaled by 1/diag(A^T A)).
/// grad = A^T(Ax - b) is passed in so it is computed once per iteration.
Vector stela_direction(const Problem& p, const Vector& x_t, const Vector& grad,
                       const Vector& xi);
Vector stela_direction(const Problem& p, const Vector& x_t);

namespace reference {
// Serial version of the coordinate loop, kept as kernel ground truth.
Vector stela_direction(const Problem& p, const Vector& x_t, const Vector& grad,
                       const Vector& xi);
}  // namespace reference

/// Closed-form exact line-search stepsize, clipped to [0,1].
double stela_stepsize(const Problem& p, const Vector& x_t, const Vector& bx,
                      const Vector& grad, const Vector& xi);
double stela_stepsize(const Problem& p, const Vector& x_t, const Vector& bx);

Result run_stela(const Problem& p, const Vector& x0, double delta, int max_iter);

/// Classic MM: each outer step minimizes the linearized-g- upper bound with
/// the l1 inner solver, warm-started at the previous outer solution. The
/// trace records the capped objective at every inner iteration.
Result run_classic_mm(const Problem& p, const Vector& x0, int outer_iters,
                      double inner_delta);

/// Scalar model argmin of (w/2)(x - u)^2 + mu * min(|x|, theta), w > 0.
/// Two-regime candidate comparison in closed form.
double capped_prox_scalar(double u, double w, double mu, double theta);

/// Proximal MM with backtracked step weight 1/beta^m; model_solves records
/// m_t + 1 per iteration.
Result run_proximal_mm(const Problem& p, const Vector& x0, double alpha,
                       double beta, int max_iter, double delta = 1e-6);

struct GeneratedInstance {
  Problem problem;
  Vector x_true;
};

/// A ~ N(0,1) with rows scaled to unit l2 norm; x_true with
/// ceil(density K) nonzeros; b = A x_true + noise; mu = 0.1 ||A^T b||_inf,
/// theta = 1.
GeneratedInstance generate_data(Index n, Index k, double density,
                                double noise_var, std::uint64_t seed);

}  // namespace capped_l1
}  // namespace dcsca
