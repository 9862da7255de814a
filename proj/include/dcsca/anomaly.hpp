#pragma once

#include "dcsca/numerics.hpp"
#include "dcsca/trace.hpp"

namespace dcsca {
namespace anomaly {

/// minimize over (P,Q,S):
///   1/2 ||P Q + D S - Y||_F^2 + lambda/2 (||P||_F^2 + ||Q||_F^2) + mu ||S||_1
/// Y is N x K observations, D is the N x I binary routing matrix, S is I x K.
struct Problem {
  Matrix Y;
  Matrix D;
  double lambda = 0.0;
  double mu = 0.0;
  Index rho = 1;
  Vector dDtD;  // diag(D^T D), every entry > 0

  static Problem make(Matrix Y, Matrix D, double lambda, double mu, Index rho);
};

struct State {
  Matrix P;  // N x rho
  Matrix Q;  // rho x K
  Matrix S;  // I x K
};

struct QuarticCoeffs {
  double a = 0, b = 0, c = 0, d = 0;
};

struct Result {
  State z;
  std::vector<IterationTrace> trace;
  bool converged = false;
  double final_gap = 0.0;
};

double objective(const Problem& p, const State& z);

/// Objective assembled from precomputed pieces: rsq = ||R||_F^2 with
/// R = PQ + DS - Y, psq/qsq the squared factor norms, s_l1 = ||S||_1.
/// Shared by the centralized and decomposed solvers so their traces combine
/// partial sums with identical arithmetic.
inline double h_combine(double rsq, double psq, double qsq, double s_l1,
                        double lambda, double mu) {
  return 0.5 * rsq + (lambda / 2.0) * psq + (lambda / 2.0) * qsq + mu * s_l1;
}

/// Simultaneous best responses of the three separable convex subproblems.
State best_response(const Problem& p, const State& z_t);

/// Coefficients of the exact line-search polynomial
/// phi(g) = a/4 g^4 + b/3 g^3 + c/2 g^2 + d g (+ f(Z^t), dropped).
/// d equals the directional stationarity quantity, so the stopping gap
/// is |d|.
QuarticCoeffs quartic_coeffs(const Problem& p, const State& z_t, const State& bz);

double exact_line_search_quartic(const QuarticCoeffs& q);

Result run_stela(const Problem& p, const State& z0, double delta, int max_iter);

/// Sequential block coordinate descent: ridge updates for P and Q, then the
/// rows of S one at a time by their scalar soft-thresholding minimizers.
/// Records h after every row update (plus the P/Q updates).
Result run_bcd(const Problem& p, const State& z0, int sweeps);

/// ADMM on the split A = B. Non-convergence is an expected outcome and is
/// recorded, not raised; the objective is reported with S := A.
Result run_admm(const Problem& p, const State& z0, double c, int max_iter);

struct GeneratedInstance {
  Problem problem;
  State z_true;
};

/// Synthetic instance: D binary uniform, S in {-1,0,1} w.p. 0.05/0.9/0.05,
/// P ~ N(0, 100/I), Q ~ N(0, 100/K), noise N(0, 0.01);
/// lambda = 0.1 ||Y||_2, mu = 0.1 max|D^T Y|.
GeneratedInstance generate_data(Index n, Index k, Index i, Index rho,
                                std::uint64_t seed);

/// Default start: P, Q ~ N(0, 1/rho) from the run seed, S = 0.
State default_start(const Problem& p, std::uint64_t seed);

/// (h(Z^t) - h*) / h* per trace record.
std::vector<double> relative_error(const std::vector<IterationTrace>& trace,
                                   double h_star);

}  // namespace anomaly
}  // namespace dcsca
