#include "dcsca/anomaly.hpp"

#include <cmath>
#include <utility>

namespace dcsca {
namespace anomaly {

Problem Problem::make(Matrix Y, Matrix D, double lambda, double mu, Index rho) {
  if (!(lambda > 0) || !(mu > 0)) throw std::invalid_argument("anomaly: lambda, mu must be > 0");
  if (rho < 1 || rho > std::min(Y.rows(), Y.cols()))
    throw std::invalid_argument("anomaly: rho out of range");
  if (D.rows() != Y.rows()) throw std::invalid_argument("anomaly: Y/D row mismatch");
  Problem p;
  p.dDtD = D.colwise().squaredNorm().transpose();
  for (Index i = 0; i < p.dDtD.size(); ++i)
    if (!(p.dDtD(i) > 0)) throw std::invalid_argument("anomaly: D has a zero column");
  p.Y = std::move(Y);
  p.D = std::move(D);
  p.lambda = lambda;
  p.mu = mu;
  p.rho = rho;
  return p;
}

namespace {

void check_shapes(const Problem& p, const State& z) {
  if (z.P.rows() != p.Y.rows() || z.P.cols() != p.rho || z.Q.rows() != p.rho ||
      z.Q.cols() != p.Y.cols() || z.S.rows() != p.D.cols() || z.S.cols() != p.Y.cols())
    throw std::invalid_argument("anomaly: state shape mismatch");
}

Matrix ridge_p(const Problem& p, const Matrix& YmDS, const Matrix& Q) {
  Matrix lhs = Q * Q.transpose();
  lhs.diagonal().array() += p.lambda;
  return solve_spd(lhs, Matrix(Q * YmDS.transpose())).transpose();
}

Matrix ridge_q(const Problem& p, const Matrix& YmDS, const Matrix& P) {
  Matrix lhs = P.transpose() * P;
  lhs.diagonal().array() += p.lambda;
  return solve_spd(lhs, Matrix(P.transpose() * YmDS));
}

// Soft-threshold then scale rows by 1/dDtD; shared with the BS formula.
Matrix bs_from_target(const Problem& p, Matrix target) {
  soft_threshold_inplace(target, p.mu);
  const Index rows = target.rows(), cols = target.cols();
#pragma omp parallel for schedule(static) if (num_threads() > 1)
  for (Index i = 0; i < rows; ++i) {
    const double inv = 1.0 / p.dDtD(i);
    double* row = target.data() + i * cols;
    for (Index j = 0; j < cols; ++j) row[j] *= inv;
  }
  return target;
}

// Best responses from the cached residual R = PQ + DS - Y. The iterative
// solver maintains R (and PQ) across iterations so that each step needs only
// two products with D; the same quantities drive the decomposed solver.
State best_response_r(const Problem& p, const State& z_t, const Matrix& PQ,
                      const Matrix& R) {
  const Matrix YmDS = PQ - R;
  State bz;
  bz.P = ridge_p(p, YmDS, z_t.Q);
  bz.Q = ridge_q(p, YmDS, z_t.P);
  const Matrix M = p.D.transpose() * R;
  bz.S = bs_from_target(p, Matrix(p.dDtD.asDiagonal() * z_t.S - M));
  return bz;
}

// Line-search coefficients from the cached residual; optionally hands back
// W and U so the caller can advance R by R += g W + g^2 U.
QuarticCoeffs quartic_coeffs_r(const Problem& p, const State& z_t,
                               const State& bz, const Matrix& R, Matrix* W_out,
                               Matrix* U_out) {
  const Matrix dP = bz.P - z_t.P;
  const Matrix dQ = bz.Q - z_t.Q;
  const Matrix dS = bz.S - z_t.S;
  Matrix U = dP * dQ;
  Matrix W = z_t.P * dQ;
  W.noalias() += dP * z_t.Q;
  W.noalias() += p.D * dS;

  QuarticCoeffs q;
  q.a = 2.0 * U.squaredNorm();
  q.b = 3.0 * U.cwiseProduct(W).sum();
  q.c = 2.0 * U.cwiseProduct(R).sum() + W.squaredNorm() +
        p.lambda * dP.squaredNorm() + p.lambda * dQ.squaredNorm();
  q.d = W.cwiseProduct(R).sum() + p.lambda * z_t.P.cwiseProduct(dP).sum() +
        p.lambda * z_t.Q.cwiseProduct(dQ).sum() +
        p.mu * (bz.S.template lpNorm<1>() - z_t.S.template lpNorm<1>());
  if (W_out) *W_out = std::move(W);
  if (U_out) *U_out = std::move(U);
  return q;
}

}  // namespace

double objective(const Problem& p, const State& z) {
  check_shapes(p, z);
  const Matrix R = z.P * z.Q + p.D * z.S - p.Y;
  return h_combine(R.squaredNorm(), z.P.squaredNorm(), z.Q.squaredNorm(),
                   z.S.template lpNorm<1>(), p.lambda, p.mu);
}

State best_response(const Problem& p, const State& z_t) {
  check_shapes(p, z_t);
  const Matrix PQ = z_t.P * z_t.Q;
  const Matrix DS = p.D * z_t.S;
  const Matrix R = PQ + DS - p.Y;
  return best_response_r(p, z_t, PQ, R);
}

QuarticCoeffs quartic_coeffs(const Problem& p, const State& z_t, const State& bz) {
  const Matrix PQ = z_t.P * z_t.Q;
  const Matrix DS = p.D * z_t.S;
  const Matrix R = PQ + DS - p.Y;
  return quartic_coeffs_r(p, z_t, bz, R, nullptr, nullptr);
}

double exact_line_search_quartic(const QuarticCoeffs& q) {
  return quartic_min_unit(q.a, q.b, q.c, q.d);
}

Result run_stela(const Problem& p, const State& z0, double delta, int max_iter) {
  if (!(delta > 0)) throw std::invalid_argument("run_stela: delta must be > 0");
  check_shapes(p, z0);
  Stopwatch clock;
  Result res;
  res.z = z0;

  // Cached residual R = PQ + DS - Y, advanced in closed form each step; the
  // update error it accumulates is far below every stopping tolerance.
  Matrix PQ = res.z.P * res.z.Q;
  const Matrix DS = p.D * res.z.S;
  Matrix R = PQ + DS - p.Y;
  double h_cur =
      h_combine(R.squaredNorm(), res.z.P.squaredNorm(), res.z.Q.squaredNorm(),
                res.z.S.template lpNorm<1>(), p.lambda, p.mu);
  res.trace.push_back({0, h_cur, 0.0, 0.0, clock.seconds()});

  for (int t = 0; t < max_iter; ++t) {
    const State bz = best_response_r(p, res.z, PQ, R);
    Matrix W, U;
    const QuarticCoeffs q = quartic_coeffs_r(p, res.z, bz, R, &W, &U);
    const double gap = std::abs(q.d);
    res.final_gap = gap;
    if (gap <= delta) {
      res.converged = true;
      return res;
    }
    const double gamma = exact_line_search_quartic(q);
    res.z.P += gamma * (bz.P - res.z.P);
    res.z.Q += gamma * (bz.Q - res.z.Q);
    res.z.S += gamma * (bz.S - res.z.S);
    R += gamma * W + (gamma * gamma) * U;
    PQ = res.z.P * res.z.Q;
    const double h_next =
        h_combine(R.squaredNorm(), res.z.P.squaredNorm(),
                  res.z.Q.squaredNorm(), res.z.S.template lpNorm<1>(),
                  p.lambda, p.mu);
    if (h_next > h_cur + 1e-10)
      throw std::runtime_error("run_stela: objective increased (internal error)");
    h_cur = h_next;
    res.trace.push_back({t + 1, h_cur, gap, gamma, clock.seconds()});
  }
  return res;
}

Result run_bcd(const Problem& p, const State& z0, int sweeps) {
  check_shapes(p, z0);
  Stopwatch clock;
  Result res;
  res.z = z0;
  const Index I = p.D.cols();
  int step = 0;
  res.trace.push_back({0, objective(p, res.z), 0.0, 0.0, clock.seconds()});

  auto record = [&](double h) {
    res.trace.push_back({++step, h, 0.0, 1.0, clock.seconds()});
  };

  for (int sweep = 0; sweep < sweeps; ++sweep) {
    const Matrix YmDS = p.Y - p.D * res.z.S;
    res.z.P = ridge_p(p, YmDS, res.z.Q);
    record(objective(p, res.z));
    res.z.Q = ridge_q(p, YmDS, res.z.P);
    record(objective(p, res.z));

    // Residual in data-minus-model form, corrected row by row.
    Matrix R = p.Y - res.z.P * res.z.Q - p.D * res.z.S;
    const double reg =
        (p.lambda / 2.0) * (res.z.P.squaredNorm() + res.z.Q.squaredNorm());
    for (Index i = 0; i < I; ++i) {
      const Vector di = p.D.col(i);
      const Eigen::RowVectorXd v =
          di.transpose() * R + p.dDtD(i) * res.z.S.row(i);
      Eigen::RowVectorXd s_new(v.size());
      for (Index k = 0; k < v.size(); ++k)
        s_new(k) = soft_threshold(v(k), p.mu) / p.dDtD(i);
      R.noalias() -= di * (s_new - res.z.S.row(i));
      res.z.S.row(i) = s_new;
      record(0.5 * R.squaredNorm() + reg + p.mu * res.z.S.template lpNorm<1>());
    }
  }
  return res;
}

Result run_admm(const Problem& p, const State& z0, double c, int max_iter) {
  if (!(c > 0)) throw std::invalid_argument("run_admm: c must be > 0");
  check_shapes(p, z0);
  Stopwatch clock;
  Result res;
  res.z = z0;
  Matrix A = z0.S;
  Matrix B = z0.S;
  Matrix Pi = Matrix::Zero(A.rows(), A.cols());

  // (D^T D + c I) is constant; factor once.
  Eigen::MatrixXd lhs = (p.D.transpose() * p.D).eval();
  lhs.diagonal().array() += c;
  const Eigen::LLT<Eigen::MatrixXd> llt(lhs);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("run_admm: D^T D + cI factorization failed");

  res.z.S = A;
  res.trace.push_back({0, objective(p, res.z), 0.0, 0.0, clock.seconds()});

  for (int t = 0; t < max_iter; ++t) {
    const Matrix YmDA = p.Y - p.D * A;
    res.z.Q = ridge_q(p, YmDA, res.z.P);
    B = A + Pi / c;
    soft_threshold_inplace(B, p.mu / c);
    res.z.P = ridge_p(p, YmDA, res.z.Q);
    const Matrix rhs = p.D.transpose() * (p.Y - res.z.P * res.z.Q) + c * B - Pi;
    A = llt.solve(Eigen::MatrixXd(rhs));
    Pi += c * (A - B);

    res.z.S = A;
    const double gap = (A - B).norm();
    res.final_gap = gap;
    res.trace.push_back({t + 1, objective(p, res.z), gap, 1.0, clock.seconds()});
  }
  res.converged = res.final_gap <= 1e-6;
  return res;
}

GeneratedInstance generate_data(Index n, Index k, Index i, Index rho,
                                std::uint64_t seed) {
  if (n < 1 || k < 1 || i < 1 || rho < 1)
    throw std::invalid_argument("generate_data: dimensions must be >= 1");
  RngStream root(seed);
  RngStream rd = root.fork(1), rv = root.fork(2), rs = root.fork(3),
            rp = root.fork(4), rq = root.fork(5);

  Matrix D(n, i);
  for (Index r = 0; r < n; ++r)
    for (Index cidx = 0; cidx < i; ++cidx) D(r, cidx) = rd.uniform01() < 0.5 ? 0.0 : 1.0;
  // No zero columns (deterministic fix keeps seeds reproducible).
  for (Index cidx = 0; cidx < i; ++cidx)
    if (D.col(cidx).sum() == 0.0) D(cidx % n, cidx) = 1.0;

  Matrix S(i, k);
  for (Index r = 0; r < i; ++r)
    for (Index cidx = 0; cidx < k; ++cidx) {
      const double u = rs.uniform01();
      S(r, cidx) = u < 0.05 ? -1.0 : (u >= 0.95 ? 1.0 : 0.0);
    }

  const Matrix P = rp.normal_matrix(n, rho, 0.0, std::sqrt(100.0 / double(i)));
  const Matrix Q = rq.normal_matrix(rho, k, 0.0, std::sqrt(100.0 / double(k)));
  const Matrix V = rv.normal_matrix(n, k, 0.0, 0.1);
  Matrix Y = P * Q + D * S + V;

  const double lambda = 0.1 * spectral_norm(Y);
  const double mu = 0.1 * (D.transpose() * Y).cwiseAbs().maxCoeff();

  GeneratedInstance out;
  out.problem = Problem::make(std::move(Y), std::move(D), lambda, mu, rho);
  out.z_true = State{P, Q, S};
  return out;
}

State default_start(const Problem& p, std::uint64_t seed) {
  RngStream root(seed);
  RngStream rp = root.fork(11), rq = root.fork(12);
  const double sd = std::sqrt(1.0 / double(p.rho));
  State z;
  z.P = rp.normal_matrix(p.Y.rows(), p.rho, 0.0, sd);
  z.Q = rq.normal_matrix(p.rho, p.Y.cols(), 0.0, sd);
  z.S = Matrix::Zero(p.D.cols(), p.Y.cols());
  return z;
}

std::vector<double> relative_error(const std::vector<IterationTrace>& trace,
                                   double h_star) {
  if (!(h_star > 0) || !std::isfinite(h_star))
    throw std::invalid_argument("relative_error: h_star must be finite and > 0");
  std::vector<double> out;
  out.reserve(trace.size());
  for (const auto& r : trace) out.push_back((r.h_value - h_star) / h_star);
  return out;
}

}  // namespace anomaly
}  // namespace dcsca
