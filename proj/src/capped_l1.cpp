#include "dcsca/capped_l1.hpp"

#include <cmath>
#include <numeric>

namespace dcsca {
namespace capped_l1 {

Problem Problem::make(Matrix A, Vector b, double mu, double theta) {
  if (!(mu > 0) || !(theta > 0))
    throw std::invalid_argument("capped_l1: mu, theta must be > 0");
  if (A.rows() != b.size()) throw std::invalid_argument("capped_l1: A/b size mismatch");
  Problem p;
  p.diagAtA = A.colwise().squaredNorm().transpose();
  for (Index k = 0; k < p.diagAtA.size(); ++k)
    if (!(p.diagAtA(k) > 0)) throw std::invalid_argument("capped_l1: A has a zero column");
  p.A = std::move(A);
  p.b = std::move(b);
  p.mu = mu;
  p.theta = theta;
  return p;
}

namespace {

double capped_norm(const Problem& p, const Vector& x) {
  double s = 0.0;
  for (Index k = 0; k < x.size(); ++k) s += std::min(std::abs(x(k)), p.theta);
  return p.mu * s;
}

}  // namespace

double h_eval(const Problem& p, const Vector& x) {
  if (x.size() != p.A.cols()) throw std::invalid_argument("h_eval: length mismatch");
  return 0.5 * (p.A * x - p.b).squaredNorm() + capped_norm(p, x);
}

Vector xi_minus(const Problem& p, const Vector& x) {
  Vector xi(x.size());
  for (Index k = 0; k < x.size(); ++k)
    xi(k) = x(k) >= p.theta ? p.mu : (x(k) <= -p.theta ? -p.mu : 0.0);
  return xi;
}

Vector stela_direction(const Problem& p, const Vector& x_t, const Vector& grad,
                       const Vector& xi) {
  const Index K = x_t.size();
  Vector bx(K);
#pragma omp parallel for schedule(static) if (num_threads() > 1)
  for (Index k = 0; k < K; ++k) {
    const double r = p.diagAtA(k) * x_t(k) + xi(k) - grad(k);
    bx(k) = (std::max(r - p.mu, 0.0) - std::max(-r - p.mu, 0.0)) / p.diagAtA(k);
  }
  return bx;
}

Vector stela_direction(const Problem& p, const Vector& x_t) {
  return stela_direction(p, x_t, Vector(p.A.transpose() * (p.A * x_t - p.b)),
                         xi_minus(p, x_t));
}

namespace reference {
Vector stela_direction(const Problem& p, const Vector& x_t, const Vector& grad,
                       const Vector& xi) {
  Vector bx(x_t.size());
  for (Index k = 0; k < x_t.size(); ++k) {
    const double r = p.diagAtA(k) * x_t(k) + xi(k) - grad(k);
    bx(k) = soft_threshold(r, p.mu) / p.diagAtA(k);
  }
  return bx;
}
}  // namespace reference

double stela_stepsize(const Problem& p, const Vector& x_t, const Vector& bx,
                      const Vector& grad, const Vector& xi) {
  const Vector d = bx - x_t;
  if (d.norm() == 0.0) return 0.0;
  const double denom = (p.A * d).squaredNorm();
  const double num = (xi - grad).dot(d) -
                     p.mu * (bx.template lpNorm<1>() - x_t.template lpNorm<1>());
  if (denom == 0.0) return 1.0;  // A maps the direction to zero
  return std::clamp(num / denom, 0.0, 1.0);
}

double stela_stepsize(const Problem& p, const Vector& x_t, const Vector& bx) {
  return stela_stepsize(p, x_t, bx, Vector(p.A.transpose() * (p.A * x_t - p.b)),
                        xi_minus(p, x_t));
}

Result run_stela(const Problem& p, const Vector& x0, double delta, int max_iter) {
  if (!(delta > 0)) throw std::invalid_argument("run_stela: delta must be > 0");
  Stopwatch clock;
  Result res;
  res.x = x0;
  Vector r = p.A * res.x - p.b;
  double h_cur = 0.5 * r.squaredNorm() + capped_norm(p, res.x);
  res.trace.push_back({0, h_cur, 0.0, 0.0, clock.seconds()});

  for (int t = 0; t < max_iter; ++t) {
    const Vector grad = p.A.transpose() * r;  // shared by direction and stepsize
    const Vector xi = xi_minus(p, res.x);
    const Vector bx = stela_direction(p, res.x, grad, xi);
    const Vector d = bx - res.x;
    const double dg = p.mu * (bx.template lpNorm<1>() - res.x.template lpNorm<1>());
    const double gap = std::abs(d.dot(grad - xi) + dg);
    res.final_gap = gap;
    if (gap <= delta) {
      res.converged = true;
      return res;
    }
    const Vector Ad = p.A * d;
    const double denom = Ad.squaredNorm();
    const double gamma =
        denom == 0.0 ? 1.0 : std::clamp(((xi - grad).dot(d) - dg) / denom, 0.0, 1.0);
    res.x += gamma * d;
    r += gamma * Ad;
    const double h_next = 0.5 * r.squaredNorm() + capped_norm(p, res.x);
    if (h_next > h_cur + 1e-10)
      throw std::runtime_error("run_stela: objective increased (internal error)");
    h_cur = h_next;
    res.trace.push_back({t + 1, h_cur, gap, gamma, clock.seconds()});
    res.model_solves.push_back(1);
  }
  return res;
}

Result run_classic_mm(const Problem& p, const Vector& x0, int outer_iters,
                      double inner_delta) {
  Stopwatch clock;
  Result res;
  res.x = x0;
  Vector r = p.A * res.x - p.b;
  res.trace.push_back(
      {0, 0.5 * r.squaredNorm() + capped_norm(p, res.x), 0.0, 0.0, clock.seconds()});
  int step = 0;

  for (int outer = 0; outer < outer_iters; ++outer) {
    const Vector xi = xi_minus(p, res.x);
    // Inner problem: 1/2||Ax-b||^2 - x^T xi + mu||x||_1, solved by the l1
    // variant of the same update with xi held constant. Warm start at res.x.
    int inner_steps = 0;
    for (;;) {
      const Vector grad = p.A.transpose() * r;
      const Vector bx = stela_direction(p, res.x, grad, xi);
      const Vector d = bx - res.x;
      const double dg =
          p.mu * (bx.template lpNorm<1>() - res.x.template lpNorm<1>());
      const double gap = std::abs(d.dot(grad - xi) + dg);
      if (gap <= inner_delta) break;
      const Vector Ad = p.A * d;
      const double denom = Ad.squaredNorm();
      const double gamma =
          denom == 0.0 ? 1.0 : std::clamp(((xi - grad).dot(d) - dg) / denom, 0.0, 1.0);
      res.x += gamma * d;
      r += gamma * Ad;
      ++inner_steps;
      res.trace.push_back({++step, 0.5 * r.squaredNorm() + capped_norm(p, res.x),
                           gap, gamma, clock.seconds()});
      if (inner_steps > 100000)
        throw std::runtime_error("run_classic_mm: inner solver stalled");
    }
    res.model_solves.push_back(inner_steps);
    if (inner_steps == 0) {  // warm start already optimal: outer fixed point
      res.converged = true;
      break;
    }
  }
  const Vector grad = p.A.transpose() * r;
  const Vector xi = xi_minus(p, res.x);
  const Vector bx = stela_direction(p, res.x, grad, xi);
  res.final_gap = std::abs(
      (bx - res.x).dot(grad - xi) +
      p.mu * (bx.template lpNorm<1>() - res.x.template lpNorm<1>()));
  if (res.final_gap <= inner_delta) res.converged = true;
  return res;
}

double capped_prox_scalar(double u, double w, double mu, double theta) {
  if (!(w > 0)) throw std::invalid_argument("capped_prox_scalar: w must be > 0");
  // Candidate restricted to |x| <= theta: soft threshold clipped inward.
  const double x1 = std::clamp(soft_threshold(u, mu / w), -theta, theta);
  const double obj1 = 0.5 * w * (x1 - u) * (x1 - u) + mu * std::abs(x1);
  // Candidate restricted to |x| >= theta: unregularized minimizer clipped
  // outward (the penalty is the constant mu*theta there).
  const double x2 = std::abs(u) >= theta ? u : std::copysign(theta, u);
  const double obj2 = 0.5 * w * (x2 - u) * (x2 - u) + mu * theta;
  return obj1 <= obj2 ? x1 : x2;
}

Result run_proximal_mm(const Problem& p, const Vector& x0, double alpha,
                       double beta, int max_iter, double delta) {
  if (!(alpha > 0 && alpha < 1 && beta > 0 && beta < 1))
    throw std::invalid_argument("run_proximal_mm: need 0 < alpha, beta < 1");
  Stopwatch clock;
  Result res;
  res.x = x0;
  Vector r = p.A * res.x - p.b;
  double h_cur = 0.5 * r.squaredNorm() + capped_norm(p, res.x);
  res.trace.push_back({0, h_cur, 0.0, 0.0, clock.seconds()});
  const Index K = p.A.cols();

  for (int t = 0; t < max_iter; ++t) {
    const Vector grad = p.A.transpose() * r;
    double step = 1.0;
    Vector x_next(K);
    double h_next = 0.0;
    Vector r_next;
    int solves = 0;
    bool accepted = false;
    for (int m = 0; m <= 60; ++m, step *= beta) {
      const double w = 1.0 / step;
#pragma omp parallel for schedule(static) if (num_threads() > 1)
      for (Index k = 0; k < K; ++k)
        x_next(k) = capped_prox_scalar(res.x(k) - grad(k) * step, w, p.mu, p.theta);
      ++solves;
      r_next = p.A * x_next - p.b;
      h_next = 0.5 * r_next.squaredNorm() + capped_norm(p, x_next);
      const double move2 = (x_next - res.x).squaredNorm();
      if (h_next - h_cur <= -(alpha * w / 2.0) * move2 || move2 == 0.0) {
        accepted = true;
        break;
      }
    }
    if (!accepted)
      throw LineSearchFailure("run_proximal_mm: backtracking exhausted");
    res.model_solves.push_back(solves);
    const double move = (x_next - res.x).norm();
    res.x = x_next;
    r = r_next;
    h_cur = h_next;
    res.trace.push_back({t + 1, h_cur, move, 1.0, clock.seconds()});
    res.final_gap = move;
    if (move <= delta) {
      res.converged = true;
      break;
    }
  }
  return res;
}

GeneratedInstance generate_data(Index n, Index k, double density,
                                double noise_var, std::uint64_t seed) {
  if (!(density > 0 && density < 1))
    throw std::invalid_argument("generate_data: density must be in (0,1)");
  RngStream root(seed);
  RngStream ra = root.fork(1), rx = root.fork(2), rpos = root.fork(3),
            re = root.fork(4);

  Matrix A = ra.normal_matrix(n, k, 0.0, 1.0);
  for (Index r = 0; r < n; ++r) A.row(r) /= A.row(r).norm();

  const Index nnz = static_cast<Index>(std::ceil(density * double(k)));
  std::vector<Index> idx(k);
  std::iota(idx.begin(), idx.end(), Index{0});
  for (Index j = 0; j < nnz; ++j) {  // partial Fisher-Yates
    const Index pick = j + Index(rpos.next_u64() % std::uint64_t(k - j));
    std::swap(idx[j], idx[pick]);
  }
  Vector x_true = Vector::Zero(k);
  for (Index j = 0; j < nnz; ++j) x_true(idx[j]) = rx.normal(0.0, 1.0);

  Vector b = A * x_true + re.normal_vector(n, 0.0, std::sqrt(noise_var));
  const double mu = 0.1 * (A.transpose() * b).cwiseAbs().maxCoeff();

  GeneratedInstance out;
  out.problem = Problem::make(std::move(A), std::move(b), mu, 1.0);
  out.x_true = std::move(x_true);
  return out;
}

}  // namespace capped_l1
}  // namespace dcsca
