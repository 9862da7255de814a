#include "dcsca/sca.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace dcsca {

std::string trace_to_csv(const std::vector<IterationTrace>& trace) {
  std::string out = "iter,h,gap,gamma,seconds\n";
  char buf[256];
  for (const auto& r : trace) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.9f\n", r.iteration,
                  r.h_value, r.stationarity_gap, r.step_size, r.elapsed_seconds);
    out += buf;
  }
  return out;
}

std::string trace_to_json(const std::vector<IterationTrace>& trace) {
  std::string out = "[";
  char buf[320];
  for (size_t i = 0; i < trace.size(); ++i) {
    const auto& r = trace[i];
    std::snprintf(buf, sizeof(buf),
                  "%s\n  {\"iter\": %d, \"h\": %.17g, \"gap\": %.17g, "
                  "\"gamma\": %.17g, \"seconds\": %.9f}",
                  i ? "," : "", r.iteration, r.h_value, r.stationarity_gap,
                  r.step_size, r.elapsed_seconds);
    out += buf;
  }
  out += "\n]\n";
  return out;
}

LineSearchSpec parse_line_search(const std::string& text) {
  if (text == "exact") return ExactLineSearch{};
  if (text == "successive") return SuccessiveLineSearch{};
  if (text.rfind("successive:", 0) == 0) {
    SuccessiveLineSearch s;
    if (std::sscanf(text.c_str(), "successive:%lf:%lf:%d", &s.alpha, &s.beta,
                    &s.m_max) < 2)
      throw std::invalid_argument("bad line search spec: " + text);
    return s;
  }
  if (text.rfind("constant", 0) == 0) {
    ConstantStep c;
    if (text.size() > 9) c.gamma = std::stod(text.substr(9));
    if (!(c.gamma > 0.0 && c.gamma <= 1.0))
      throw std::invalid_argument("constant stepsize must be in (0,1]");
    return c;
  }
  throw std::invalid_argument("unknown line search spec: " + text);
}

std::string line_search_name(const LineSearchSpec& ls) {
  if (std::holds_alternative<ExactLineSearch>(ls)) return "exact";
  if (std::holds_alternative<SuccessiveLineSearch>(ls)) return "successive";
  return "constant";
}

double upper_bound_eval(const DcProblem& p, const Vector& x, const Vector& x_t) {
  if (x.size() != x_t.size() || x.size() != p.dimension)
    throw std::invalid_argument("upper_bound_eval: dimension mismatch");
  const Vector xi = p.g_minus_subgrad(x_t);
  return p.f(x) - p.g_minus(x_t) - (x - x_t).dot(xi) + p.g_plus(x);
}

namespace {

double directional_gap(const DcProblem& p, const Vector& x_t, const Vector& bx_t) {
  const Vector d = bx_t - x_t;
  const Vector grad = p.f_grad(x_t);
  const Vector xi = p.g_minus_subgrad(x_t);
  return d.dot(grad - xi) + p.g_plus(bx_t) - p.g_plus(x_t);
}

}  // namespace

double stationarity_gap(const DcProblem& p, const Vector& x_t, const Vector& bx_t) {
  return std::abs(directional_gap(p, x_t, bx_t));
}

bool descent_check(const DcProblem& p, const Vector& x_t, const Vector& bx_t) {
  return directional_gap(p, x_t, bx_t) < -1e-12;
}

double exact_line_search_convex(const DcProblem& p, const Vector& x_t,
                                const Vector& bx_t, double delta_gplus) {
  const Vector d = bx_t - x_t;
  if (d.norm() == 0.0) return 0.0;

  auto dphi = [&](double g) {
    const double v = d.dot(p.f_grad(x_t + g * d)) + delta_gplus;
    if (!std::isfinite(v))
      throw std::runtime_error("exact_line_search_convex: non-finite slope");
    return v;
  };

  if (dphi(0.0) >= 0.0) return 0.0;
  if (dphi(1.0) <= 0.0) return 1.0;
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (dphi(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double successive_line_search(const DcProblem& p, const Vector& x_t,
                              const Vector& bx_t, double alpha, double beta,
                              int m_max) {
  if (!(alpha > 0 && alpha < 1 && beta > 0 && beta < 1))
    throw std::invalid_argument("successive_line_search: need 0 < alpha, beta < 1");
  const Vector d = bx_t - x_t;
  const Vector xi = p.g_minus_subgrad(x_t);
  const double f_t = p.f(x_t);
  const double dg = p.g_plus(bx_t) - p.g_plus(x_t);  // g+(Bx) evaluated once
  const double slope = d.dot(p.f_grad(x_t) - xi) + dg;
  const double d_xi = d.dot(xi);

  double step = 1.0;
  for (int m = 0; m <= m_max; ++m, step *= beta) {
    const double lhs = p.f(x_t + step * d) - step * d_xi + step * dg;
    const double rhs = f_t + alpha * step * slope;
    if (lhs <= rhs) return step;
  }
  throw LineSearchFailure("successive_line_search: no admissible stepsize");
}

ScaResult run_sca(const DcProblem& p, const SurrogateSolver& s,
                  const LineSearchSpec& ls, const Vector& x0, double delta,
                  int max_iter) {
  if (!(delta > 0)) throw std::invalid_argument("run_sca: delta must be > 0");
  Stopwatch clock;
  ScaResult res;
  res.x = x0;
  double h_cur = p.h(res.x);
  res.trace.push_back({0, h_cur, 0.0, 0.0, clock.seconds()});

  for (int t = 0; t < max_iter; ++t) {
    const Vector xi = p.g_minus_subgrad(res.x);
    const Vector bx = s.solve(res.x, xi);
    const double gap = stationarity_gap(p, res.x, bx);
    res.final_gap = gap;
    if (gap <= delta) {
      res.converged = true;
      return res;
    }
    if (!descent_check(p, res.x, bx))
      throw std::runtime_error("run_sca: best response is not a descent direction");

    double gamma;
    if (std::holds_alternative<ExactLineSearch>(ls)) {
      const double delta_gplus =
          p.g_plus(bx) - p.g_plus(res.x) - (bx - res.x).dot(xi);
      gamma = exact_line_search_convex(p, res.x, bx, delta_gplus);
    } else if (const auto* suc = std::get_if<SuccessiveLineSearch>(&ls)) {
      gamma = successive_line_search(p, res.x, bx, suc->alpha, suc->beta, suc->m_max);
    } else {
      gamma = std::get<ConstantStep>(ls).gamma;
    }

    res.x += gamma * (bx - res.x);
    const double h_next = p.h(res.x);
    if (h_next > h_cur + 1e-10)
      throw std::runtime_error("run_sca: objective increased (internal error)");
    h_cur = h_next;
    res.trace.push_back({t + 1, h_cur, gap, gamma, clock.seconds()});
    res.model_solves.push_back(1);
  }
  return res;
}

SurrogateSolver proximal_surrogate(const DcProblem& p, double c_t, double mu) {
  if (!(c_t > 0)) throw std::invalid_argument("proximal_surrogate: c_t must be > 0");
  SurrogateSolver s;
  s.description = "proximal(c=" + std::to_string(c_t) + ")";
  s.solve = [&p, c_t, mu](const Vector& x_t, const Vector& xi_minus) {
    const Vector v = x_t - (p.f_grad(x_t) - xi_minus) / c_t;
    return soft_threshold(v, mu / c_t);
  };
  return s;
}

ScaResult gist_baseline(const DcProblem& p, double mu, const Vector& x0,
                        double beta, double alpha, int max_iter, double delta) {
  if (!(alpha > 0 && alpha < 1 && beta > 0 && beta < 1))
    throw std::invalid_argument("gist_baseline: need 0 < alpha, beta < 1");
  Stopwatch clock;
  ScaResult res;
  res.x = x0;
  double h_cur = p.h(res.x);
  res.trace.push_back({0, h_cur, 0.0, 0.0, clock.seconds()});

  for (int t = 0; t < max_iter; ++t) {
    const Vector grad = p.f_grad(res.x);
    double step = 1.0;
    Vector x_next;
    int solves = 0;
    bool accepted = false;
    for (int m = 0; m <= 60; ++m, step *= beta) {
      x_next = soft_threshold(Vector(res.x - step * grad), mu * step);
      ++solves;
      const double h_next = p.h(x_next);
      if (h_next < h_cur - (alpha / (2.0 * step)) * (x_next - res.x).squaredNorm() ||
          (x_next - res.x).norm() == 0.0) {
        accepted = true;
        h_cur = h_next;
        break;
      }
    }
    if (!accepted) throw LineSearchFailure("gist_baseline: backtracking exhausted");
    const double move = (x_next - res.x).norm();
    res.x = x_next;
    res.model_solves.push_back(solves);
    res.trace.push_back({t + 1, h_cur, move, 1.0, clock.seconds()});
    res.final_gap = move;
    if (move <= delta) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace dcsca
