#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>

#include "dcsca/numerics.hpp"
#include "dcsca/trace.hpp"

namespace dcsca {

/// Objective triple h(x) = f(x) + g+(x) - g-(x), with f smooth and g+, g-
/// convex. g- supplies one deterministic subgradient; it is never averaged
/// at kink points. The feasible set is the full space (a projection hook is
/// deliberately not provided).
struct DcProblem {
  std::function<double(const Vector&)> f;
  std::function<Vector(const Vector&)> f_grad;
  std::function<double(const Vector&)> g_plus;
  std::function<double(const Vector&)> g_minus;
  std::function<Vector(const Vector&)> g_minus_subgrad;
  Index dimension = 0;

  double h(const Vector& x) const { return f(x) + g_plus(x) - g_minus(x); }
};

/// Produces the best response of the convex approximate problem at x_t.
struct SurrogateSolver {
  std::function<Vector(const Vector& x_t, const Vector& xi_minus)> solve;
  std::string description;
};

struct ExactLineSearch {};
struct SuccessiveLineSearch {
  double alpha = 0.5;
  double beta = 0.5;
  int m_max = 60;
};
struct ConstantStep {
  double gamma = 1.0;
};
using LineSearchSpec = std::variant<ExactLineSearch, SuccessiveLineSearch, ConstantStep>;

LineSearchSpec parse_line_search(const std::string& text);
std::string line_search_name(const LineSearchSpec& ls);

/// Majorant obtained by linearizing g- at x_t; dominates h globally and is
/// tight at x_t.
double upper_bound_eval(const DcProblem& p, const Vector& x, const Vector& x_t);

/// |d^T (grad f(x_t) - xi-(x_t)) + g+(Bx_t) - g+(x_t)| with d = bx_t - x_t;
/// the stopping quantity of the driver.
double stationarity_gap(const DcProblem& p, const Vector& x_t, const Vector& bx_t);

/// True iff the un-absolute-valued gap quantity is < -1e-12, i.e. bx_t - x_t
/// strictly descends the majorant.
bool descent_check(const DcProblem& p, const Vector& x_t, const Vector& bx_t);

/// Minimizes phi(g) = f(x_t + g d) + g * delta_gplus over [0,1] by bisection
/// on phi' (interval tolerance 1e-10). Requires f convex along the segment;
/// delta_gplus = g+(bx_t) - g+(x_t) - d^T xi-(x_t).
double exact_line_search_convex(const DcProblem& p, const Vector& x_t,
                                const Vector& bx_t, double delta_gplus);

/// Backtracking over the linearized majorant model: returns beta^m for the
/// smallest m <= m_max passing the sufficient-decrease test. g+(bx_t) is
/// evaluated exactly once.
double successive_line_search(const DcProblem& p, const Vector& x_t,
                              const Vector& bx_t, double alpha, double beta,
                              int m_max);

struct ScaResult {
  Vector x;
  std::vector<IterationTrace> trace;
  bool converged = false;
  double final_gap = 0.0;
  // Convex-model solves per iteration (always 1 for the SCA driver; > 1 is
  // possible for backtracked baselines).
  std::vector<int> model_solves;
};

/// SCA driver: best response, stepsize, convex-combination update, gap stop.
/// Asserts monotone decrease of h (1e-10 slack) every iteration.
ScaResult run_sca(const DcProblem& p, const SurrogateSolver& s,
                  const LineSearchSpec& ls, const Vector& x0, double delta,
                  int max_iter);

/// Proximal surrogate for g+ = mu * l1: closed-form entrywise soft threshold.
SurrogateSolver proximal_surrogate(const DcProblem& p, double c_t, double mu);

/// Proximal-gradient baseline with backtracked step weight 1/beta^m, for
/// problems with g- == 0 and g+ = mu * l1. model_solves records m_t + 1 per
/// iteration.
ScaResult gist_baseline(const DcProblem& p, double mu, const Vector& x0,
                        double beta, double alpha, int max_iter,
                        double delta = 1e-6);

}  // namespace dcsca
