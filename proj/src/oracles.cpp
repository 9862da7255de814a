#include "dcsca/oracles.hpp"

#include <cmath>

namespace dcsca {
namespace oracles {

Vector fd_gradient(const std::function<double(const Vector&)>& f,
                   const Vector& x, double step) {
  if (!(step > 0)) throw std::invalid_argument("fd_gradient: step must be > 0");
  Vector g(x.size());
  Vector xp = x;
  for (Index i = 0; i < x.size(); ++i) {
    xp(i) = x(i) + step;
    const double fp = f(xp);
    xp(i) = x(i) - step;
    const double fm = f(xp);
    xp(i) = x(i);
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw std::runtime_error("fd_gradient: non-finite evaluation");
    g(i) = (fp - fm) / (2.0 * step);
  }
  return g;
}

GridMin grid_min_1d(const std::function<double(double)>& phi, const GridSpec& g) {
  if (!(g.lo < g.hi) || g.points < 2)
    throw std::invalid_argument("grid_min_1d: need lo < hi and points >= 2");
  GridMin best{g.lo, phi(g.lo)};
  if (!std::isfinite(best.min))
    throw std::runtime_error("grid_min_1d: non-finite evaluation");
  const double h = (g.hi - g.lo) / double(g.points - 1);
  for (int i = 1; i < g.points; ++i) {
    const double x = g.lo + h * double(i);
    const double v = phi(x);
    if (!std::isfinite(v))
      throw std::runtime_error("grid_min_1d: non-finite evaluation");
    if (v < best.min) best = {x, v};  // strict: ties stay at smaller argument
  }
  return best;
}

double scalar_capped_prox_oracle(double u, double w, double mu, double theta) {
  if (!(w > 0))
    throw std::invalid_argument("scalar_capped_prox_oracle: w must be > 0");
  auto obj = [&](double x) {
    return 0.5 * w * (x - u) * (x - u) + mu * std::min(std::abs(x), theta);
  };
  const double half = std::abs(u) + theta + 1.0;
  GridMin coarse = grid_min_1d(obj, {-half, half, 1000001});
  double width = 2.0 * half / 1000000.0;
  double lo = coarse.argmin - width, hi = coarse.argmin + width;
  while (hi - lo > 1e-8) {
    GridMin fine = grid_min_1d(obj, {lo, hi, 101});
    width = (hi - lo) / 100.0;
    lo = fine.argmin - width;
    hi = fine.argmin + width;
  }
  return grid_min_1d(obj, {lo, hi, 101}).argmin;
}

}  // namespace oracles
}  // namespace dcsca
