#pragma once

#include <functional>

#include "dcsca/numerics.hpp"

namespace dcsca {
namespace oracles {

/// Slow, independent reference machinery used by the test suites. These are
/// deliberately brute-force; the fast closed forms are held to them, never
/// the other way around.

struct GridSpec {
  double lo = 0.0;
  double hi = 1.0;
  int points = 2;
};

/// Central differences (f(x+he_i) - f(x-he_i)) / 2h per coordinate.
Vector fd_gradient(const std::function<double(const Vector&)>& f,
                   const Vector& x, double step);

struct GridMin {
  double argmin = 0.0;
  double min = 0.0;
};

/// Exhaustive evaluation over the grid; ties broken toward the smaller
/// argument.
GridMin grid_min_1d(const std::function<double(double)>& phi, const GridSpec& g);

/// Brute-force argmin of (w/2)(x - u)^2 + mu * min(|x|, theta): coarse
/// 10^6-point grid over [-|u|-theta-1, |u|+theta+1] followed by local
/// refinement to 1e-8.
double scalar_capped_prox_oracle(double u, double w, double mu, double theta);

}  // namespace oracles
}  // namespace dcsca
