#pragma once

#include "chicap/linalg.hpp"

#include <functional>

namespace chicap::detail {

// Returns f(x) and writes the gradient into `grad`.
using ObjectiveFn = std::function<double(const RealVector& x, RealVector& grad)>;

struct LbfgsOptions {
  int max_iterations = 2000;
  int memory = 12;
  double gradient_tol = 1e-11;
  // Stop after `stall_iterations` consecutive steps improving f by less than value_tol * (1 + |f|).
  double value_tol = 1e-15;
  int stall_iterations = 6;
};

struct LbfgsResult {
  RealVector x;
  double value = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Limited-memory BFGS ascent with Armijo backtracking.
LbfgsResult lbfgs_maximize(const ObjectiveFn& f, RealVector x0, const LbfgsOptions& opts);

// Nelder-Mead simplex minimization, used for low-dimensional dual problems.
struct SimplexResult {
  RealVector x;
  double value = 0.0;
  int evaluations = 0;
};
SimplexResult nelder_mead_minimize(const std::function<double(const RealVector&)>& f, RealVector x0,
                                   double initial_step, int max_evaluations, double tol);

}  // namespace chicap::detail
