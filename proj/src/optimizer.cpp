#include "chicap/detail/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <vector>

namespace chicap::detail {

LbfgsResult lbfgs_maximize(const ObjectiveFn& f, RealVector x0, const LbfgsOptions& opts) {
  // Minimize -f internally.
  const auto eval = [&](const RealVector& x, RealVector& g) {
    const double v = f(x, g);
    g = -g;
    return -v;
  };

  LbfgsResult res;
  RealVector x = std::move(x0);
  RealVector g(x.size());
  double fx = eval(x, g);
  std::deque<RealVector> s_hist;
  std::deque<RealVector> y_hist;
  std::deque<double> rho_hist;
  int stall = 0;

  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    const double gnorm = g.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(fx) || gnorm < opts.gradient_tol) {
      res.converged = std::isfinite(fx);
      break;
    }

    // Two-loop recursion.
    RealVector q = g;
    std::vector<double> alpha(s_hist.size());
    for (int k = static_cast<int>(s_hist.size()) - 1; k >= 0; --k) {
      alpha[static_cast<std::size_t>(k)] = rho_hist[static_cast<std::size_t>(k)] * s_hist[static_cast<std::size_t>(k)].dot(q);
      q -= alpha[static_cast<std::size_t>(k)] * y_hist[static_cast<std::size_t>(k)];
    }
    if (!s_hist.empty()) {
      const double gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      q *= gamma;
    } else {
      q *= std::min(1.0, 1.0 / std::max(g.norm(), 1e-300));
    }
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double beta = rho_hist[k] * y_hist[k].dot(q);
      q += s_hist[k] * (alpha[k] - beta);
    }
    RealVector dir = -q;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -g * std::min(1.0, 1.0 / std::max(g.norm(), 1e-300));
      slope = g.dot(dir);
    }

    // Armijo backtracking.
    double step = 1.0;
    RealVector xn(x.size());
    RealVector gn(x.size());
    double fn = fx;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      xn = x + step * dir;
      fn = eval(xn, gn);
      if (std::isfinite(fn) && fn <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!s_hist.empty()) {
        // Retry once from steepest descent.
        s_hist.clear();
        y_hist.clear();
        rho_hist.clear();
        continue;
      }
      res.converged = gnorm < 1e-6;
      break;
    }

    const RealVector s = xn - x;
    const RealVector y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-14 * s.norm() * y.norm() && sy > 0.0) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opts.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    const double improvement = fx - fn;
    x = xn;
    g = gn;
    fx = fn;
    if (improvement <= opts.value_tol * (1.0 + std::abs(fx))) {
      if (++stall >= opts.stall_iterations) {
        res.converged = true;
        ++it;
        break;
      }
    } else {
      stall = 0;
    }
  }

  res.x = std::move(x);
  res.value = -fx;
  res.gradient_norm = g.lpNorm<Eigen::Infinity>();
  res.iterations = it;
  return res;
}

SimplexResult nelder_mead_minimize(const std::function<double(const RealVector&)>& f, RealVector x0,
                                   double initial_step, int max_evaluations, double tol) {
  const auto n = x0.size();
  std::vector<RealVector> pts;
  std::vector<double> vals;
  int evals = 0;
  const auto call = [&](const RealVector& x) {
    ++evals;
    return f(x);
  };
  pts.push_back(x0);
  vals.push_back(call(x0));
  for (Eigen::Index k = 0; k < n; ++k) {
    RealVector p = x0;
    p[k] += initial_step;
    pts.push_back(p);
    vals.push_back(call(p));
  }

  std::vector<std::size_t> order(pts.size());
  while (evals < max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[order.size() - 2];
    if (std::abs(vals[worst] - vals[best]) <= tol) break;

    RealVector centroid = RealVector::Zero(n);
    for (std::size_t k = 0; k + 1 < order.size(); ++k) centroid += pts[order[k]];
    centroid /= static_cast<double>(n);

    const RealVector reflected = centroid + (centroid - pts[worst]);
    const double fr = call(reflected);
    if (fr < vals[best]) {
      const RealVector expanded = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = call(expanded);
      if (fe < fr) {
        pts[worst] = expanded;
        vals[worst] = fe;
      } else {
        pts[worst] = reflected;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = reflected;
      vals[worst] = fr;
      continue;
    }
    const RealVector contracted = centroid + 0.5 * (pts[worst] - centroid);
    const double fc = call(contracted);
    if (fc < vals[worst]) {
      pts[worst] = contracted;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (k == best) continue;
      pts[k] = pts[best] + 0.5 * (pts[k] - pts[best]);
      vals[k] = call(pts[k]);
    }
  }
  const auto it = std::min_element(vals.begin(), vals.end());
  const auto idx = static_cast<std::size_t>(it - vals.begin());
  return {pts[idx], vals[idx], evals};
}

}  // namespace chicap::detail
