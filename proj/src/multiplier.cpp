#include "chicap/capacity.hpp"

#include "chicap/errors.hpp"

#include <cmath>

namespace chicap {

KuhnTuckerResult kuhn_tucker_multiplier(const KrausChannel& c, const Matrix& effect, double alpha,
                                        const OptimizerConfig& cfg) {
  cfg.validate();
  const ConstraintSet constraint = ConstraintSet::linear(effect, alpha);
  const auto& lin = std::get<ConstraintSet::Linear>(constraint.variant());
  if (lin.effect.rows() != static_cast<Eigen::Index>(c.din()))
    throw InvalidInput("kuhn_tucker_multiplier: effect dimension mismatch");
  const Matrix& a = lin.effect;
  if (!(lin.alpha > eigenvalues_h(a)[0] + 1e-12))
    throw InvalidInput("kuhn_tucker_multiplier: no Slater point (alpha equals the minimal eigenvalue of A)");
  const Matrix e = identity(c.din()) - a;

  OptimizerConfig inner = cfg;
  inner.certify = false;
  const auto solve = [&](double lambda) { return lagrangian_capacity(c, e, lambda, inner); };
  const auto load = [&](const CapacityResult& r) { return (a * r.average.matrix()).trace().real(); };

  CapacityResult lo_res = solve(0.0);
  bool bracketed = true;
  double lambda = 0.0;
  Ensemble mixed = lo_res.ensemble;

  if (load(lo_res) > lin.alpha) {
    // Tr A rho*(lambda) is nonincreasing in lambda; grow [lo, hi] until it drops below alpha.
    double lo = 0.0;
    double hi = 1.0;
    CapacityResult hi_res = solve(hi);
    while (load(hi_res) > lin.alpha) {
      if (hi >= 1e6) {
        bracketed = false;
        break;
      }
      lo = hi;
      lo_res = std::move(hi_res);
      hi *= 2.0;
      hi_res = solve(hi);
    }
    for (int it = 0; bracketed && it < 60 && hi - lo > 1e-9 * (1.0 + hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      CapacityResult r = solve(mid);
      if (load(r) > lin.alpha) {
        lo = mid;
        lo_res = std::move(r);
      } else {
        hi = mid;
        hi_res = std::move(r);
      }
    }
    lambda = 0.5 * (lo + hi);
    // Both end points are near-optimal for the Lagrangian at lambda; mix them to meet Tr A rho = alpha.
    const double a_lo = load(lo_res);
    const double a_hi = load(hi_res);
    const double s = a_lo > a_hi ? (a_lo - lin.alpha) / (a_lo - a_hi) : 1.0;
    std::vector<double> w;
    std::vector<DensityMatrix> st;
    for (std::size_t i = 0; i < lo_res.ensemble.size(); ++i) {
      w.push_back((1.0 - s) * lo_res.ensemble.weight(i));
      st.push_back(lo_res.ensemble.state(i));
    }
    for (std::size_t i = 0; i < hi_res.ensemble.size(); ++i) {
      w.push_back(s * hi_res.ensemble.weight(i));
      st.push_back(hi_res.ensemble.state(i));
    }
    mixed = Ensemble::normalized(std::move(w), std::move(st));
  }

  const DensityMatrix avg = average_state(mixed);
  const double value = chi_of_ensemble(c, mixed);
  CapacityResult cap{value, mixed, avg, value, 0.0, lambda, bracketed, lo_res.iterations};
  if (cfg.certify) {
    const Certificate cert = optimality_certificate(c, constraint, mixed, cfg);
    cap.certificate = cert.value;
    cap.certificate_gap = cert.gap;
    cap.converged = bracketed && cert.certified;
  }

  KuhnTuckerResult out{lambda, std::move(cap), 0.0, 0.0, false};
  out.slackness_residual = std::abs(lambda * ((a * avg.matrix()).trace().real() - lin.alpha));
  out.lagrangian_value = solve(lambda).value;
  out.converged = out.capacity.converged && out.slackness_residual <= 1e-6;
  return out;
}

}  // namespace chicap
