#include "chicap/capacity.hpp"

#include "chicap/detail/objective.hpp"
#include "chicap/detail/optimizer.hpp"
#include "chicap/entropy.hpp"
#include "chicap/errors.hpp"
#include "chicap/random.hpp"

#include <algorithm>
#include <cmath>

namespace chicap {

namespace {

std::vector<Vector> member_directions(const Ensemble& e) {
  std::vector<Vector> out;
  for (const auto& s : e.states()) {
    const Spectrum sp = eigh(s.matrix());
    out.push_back(sp.vectors.col(sp.values.size() - 1));
  }
  return out;
}

struct DualContext {
  const ChiObjectiveSpec& spec;
  const Matrix& average;
  const Matrix& subspace;
  std::vector<Vector> starts;
  int random_starts;
  std::uint64_t seed;
  int max_iterations;

  // max over pure omega of phi(omega) - Tr(X omega); remembers the maximizer as a warm start.
  detail::SphereSearchResult inner(const Matrix& x) {
    const detail::DivergenceObjective obj(spec, average, -x);
    detail::SphereSearchResult r =
        detail::maximize_on_sphere(obj, subspace, starts, random_starts, seed, max_iterations);
    starts.insert(starts.begin(), r.psi);
    if (starts.size() > 12) starts.resize(12);
    return r;
  }
};

// min over lambda >= 0 of lambda alpha + max_omega [phi(omega) - lambda Tr(A omega)].
double linear_dual(DualContext& ctx, const Matrix& a, double alpha, bool& converged) {
  const auto tr_a = [&](const Vector& psi) { return psi.dot(a * psi).real(); };
  const auto h = [&](double lambda, double& slope) {
    const detail::SphereSearchResult r = ctx.inner(lambda * a);
    slope = alpha - tr_a(r.psi);
    return lambda * alpha + r.value;
  };
  double slope = 0.0;
  double best = h(0.0, slope);
  if (slope >= 0.0) return best;

  double lo = 0.0;
  double hi = 1.0;
  double v = h(hi, slope);
  best = std::min(best, v);
  while (slope < 0.0) {
    if (hi > 1e8) {
      converged = false;
      return best;
    }
    lo = hi;
    hi *= 2.0;
    v = h(hi, slope);
    best = std::min(best, v);
  }
  for (int it = 0; it < 60 && hi - lo > 1e-10 * (1.0 + hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    v = h(mid, slope);
    best = std::min(best, v);
    (slope < 0.0 ? lo : hi) = mid;
  }
  return best;
}

// Generic dual for marginal constraints: inequality multipliers mu_k = z_k^2 and equality multipliers
// expanded in a traceless Hermitian basis of the constrained factor.
double marginal_dual(DualContext& ctx, const detail::CompiledConstraint& cc, const Ensemble& candidate) {
  struct Direction {
    Matrix op;      // full-space operator multiplying the parameter
    double offset;  // constant term of the dual per unit parameter
    bool squared;   // inequality multiplier
  };
  std::vector<Direction> dirs;
  for (const auto& f : cc.inequalities) dirs.push_back({f.op, f.bound, true});
  for (const auto& e : cc.equalities) {
    for (const Matrix& b : traceless_hermitian_basis(static_cast<std::size_t>(e.target.rows())))
      dirs.push_back({cc.lift(b, e.keep), (b * e.target).trace().real(), false});
  }
  const auto n = static_cast<Eigen::Index>(dirs.size());

  // Initial multipliers from first-order stationarity at the candidate members:
  // (I - psi psi^dagger)(grad phi(psi) - X psi) = 0, linear in the multipliers.
  const detail::DivergenceObjective plain(ctx.spec, ctx.average, Matrix());
  const auto d = static_cast<Eigen::Index>(ctx.spec.din);
  std::vector<RealVector> rows_re;
  std::vector<double> rhs;
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    const Spectrum sp = eigh(candidate.state(i).matrix());
    const Vector psi = sp.vectors.col(sp.values.size() - 1);
    Vector g;
    plain.evaluate(psi, &g);
    const Matrix proj = Matrix::Identity(d, d) - psi * psi.adjoint();
    const double w = std::sqrt(candidate.weight(i));
    const Vector target = w * proj * g;
    Matrix cols(d, n);
    for (Eigen::Index k = 0; k < n; ++k) cols.col(k) = w * proj * dirs[static_cast<std::size_t>(k)].op * psi;
    for (Eigen::Index r = 0; r < d; ++r) {
      RealVector re(n);
      RealVector im(n);
      for (Eigen::Index k = 0; k < n; ++k) {
        re[k] = cols(r, k).real();
        im[k] = cols(r, k).imag();
      }
      rows_re.push_back(re);
      rhs.push_back(target[r].real());
      rows_re.push_back(im);
      rhs.push_back(target[r].imag());
    }
  }
  Eigen::MatrixXd a(static_cast<Eigen::Index>(rows_re.size()), n);
  Eigen::VectorXd b(static_cast<Eigen::Index>(rhs.size()));
  for (std::size_t r = 0; r < rows_re.size(); ++r) {
    a.row(static_cast<Eigen::Index>(r)) = rows_re[r].transpose();
    b[static_cast<Eigen::Index>(r)] = rhs[r];
  }
  Eigen::VectorXd y0 = a.completeOrthogonalDecomposition().solve(b);
  RealVector z0(n);
  for (Eigen::Index k = 0; k < n; ++k)
    z0[k] = dirs[static_cast<std::size_t>(k)].squared ? std::sqrt(std::max(0.0, y0[k])) : y0[k];

  const auto dual = [&](const RealVector& z) {
    Matrix x = Matrix::Zero(d, d);
    double constant = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto& dir = dirs[static_cast<std::size_t>(k)];
      const double m = dir.squared ? z[k] * z[k] : z[k];
      x += m * dir.op;
      constant += m * dir.offset;
    }
    return constant + ctx.inner(x).value;
  };
  const double start = dual(z0);
  const detail::SimplexResult nm = detail::nelder_mead_minimize(dual, z0, 1e-2 * (1.0 + z0.norm()), 60 * static_cast<int>(n + 1), 1e-8);
  return std::min(start, nm.value);
}

}  // namespace

Certificate objective_certificate(const ChiObjectiveSpec& spec, const ConstraintSet& constraint,
                                  const Ensemble& candidate, const OptimizerConfig& cfg) {
  cfg.validate();
  if (candidate.dim() != spec.din) throw InvalidInput("certificate: candidate dimension mismatch");
  const Matrix avg = average_state(candidate).matrix();
  if (constraint.violation(avg) > 1e-8) throw InvalidInput("certificate: candidate average is outside the constraint set");
  const double f = spec.evaluate(candidate);
  const detail::CompiledConstraint cc = detail::compile_constraint(constraint, spec.din);

  Certificate cert;
  if (cc.fixed_average) {
    // Over decompositions of a fixed average the divergence sum equals the objective itself,
    // so the supremum is an independent rerun of the decomposition search.
    OptimizerConfig rerun = cfg;
    rerun.certify = false;
    rerun.seed = derive_seed(cfg.seed, 0x5eedULL);
    const CapacityResult r = maximize_over_decompositions(spec, DensityMatrix(cc.fixed_rho), rerun);
    cert.value = std::max(f, r.value);
  } else {
    const detail::DivergenceObjective plain(spec, avg, Matrix());
    const Matrix vs = plain.support_compatible_subspace(cc.subspace);
    if (vs.cols() < cc.subspace.cols()) {
      // Some admissible input leaves the support of the average output: the supremum is infinite.
      cert.value = kInfinity;
      cert.gap = kInfinity;
      cert.support_violation = true;
      cert.certified = false;
      return cert;
    }
    DualContext ctx{spec, avg, vs, member_directions(candidate), std::max(4, cfg.restarts),
                    derive_seed(cfg.seed, 0xce47ULL), cfg.max_iterations};
    if (!cc.has_functionals()) {
      cert.value = ctx.inner(Matrix::Zero(avg.rows(), avg.cols())).value;
    } else if (cc.equalities.empty() && cc.inequalities.size() == 1) {
      cert.value = linear_dual(ctx, cc.inequalities[0].op, cc.inequalities[0].bound, cert.converged);
    } else {
      cert.value = marginal_dual(ctx, cc, candidate);
    }
  }
  cert.gap = cert.value - f;
  cert.certified = cert.converged && cert.gap <= cfg.tol_certificate;
  return cert;
}

Certificate optimality_certificate(const KrausChannel& c, const ConstraintSet& constraint, const Ensemble& candidate,
                                   const OptimizerConfig& cfg) {
  return objective_certificate(ChiObjectiveSpec::of(c), constraint, candidate, cfg);
}

}  // namespace chicap
