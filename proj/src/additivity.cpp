#include "chicap/additivity.hpp"

#include "chicap/entropy.hpp"
#include "chicap/errors.hpp"
#include "chicap/random.hpp"

#include <algorithm>
#include <cmath>

namespace chicap {

namespace {

struct Solve {
  double value;
  bool converged;
};

Solve chi_fn(const ChiObjectiveSpec& spec, const DensityMatrix& rho, const OptimizerConfig& cfg) {
  const CapacityResult r = maximize_over_decompositions(spec, rho, cfg);
  return {std::max(0.0, r.value), r.converged};
}

void require_factor(const KrausChannel& phi, const KrausChannel& psi, const DensityMatrix& sigma, const char* what) {
  if (sigma.dim() != phi.din() * psi.din())
    throw InvalidInput(std::string(what) + ": state dimension does not factor as din(Phi) * din(Psi)");
}

bool is_unitary(const KrausChannel& c) {
  if (c.din() != c.dout() || c.kraus().size() != 1) return false;
  const Matrix& u = c.kraus().front();
  return max_abs(u.adjoint() * u - identity(c.din())) <= 1e-10;
}

GapReport make_report(std::string quantity, double lhs, double rhs, double tol, std::uint64_t seed) {
  GapReport r;
  r.quantity = std::move(quantity);
  r.lhs = lhs;
  r.rhs = rhs;
  r.gap = rhs - lhs;
  r.tolerance = tol;
  r.pass = r.gap >= -tol;
  r.seed = seed;
  return r;
}

BlockChannel direct_sum_with_identity(const KrausChannel& phi0, double q) {
  return BlockChannel({{q, noiseless(phi0.din())}, {1.0 - q, phi0}});
}

Matrix random_hermitian(std::size_t d, Rng& rng) { return hermitian_part(random_ginibre(d, d, rng)); }

}  // namespace

bool subadditivity_proven(const KrausChannel& phi, const KrausChannel& psi) {
  return phi.is_entanglement_breaking() || psi.is_entanglement_breaking() || is_unitary(phi) || is_unitary(psi);
}

GapReport subadditivity_gap(const KrausChannel& phi, const KrausChannel& psi, const DensityMatrix& sigma,
                            const OptimizerConfig& cfg, double tol) {
  require_factor(phi, psi, sigma, "subadditivity_gap");
  const std::size_t dh = phi.din();
  const std::size_t dk = psi.din();
  const Solve joint = chi_fn(ChiObjectiveSpec::of(tensor_channels(phi, psi)), sigma, cfg);
  const Solve left = chi_fn(ChiObjectiveSpec::of(phi), partial_trace(sigma, dh, dk, Side::Left), cfg);
  const Solve right = chi_fn(ChiObjectiveSpec::of(psi), partial_trace(sigma, dh, dk, Side::Right), cfg);

  GapReport r = make_report("subadditivity", joint.value, left.value + right.value, tol, cfg.seed);
  r.proven = subadditivity_proven(phi, psi);
  r.converged = joint.converged && left.converged && right.converged;
  r.state = sigma.matrix();
  r.details = {{"chi_joint", joint.value}, {"chi_left", left.value}, {"chi_right", right.value}};
  return r;
}

GapReport hatH_superadditivity_gap(const KrausChannel& phi, const KrausChannel& psi, const DensityMatrix& sigma,
                                   const OptimizerConfig& cfg, double tol) {
  require_factor(phi, psi, sigma, "hatH_superadditivity_gap");
  const std::size_t dh = phi.din();
  const std::size_t dk = psi.din();
  const HatHResult joint = hat_H(tensor_channels(phi, psi), sigma, cfg);
  const HatHResult left = hat_H(phi, partial_trace(sigma, dh, dk, Side::Left), cfg);
  const HatHResult right = hat_H(psi, partial_trace(sigma, dh, dk, Side::Right), cfg);

  GapReport r = make_report("hatH_superadditivity", left.value + right.value, joint.value, tol, cfg.seed);
  r.proven = subadditivity_proven(phi, psi);
  r.converged = joint.converged && left.converged && right.converged;
  r.state = sigma.matrix();
  r.details = {{"hatH_joint", joint.value}, {"hatH_left", left.value}, {"hatH_right", right.value}};
  return r;
}

EquivalenceProbe equivalence_probe(const KrausChannel& phi, const KrausChannel& psi, const DensityMatrix& sigma,
                             const OptimizerConfig& cfg, double tol) {
  EquivalenceProbe p{subadditivity_gap(phi, psi, sigma, cfg, tol), hatH_superadditivity_gap(phi, psi, sigma, cfg, tol),
                  true};
  p.consistent = !p.superadditivity.pass || p.subadditivity.pass;
  return p;
}

GapReport constrained_additivity_gap(const KrausChannel& phi, const ConstraintSet& a, const KrausChannel& psi,
                                     const ConstraintSet& b, const OptimizerConfig& cfg, double tol) {
  const CapacityResult left = chi_capacity(phi, a, cfg);
  const CapacityResult right = chi_capacity(psi, b, cfg);
  const CapacityResult joint =
      chi_capacity(tensor_channels(phi, psi), ConstraintSet::marginals(a, b, phi.din(), psi.din()), cfg);

  GapReport r = make_report("constrained_additivity", joint.value, left.value + right.value, tol, cfg.seed);
  r.proven = subadditivity_proven(phi, psi);
  r.converged = joint.converged && left.converged && right.converged;
  r.state = joint.average.matrix();
  // Product ensembles are feasible for the joint problem, so gap <= 2 tol up to solver error.
  r.details = {{"capacity_joint", joint.value},
               {"capacity_left", left.value},
               {"capacity_right", right.value},
               {"trivial_direction_ok", r.gap <= 2.0 * tol ? 1.0 : 0.0}};
  return r;
}

GapReport prop2_noiseless_check(const KrausChannel& psi, const DensityMatrix& rho, const DensityMatrix& omega,
                                const OptimizerConfig& cfg, double tol) {
  if (omega.dim() != psi.din()) throw InvalidInput("prop2_noiseless_check: omega dimension mismatch");
  const std::size_t dh = rho.dim();
  const CapacityResult joint =
      chi_capacity(tensor_channels(noiseless(dh), psi),
                   ConstraintSet::marginals(ConstraintSet::singleton(rho), ConstraintSet::singleton(omega), dh,
                                            psi.din()),
                   cfg);
  const Solve chi_psi = chi_fn(ChiObjectiveSpec::of(psi), omega, cfg);
  const double h = entropy(rho);

  GapReport r = make_report("prop2_noiseless", joint.value, h + chi_psi.value, tol, cfg.seed);
  r.proven = true;
  r.pass = std::abs(r.gap) <= tol;
  r.converged = joint.converged && chi_psi.converged;
  r.state = joint.average.matrix();
  r.details = {{"entropy_rho", h}, {"chi_psi_omega", chi_psi.value}};
  return r;
}

GapReport prop2_directsum_check(const KrausChannel& phi0, const KrausChannel& psi, double q,
                                const DensityMatrix& sigma, const OptimizerConfig& cfg, double tol) {
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidInput("prop2_directsum_check: q must lie in [0, 1]");
  require_factor(phi0, psi, sigma, "prop2_directsum_check");
  const std::size_t dh = phi0.din();
  const std::size_t dk = psi.din();
  const DensityMatrix s_phi = partial_trace(sigma, dh, dk, Side::Left);
  const DensityMatrix s_psi = partial_trace(sigma, dh, dk, Side::Right);
  const BlockChannel phi_q = direct_sum_with_identity(phi0, q);

  const Solve l1 = chi_fn(ChiObjectiveSpec::of(tensor_block(phi_q, psi)), sigma, cfg);
  const Solve id_psi = chi_fn(ChiObjectiveSpec::of(tensor_channels(noiseless(dh), psi)), sigma, cfg);
  const Solve phi0_psi = chi_fn(ChiObjectiveSpec::of(tensor_channels(phi0, psi)), sigma, cfg);
  const Solve chi_phi0 = chi_fn(ChiObjectiveSpec::of(phi0), s_phi, cfg);
  const Solve chi_psi = chi_fn(ChiObjectiveSpec::of(psi), s_psi, cfg);
  const Solve chi_phiq = chi_fn(ChiObjectiveSpec::of(phi_q), s_phi, cfg);
  const double h = entropy(s_phi);

  const double line1 = l1.value;
  const double line2 = q * id_psi.value + (1.0 - q) * phi0_psi.value;
  const double line3 = q * h + q * chi_psi.value + (1.0 - q) * chi_phi0.value + (1.0 - q) * chi_psi.value;
  const double line4 = q * h + (1.0 - q) * chi_phi0.value + chi_psi.value;
  const double line5 = chi_phiq.value + chi_psi.value;

  GapReport r = make_report("prop2_directsum", line1, line5, tol, cfg.seed);
  r.proven = true;
  const double worst_step = std::min({line2 - line1, line3 - line2});
  const double worst_equality = std::max(std::abs(line4 - line3), std::abs(line5 - line4));
  r.pass = worst_step >= -tol && worst_equality <= tol && r.gap >= -tol;
  r.converged = l1.converged && id_psi.converged && phi0_psi.converged && chi_phi0.converged && chi_psi.converged &&
                chi_phiq.converged;
  r.state = sigma.matrix();
  r.details = {{"q", q},         {"L1", line1},         {"L2", line2},
               {"L3", line3},    {"L4", line4},         {"L5", line5},
               {"worst_step", worst_step}, {"worst_equality", worst_equality}};
  return r;
}

GapReport weak_additivity_check(const KrausChannel& phi, const Matrix& a, const KrausChannel& psi, const Matrix& b,
                                double gamma, int grid_n, const OptimizerConfig& cfg, double tol) {
  if (grid_n < 2) throw InvalidInput("weak_additivity_check: grid_n must be at least 2");
  if (!HermitianOperator(a).is_effect() || !HermitianOperator(b).is_effect())
    throw InvalidInput("weak_additivity_check: A and B must be effects");
  const double a_min = eigenvalues_h(a).minCoeff();
  const double b_min = eigenvalues_h(b).minCoeff();
  if (!(gamma >= a_min + b_min - 1e-10) || !(gamma <= 2.0 + 1e-10))
    throw InvalidInput("weak_additivity_check: gamma is infeasible for the joint constraint");

  const std::size_t dh = phi.din();
  const std::size_t dk = psi.din();
  const Matrix joint_op = 0.5 * (kron(a, identity(dk)) + kron(identity(dh), b));
  const CapacityResult joint =
      chi_capacity(tensor_channels(phi, psi), ConstraintSet::linear(joint_op, std::min(1.0, 0.5 * gamma)), cfg);

  const double lo = std::max(a_min, gamma - 1.0);
  const double hi = std::min(1.0, gamma - b_min);
  const double step = (hi - lo) / (grid_n - 1);
  double best = -kInfinity;
  double best_alpha = lo;
  double centre_value = -kInfinity;
  double centre_distance = kInfinity;
  bool converged = joint.converged;
  for (int k = 0; k < grid_n; ++k) {
    const double alpha = k + 1 == grid_n ? hi : lo + k * step;
    const double beta = std::clamp(gamma - alpha, b_min, 1.0);
    const CapacityResult ca = chi_capacity(phi, ConstraintSet::linear(a, std::clamp(alpha, a_min, 1.0)), cfg);
    const CapacityResult cb = chi_capacity(psi, ConstraintSet::linear(b, beta), cfg);
    converged = converged && ca.converged && cb.converged;
    const double v = ca.value + cb.value;
    if (v > best) {
      best = v;
      best_alpha = alpha;
    }
    if (std::abs(alpha - 0.5 * gamma) < centre_distance) {
      centre_distance = std::abs(alpha - 0.5 * gamma);
      centre_value = v;
    }
  }

  GapReport r = make_report("weak_additivity", joint.value, best, tol, cfg.seed);
  r.converged = converged;
  r.state = joint.average.matrix();
  r.details = {{"gamma", gamma}, {"alpha_star", best_alpha}, {"grid_spacing", step}};
  const bool symmetric = dh == dk && max_abs(a - b) <= 1e-12 && phi.kraus().size() == psi.kraus().size() &&
                         std::equal(phi.kraus().begin(), phi.kraus().end(), psi.kraus().begin(),
                                    [](const Matrix& x, const Matrix& y) { return max_abs(x - y) <= 1e-12; });
  if (symmetric) {
    // Concavity of alpha -> C(Phi; A, alpha) puts the best split at alpha = beta = gamma / 2.
    const bool ok = centre_value >= best - tol;
    r.details.emplace_back("symmetric_split_ok", ok ? 1.0 : 0.0);
    r.pass = r.pass && ok;
  }
  return r;
}

double glo_check(const DensityMatrix& sigma, std::size_t dh, std::size_t dk, const Matrix& basis) {
  double avg = 0.0;
  for (const Posterior& p : measurement_posteriors(sigma, dh, dk, basis)) avg += p.probability * entropy(p.state);
  return entropy(sigma) - avg;
}

GapReport violation_search(const KrausChannel& phi, const KrausChannel& psi, const SearchOptions& opts,
                           const OptimizerConfig& cfg, double tol) {
  if (opts.budget < 1) throw InvalidInput("violation_search: budget must be at least 1");
  if (opts.refine_steps < 0) throw InvalidInput("violation_search: refine_steps must be nonnegative");
  const std::size_t dh = phi.din();
  const std::size_t dk = psi.din();
  const std::size_t d = dh * dk;

  std::optional<GapReport> best;
  for (int k = 0; k < opts.budget; ++k) {
    const std::uint64_t s = derive_seed(cfg.seed, static_cast<std::uint64_t>(k));
    Rng rng(s);
    const std::size_t rank = 1 + static_cast<std::size_t>(rng() % d);
    const DensityMatrix sigma = random_bipartite_state(dh, dk, rank, opts.bias, s);
    GapReport r = subadditivity_gap(phi, psi, sigma, cfg, tol);
    if (!best || r.gap < best->gap) best = std::move(r);
  }

  // Random walk sigma -> U sigma U^dagger with U = exp(i eps H), shrinking eps on rejection.
  Rng rng(derive_seed(cfg.seed, 0x5ea7c4ULL));
  double eps = 0.3;
  for (int step = 0; step < opts.refine_steps; ++step) {
    const Spectrum sp = eigh(random_hermitian(d, rng));
    Vector phases(sp.values.size());
    for (Eigen::Index i = 0; i < sp.values.size(); ++i) phases[i] = std::polar(1.0, eps * sp.values[i]);
    const Matrix u = sp.vectors * phases.asDiagonal() * sp.vectors.adjoint();
    const DensityMatrix trial(hermitian_part(u * *best->state * u.adjoint()));
    GapReport r = subadditivity_gap(phi, psi, trial, cfg, tol);
    if (r.gap < best->gap)
      best = std::move(r);
    else
      eps *= 0.7;
  }
  best->quantity = "subadditivity_search";
  best->seed = cfg.seed;
  best->details.emplace_back("budget", opts.budget);
  best->details.emplace_back("refine_steps", opts.refine_steps);
  return *best;
}

}  // namespace chicap
