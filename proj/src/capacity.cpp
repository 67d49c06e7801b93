#include "chicap/capacity.hpp"

#include "chicap/detail/objective.hpp"
#include "chicap/entropy.hpp"
#include "chicap/errors.hpp"

#include <algorithm>
#include <cmath>

namespace chicap {

namespace {

bool effect_spectrum_ok(const Matrix& a) {
  const RealVector ev = eigenvalues_h(a);
  return ev[0] >= -kPsdTol && ev[ev.size() - 1] <= 1.0 + kPsdTol;
}

}  // namespace

ConstraintSet ConstraintSet::full() { return ConstraintSet(Full{}); }

ConstraintSet ConstraintSet::linear(const Matrix& effect, double alpha) {
  const HermitianOperator a(effect);
  if (!effect_spectrum_ok(a.matrix())) throw InvalidInput("linear constraint: operator is not an effect (0 <= A <= I)");
  if (!(alpha >= -kPsdTol && alpha <= 1.0 + kPsdTol)) throw InvalidInput("linear constraint: alpha outside [0, 1]");
  return ConstraintSet(Linear{a.matrix(), std::clamp(alpha, 0.0, 1.0)});
}

ConstraintSet ConstraintSet::linear_general(const Matrix& a, double alpha) {
  const HermitianOperator h(a);
  if (effect_spectrum_ok(h.matrix()) && alpha >= 0.0 && alpha <= 1.0) return linear(h.matrix(), alpha);
  const double norm = operator_norm_h(h.matrix());
  if (!(norm > 0.0)) throw InvalidInput("linear constraint: zero operator");
  const Matrix scaled = 0.5 * (h.matrix() / norm + identity(h.dim()));
  return linear(scaled, 0.5 * (alpha / norm + 1.0));
}

ConstraintSet ConstraintSet::singleton(const DensityMatrix& rho) { return ConstraintSet(Singleton{rho}); }

ConstraintSet ConstraintSet::marginals(const ConstraintSet& left, const ConstraintSet& right, std::size_t dh,
                                       std::size_t dk) {
  if (dh == 0 || dk == 0) throw InvalidInput("marginal constraint: zero dimension");
  if (std::holds_alternative<Marginals>(left.v_) || std::holds_alternative<Marginals>(right.v_))
    throw Unsupported("marginal constraint: nested marginals are not supported");
  const auto check = [](const ConstraintSet& c, std::size_t d) {
    if (const auto* l = std::get_if<Linear>(&c.v_); l && static_cast<std::size_t>(l->effect.rows()) != d)
      throw InvalidInput("marginal constraint: factor dimension mismatch");
    if (const auto* s = std::get_if<Singleton>(&c.v_); s && s->rho.dim() != d)
      throw InvalidInput("marginal constraint: factor dimension mismatch");
  };
  check(left, dh);
  check(right, dk);
  return ConstraintSet(Marginals{dh, dk, std::make_shared<const ConstraintSet>(left),
                                 std::make_shared<const ConstraintSet>(right)});
}

std::string ConstraintSet::kind() const {
  switch (v_.index()) {
    case 0:
      return "full";
    case 1:
      return "linear";
    case 2:
      return "singleton";
    default:
      return "marginals";
  }
}

double ConstraintSet::violation(const Matrix& rho) const {
  if (std::holds_alternative<Full>(v_)) return 0.0;
  if (const auto* l = std::get_if<Linear>(&v_)) {
    if (l->effect.rows() != rho.rows()) throw InvalidInput("constraint: dimension mismatch");
    return std::max(0.0, (l->effect * rho).trace().real() - l->alpha);
  }
  if (const auto* s = std::get_if<Singleton>(&v_)) {
    if (s->rho.matrix().rows() != rho.rows()) throw InvalidInput("constraint: dimension mismatch");
    return max_abs(rho - s->rho.matrix());
  }
  const auto& m = std::get<Marginals>(v_);
  if (static_cast<std::size_t>(rho.rows()) != m.dh * m.dk) throw InvalidInput("constraint: dimension mismatch");
  return std::max(m.left->violation(partial_trace(rho, m.dh, m.dk, Side::Left)),
                  m.right->violation(partial_trace(rho, m.dh, m.dk, Side::Right)));
}

bool ConstraintSet::contains(const Matrix& rho, double tol) const { return violation(rho) <= tol; }

void OptimizerConfig::validate() const {
  if (restarts < 1 || max_iterations < 1) throw InvalidInput("optimizer config: counts must be >= 1");
  if (!(tol_value > 0.0) || !(tol_certificate > 0.0)) throw InvalidInput("optimizer config: tolerances must be > 0");
}

namespace {

void require_state_dim(std::size_t din, const DensityMatrix& rho, const char* what) {
  if (rho.dim() != din) throw InvalidInput(std::string(what) + ": state dimension does not match the channel input");
}

double output_entropy(const KrausChannel& c, const DensityMatrix& rho) { return entropy(apply(c, rho)); }
double output_entropy(const BlockChannel& c, const DensityMatrix& rho) { return block_entropy(apply_block(c, rho)); }

template <class C>
HatHResult hat_h_impl(const C& c, const DensityMatrix& rho, const OptimizerConfig& cfg) {
  require_state_dim(c.din(), rho, "hat_H");
  CapacityResult r = maximize_over_decompositions(ChiObjectiveSpec::of(c), rho, cfg);
  const double h = output_entropy(c, rho);
  // chi of the witnessing decomposition equals H(Phi(rho)) minus its average output entropy.
  return {std::min(h, h - r.value), std::move(r.ensemble), r.converged};
}

}  // namespace

HatHResult hat_H(const KrausChannel& c, const DensityMatrix& rho, const OptimizerConfig& cfg) {
  return hat_h_impl(c, rho, cfg);
}

HatHResult hat_H(const BlockChannel& c, const DensityMatrix& rho, const OptimizerConfig& cfg) {
  return hat_h_impl(c, rho, cfg);
}

double chi_function(const KrausChannel& c, const DensityMatrix& rho, const OptimizerConfig& cfg) {
  require_state_dim(c.din(), rho, "chi_function");
  return std::max(0.0, maximize_over_decompositions(ChiObjectiveSpec::of(c), rho, cfg).value);
}

double chi_function(const BlockChannel& c, const DensityMatrix& rho, const OptimizerConfig& cfg) {
  require_state_dim(c.din(), rho, "chi_function");
  return std::max(0.0, maximize_over_decompositions(ChiObjectiveSpec::of(c), rho, cfg).value);
}

CapacityResult chi_capacity(const KrausChannel& c, const ConstraintSet& constraint, const OptimizerConfig& cfg) {
  return maximize_objective(ChiObjectiveSpec::of(c), constraint, cfg);
}

CapacityResult chi_capacity(const BlockChannel& c, const ConstraintSet& constraint, const OptimizerConfig& cfg) {
  return maximize_objective(ChiObjectiveSpec::of(c), constraint, cfg);
}

CapacityResult lagrangian_capacity(const KrausChannel& c, const Matrix& effect, double lambda,
                                   const OptimizerConfig& cfg) {
  if (!(lambda >= 0.0)) throw InvalidInput("lagrangian_capacity: lambda must be >= 0");
  const HermitianOperator e(effect);
  if (e.dim() != c.din()) throw InvalidInput("lagrangian_capacity: effect dimension mismatch");
  return maximize_objective(ChiObjectiveSpec::of(c).with_linear(lambda * e.matrix()), ConstraintSet::full(), cfg);
}

CapacityResult maximize_objective(const ChiObjectiveSpec& spec, const ConstraintSet& constraint,
                                  const OptimizerConfig& cfg) {
  cfg.validate();
  const detail::CompiledConstraint cc = detail::compile_constraint(constraint, spec.din);
  if (cc.fixed_average) return maximize_over_decompositions(spec, DensityMatrix(cc.fixed_rho), cfg);

  const detail::ChiObjective obj(spec);
  detail::EngineSolution sol = detail::solve_free(obj, cc, cfg);
  Ensemble ens = detail::make_ensemble(sol.weights, sol.states);
  DensityMatrix avg = average_state(ens);
  const double value = spec.evaluate(ens);
  CapacityResult r{value, ens, avg, value, 0.0, std::nullopt, sol.converged, sol.iterations};
  if (std::holds_alternative<ConstraintSet::Linear>(constraint.variant()))
    r.multiplier = sol.multipliers.mu.empty() ? 0.0 : sol.multipliers.mu.front();
  if (cfg.certify) {
    const Certificate cert = objective_certificate(spec, constraint, r.ensemble, cfg);
    r.certificate = cert.value;
    r.certificate_gap = cert.gap;
    r.converged = cert.certified;
  }
  return r;
}

CapacityResult maximize_over_decompositions(const ChiObjectiveSpec& spec, const DensityMatrix& rho,
                                            const OptimizerConfig& cfg) {
  cfg.validate();
  if (rho.dim() != spec.din) throw InvalidInput("decomposition: state dimension mismatch");
  const detail::ChiObjective obj(spec);
  detail::EngineSolution sol = detail::solve_decomposition(obj, rho.matrix(), cfg);
  Ensemble ens = detail::make_ensemble(sol.weights, sol.states);
  CapacityResult r{sol.value, ens, rho, sol.value, 0.0, std::nullopt, sol.converged, sol.iterations};
  if (cfg.certify) {
    const Certificate cert = objective_certificate(spec, ConstraintSet::singleton(rho), r.ensemble, cfg);
    r.certificate = cert.value;
    r.certificate_gap = cert.gap;
    r.converged = cert.certified;
  }
  return r;
}

double corollary1_check(const KrausChannel& c, const CapacityResult& optimal, const DensityMatrix& rho,
                        const OptimizerConfig& cfg) {
  require_state_dim(c.din(), rho, "corollary1_check");
  const double d = relative_entropy(apply(c, rho), apply(c, optimal.average));
  if (!std::isfinite(d)) return -kInfinity;
  return optimal.value - chi_function(c, rho, cfg) - d;
}

double donald_residual(const KrausChannel& c, const Ensemble& e, const DensityMatrix& reference) {
  if (e.dim() != c.din()) throw InvalidInput("donald_residual: ensemble dimension mismatch");
  require_state_dim(c.din(), reference, "donald_residual");
  const DensityMatrix ref_out = apply(c, reference);
  double lhs = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double d = relative_entropy(apply(c, e.state(i)), ref_out);
    if (!std::isfinite(d)) return kInfinity;
    lhs += e.weight(i) * d;
  }
  const double tail = relative_entropy(apply(c, average_state(e)), ref_out);
  if (!std::isfinite(tail)) return kInfinity;
  return std::abs(lhs - chi_of_ensemble(c, e) - tail);
}

SupportingConstraint find_supporting_constraint(const KrausChannel& c, const DensityMatrix& rho0,
                                                const OptimizerConfig& cfg, double tol) {
  require_state_dim(c.din(), rho0, "find_supporting_constraint");
  const RealVector ev = eigenvalues_h(rho0.matrix());
  if (ev[0] < 1e-6) throw InvalidInput("find_supporting_constraint: rho0 must be full rank (min eigenvalue >= 1e-6)");

  OptimizerConfig inner = cfg;
  inner.certify = false;
  const double chi0 = chi_function(c, rho0, inner);
  const std::size_t d = c.din();
  const double h = 1e-4;
  Matrix g = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (const Matrix& b : traceless_hermitian_basis(d)) {
    // Keep the probe inside the state space when rho0 is close to the boundary.
    const double step = std::min(h, 0.5 * ev[0] / std::max(operator_norm_h(b), 1e-300));
    const double up = chi_function(c, DensityMatrix(rho0.matrix() + step * b), inner);
    const double down = chi_function(c, DensityMatrix(rho0.matrix() - step * b), inner);
    g += ((up - down) / (2.0 * step)) * b;
  }

  SupportingConstraint out;
  out.chi_at_point = chi0;
  const double gnorm = operator_norm_h(g);
  Matrix a;
  double alpha;
  if (gnorm < 1e-6) {
    out.degenerate = true;
    a = 0.5 * identity(d);
    alpha = 0.5;
  } else {
    a = 0.5 * (g / gnorm + identity(d));
    alpha = std::clamp((a * rho0.matrix()).trace().real(), 0.0, 1.0);
  }

  OptimizerConfig check = cfg;
  check.certify = false;
  const double lower = chi_capacity(c, ConstraintSet::linear(a, alpha), check).value;
  out.effect = a;
  out.alpha = alpha;
  out.constrained_capacity = lower;
  if (!out.degenerate) {
    const Matrix a2 = identity(d) - a;
    const double upper = chi_capacity(c, ConstraintSet::linear(a2, 1.0 - alpha), check).value;
    if (std::abs(upper - chi0) < std::abs(lower - chi0)) {
      out.effect = a2;
      out.alpha = 1.0 - alpha;
      out.constrained_capacity = upper;
      out.upper_side = true;
    }
  }
  out.gap = out.constrained_capacity - chi0;
  if (std::abs(out.gap) > tol)
    throw VerificationError("find_supporting_constraint: constrained capacity differs from chi(rho0) "
                            "(chi may be nonsmooth at rho0)",
                            out.gap);
  return out;
}

AlphaProfile f_alpha_profile(const KrausChannel& c, const Matrix& effect, const std::vector<double>& alphas,
                             const OptimizerConfig& cfg, double tol) {
  if (alphas.empty()) throw InvalidInput("f_alpha_profile: empty grid");
  if (!std::is_sorted(alphas.begin(), alphas.end()))
    throw InvalidInput("f_alpha_profile: grid must be increasing");
  AlphaProfile p;
  for (double alpha : alphas) {
    const CapacityResult r = chi_capacity(c, ConstraintSet::linear(effect, alpha), cfg);
    p.points.push_back({alpha, r.value, r.converged});
  }
  p.max_decrease = 0.0;
  p.max_second_difference = -kInfinity;
  for (std::size_t k = 1; k < p.points.size(); ++k)
    p.max_decrease = std::max(p.max_decrease, p.points[k - 1].value - p.points[k].value);
  for (std::size_t k = 1; k + 1 < p.points.size(); ++k) {
    const double left = p.points[k].alpha - p.points[k - 1].alpha;
    const double right = p.points[k + 1].alpha - p.points[k].alpha;
    const double second = (p.points[k + 1].value - p.points[k].value) -
                          (right / left) * (p.points[k].value - p.points[k - 1].value);
    p.max_second_difference = std::max(p.max_second_difference, second);
  }
  if (p.points.size() < 3) p.max_second_difference = 0.0;
  p.nondecreasing = p.max_decrease <= tol;
  p.concave = p.max_second_difference <= tol;
  return p;
}

Matrix tensor_power_constraint(const Matrix& a, int n) {
  if (n < 1) throw InvalidInput("tensor_power_constraint: n must be >= 1");
  const HermitianOperator h(a);
  const std::size_t d = h.dim();
  Matrix out = Matrix::Zero(1, 1);
  std::size_t dim = 1;
  for (int k = 0; k < n; ++k) {
    // Extend the sum on H^(k) by one factor: S (x) I + I^(k) (x) A.
    out = kron(out, identity(d)) + kron(identity(dim), h.matrix());
    dim *= d;
  }
  return out;
}

ConstraintSet tensor_power_linear(const Matrix& a, int n, double alpha) {
  if (n > 2) throw Unsupported("tensor_power_linear: capacity calls support n <= 2");
  return ConstraintSet::linear(tensor_power_constraint(a, n) / static_cast<double>(n), alpha);
}

}  // namespace chicap
