#include "chicap/shor.hpp"

#include "chicap/entropy.hpp"
#include "chicap/errors.hpp"

#include <cmath>

namespace chicap {

IndexedState::IndexedState(std::vector<Matrix> parts) : parts_(std::move(parts)) {
  if (parts_.empty()) throw InvalidInput("IndexedState: no parts");
  const Eigen::Index n = parts_.front().rows();
  double total = 0.0;
  for (auto& p : parts_) {
    if (p.rows() != n || p.cols() != n) throw InvalidInput("IndexedState: parts must share one square dimension");
    if (!all_finite(p) || hermiticity_residual(p) > 1e-10) throw InvalidInput("IndexedState: part is not Hermitian");
    p = hermitian_part(p);
    if (eigenvalues_h(p).minCoeff() < -kPsdTol) throw InvalidInput("IndexedState: part is not positive");
    total += p.trace().real();
  }
  if (std::abs(total - 1.0) > kTraceTol) throw InvalidInput("IndexedState: total trace differs from 1");
}

Matrix IndexedState::total() const {
  Matrix s = Matrix::Zero(parts_.front().rows(), parts_.front().cols());
  for (const auto& p : parts_) s += p;
  return s;
}

ShorExtension::ShorExtension(KrausChannel base, const Matrix& effect, double q, std::size_t d)
    : base_(std::move(base)), q_(q), d_(d) {
  const HermitianOperator e(effect);
  if (e.dim() != base_.din()) throw InvalidInput("ShorExtension: effect dimension mismatch");
  if (!e.is_effect()) throw InvalidInput("ShorExtension: E must satisfy 0 <= E <= I");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidInput("ShorExtension: q outside [0, 1]");
  if (d < 1) throw InvalidInput("ShorExtension: d must be >= 1");
  effect_ = e.matrix();
}

IndexedState delta_embed(const DensityMatrix& sigma, std::size_t j, std::size_t d) {
  if (j < 1 || j > d) throw InvalidInput("delta_embed: index out of range");
  std::vector<Matrix> parts(d, Matrix::Zero(sigma.matrix().rows(), sigma.matrix().cols()));
  parts[j - 1] = sigma.matrix();
  return IndexedState(std::move(parts));
}

BlockState apply_extension(const ShorExtension& x, const IndexedState& rho) {
  if (rho.dim() != x.din()) throw InvalidInput("apply_extension: state dimension mismatch");
  if (rho.d() != x.d()) throw InvalidInput("apply_extension: index count mismatch");
  const Matrix total = rho.total();
  Matrix classical = Matrix::Zero(static_cast<Eigen::Index>(x.d() + 1), static_cast<Eigen::Index>(x.d() + 1));
  classical(0, 0) = (x.effect_complement() * total).trace().real();
  for (std::size_t j = 0; j < x.d(); ++j)
    classical(static_cast<Eigen::Index>(j + 1), static_cast<Eigen::Index>(j + 1)) =
        (x.effect() * rho.parts()[j]).trace().real();
  return BlockState({(1.0 - x.q()) * x.base().map().apply(total), x.q() * classical});
}

CpMap reduced_cp_map(const KrausChannel& psi, const Matrix& a) {
  const HermitianOperator h(a);
  const std::size_t dh = h.dim();
  const Matrix root = sqrt_psd(h.matrix());
  CpMap m;
  m.din = dh * psi.din();
  m.dout = psi.dout();
  for (std::size_t l = 0; l < dh; ++l) {
    const Matrix row = root.row(static_cast<Eigen::Index>(l));
    for (const auto& k : psi.kraus()) m.kraus.push_back(kron(row, k));
  }
  return m;
}

Matrix reduced_map(const KrausChannel& psi, const Matrix& a, const Matrix& sigma) {
  const auto n = static_cast<Eigen::Index>(a.rows() * psi.din());
  if (sigma.rows() != n || sigma.cols() != n) throw InvalidInput("reduced_map: state dimension does not factor");
  return reduced_cp_map(psi, a).apply(sigma);
}

BlockState apply_extension_tensor(const ShorExtension& x, const KrausChannel& psi, const std::vector<Matrix>& sigmas) {
  if (sigmas.size() != x.d()) throw InvalidInput("apply_extension_tensor: index count mismatch");
  const auto n = static_cast<Eigen::Index>(x.din() * psi.din());
  Matrix total = Matrix::Zero(n, n);
  for (const auto& s : sigmas) {
    if (s.rows() != n || s.cols() != n) throw InvalidInput("apply_extension_tensor: state dimension mismatch");
    total += s;
  }
  const CpMap joint = tensor_maps(x.base().map(), psi.map());
  const CpMap on_e = reduced_cp_map(psi, x.effect());
  const CpMap on_perp = reduced_cp_map(psi, x.effect_complement());
  std::vector<Matrix> blocks;
  blocks.push_back((1.0 - x.q()) * joint.apply(total));
  blocks.push_back(x.q() * on_perp.apply(total));
  for (const auto& s : sigmas) blocks.push_back(x.q() * on_e.apply(s));
  return BlockState(std::move(blocks));
}

double f_functional(const KrausChannel& psi, const Matrix& effect, const Ensemble& e) {
  const Matrix perp = identity(static_cast<std::size_t>(effect.rows())) - effect;
  return chi_of_map(reduced_cp_map(psi, effect), e) + chi_of_map(reduced_cp_map(psi, perp), e);
}

ChiObjectiveSpec extension_objective(const ShorExtension& x, const KrausChannel& psi) {
  ChiObjectiveSpec s;
  s.din = x.din() * psi.din();
  const double q = x.q();
  if (q < 1.0) s.terms.push_back({1.0 - q, tensor_maps(x.base().map(), psi.map())});
  if (q > 0.0) {
    s.terms.push_back({q, reduced_cp_map(psi, x.effect())});
    s.terms.push_back({q, reduced_cp_map(psi, x.effect_complement())});
  }
  return s.with_linear(q * std::log2(static_cast<double>(x.d())) * kron(x.effect(), identity(psi.din())));
}

ExtensionChi chi_extension_ensemble(const ShorExtension& x, const KrausChannel& psi, const Ensemble& e) {
  const std::size_t n = x.din() * psi.din();
  if (e.dim() != n) throw InvalidInput("chi_extension_ensemble: ensemble dimension mismatch");
  ExtensionChi out;
  const KrausChannel joint = tensor_channels(x.base(), psi);
  const Matrix avg = average_state(e).matrix();
  out.closed_form = (1.0 - x.q()) * chi_of_ensemble(joint, e) +
                    x.q() * std::log2(static_cast<double>(x.d())) *
                        (kron(x.effect(), identity(psi.din())) * avg).trace().real() +
                    x.q() * f_functional(psi, x.effect(), e);

  // Direct route: every (i, j) member delta_j(sigma_i) with weight mu_i / d, blockwise entropies.
  const auto d = static_cast<double>(x.d());
  const Matrix zero = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<Matrix> avg_parts(x.d(), avg / d);
  const double h_avg = block_entropy(apply_extension_tensor(x, psi, avg_parts));
  double h_members = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (std::size_t j = 0; j < x.d(); ++j) {
      std::vector<Matrix> parts(x.d(), zero);
      parts[j] = e.state(i).matrix();
      h_members += (e.weight(i) / d) * block_entropy(apply_extension_tensor(x, psi, parts));
    }
  }
  out.direct = h_avg - h_members;
  if (std::abs(out.direct - out.closed_form) > 1e-6)
    throw InternalConsistencyError("chi_extension_ensemble: closed form and direct evaluation disagree");
  return out;
}

KrausChannel trivial_channel() { return KrausChannel(1, 1, {Matrix::Ones(1, 1)}); }

namespace {

ConstraintSet joint_constraint(std::size_t dh, std::size_t dk, const ConstraintSet& b) {
  if (b.is_full()) return ConstraintSet::full();
  return ConstraintSet::marginals(ConstraintSet::full(), b, dh, dk);
}

}  // namespace

CapacityResult extension_capacity(const ShorExtension& x, const OptimizerConfig& cfg) {
  return extension_capacity_joint(x, trivial_channel(), ConstraintSet::full(), cfg);
}

CapacityResult extension_capacity_joint(const ShorExtension& x, const KrausChannel& psi, const ConstraintSet& b,
                                        const OptimizerConfig& cfg) {
  return maximize_objective(extension_objective(x, psi), joint_constraint(x.din(), psi.din(), b), cfg);
}

BlockChannel unreduced_extension(const ShorExtension& x) {
  if (x.d() > 2) throw Unsupported("unreduced_extension: only d <= 2 is supported");
  const std::size_t din = x.din();
  const std::size_t d = x.d();
  const Matrix id_d = identity(d);
  std::vector<Matrix> k0;
  for (const auto& k : x.base().kraus())
    for (std::size_t j = 0; j < d; ++j) k0.push_back(kron(k, id_d.row(static_cast<Eigen::Index>(j))));
  const Matrix root_e = sqrt_psd(x.effect());
  const Matrix root_perp = sqrt_psd(x.effect_complement());
  const Matrix id_out = identity(d + 1);
  std::vector<Matrix> k1;
  for (std::size_t l = 0; l < din; ++l) {
    for (std::size_t j = 0; j < d; ++j) {
      const Matrix bra_j = id_d.row(static_cast<Eigen::Index>(j));
      k1.push_back(id_out.col(0) * kron(root_perp.row(static_cast<Eigen::Index>(l)), bra_j));
      k1.push_back(id_out.col(static_cast<Eigen::Index>(j + 1)) * kron(root_e.row(static_cast<Eigen::Index>(l)), bra_j));
    }
  }
  std::vector<BlockChannel::Component> comps;
  comps.push_back({1.0 - x.q(), KrausChannel(din * d, x.base().dout(), std::move(k0))});
  comps.push_back({x.q(), KrausChannel(din * d, d + 1, std::move(k1))});
  return BlockChannel(std::move(comps));
}

CapacityResult extension_capacity_unreduced(const ShorExtension& x, const OptimizerConfig& cfg) {
  return chi_capacity(unreduced_extension(x), ConstraintSet::full(), cfg);
}

Prop3Report prop3_check(const KrausChannel& phi, const KrausChannel& psi, const Matrix& effect, double q,
                        std::size_t d, const ConstraintSet& b, const OptimizerConfig& cfg, double slack) {
  const ShorExtension x(phi, effect, q, d);
  const CapacityResult lhs = extension_capacity_joint(x, psi, b, cfg);

  ChiObjectiveSpec rhs_spec;
  rhs_spec.din = phi.din() * psi.din();
  if (q < 1.0) rhs_spec.terms.push_back({1.0 - q, tensor_maps(phi.map(), psi.map())});
  rhs_spec = rhs_spec.with_linear(q * std::log2(static_cast<double>(d)) * kron(x.effect(), identity(psi.din())));
  const CapacityResult rhs = maximize_objective(rhs_spec, joint_constraint(phi.din(), psi.din(), b), cfg);

  Prop3Report r;
  r.lhs = lhs.value;
  r.rhs = rhs.value;
  r.deviation = std::abs(lhs.value - rhs.value);
  r.bound = q * (std::log2(static_cast<double>(psi.dout())) + 1.0);
  r.slack = slack;
  r.pass = r.deviation <= r.bound + slack;
  r.converged = lhs.converged && rhs.converged;
  return r;
}

CapacityResult lagrangian_joint_max(const KrausChannel& phi, const KrausChannel& psi, const Matrix& effect,
                                    double lambda, const ConstraintSet& b, const OptimizerConfig& cfg) {
  if (!(lambda >= 0.0)) throw InvalidInput("lagrangian_joint_max: lambda must be >= 0");
  const HermitianOperator e(effect);
  if (e.dim() != phi.din()) throw InvalidInput("lagrangian_joint_max: effect dimension mismatch");
  const ChiObjectiveSpec spec =
      ChiObjectiveSpec::of(tensor_channels(phi, psi)).with_linear(lambda * kron(e.matrix(), identity(psi.din())));
  return maximize_objective(spec, joint_constraint(phi.din(), psi.din(), b), cfg);
}

}  // namespace chicap
