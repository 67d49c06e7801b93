#include "chicap/channel.hpp"

#include "chicap/entropy.hpp"
#include "chicap/errors.hpp"
#include "chicap/random.hpp"

#include <cmath>
#include <numbers>

namespace chicap {

Matrix CpMap::apply(const Matrix& x) const {
  Matrix y = Matrix::Zero(static_cast<Eigen::Index>(dout), static_cast<Eigen::Index>(dout));
  for (const auto& k : kraus) y.noalias() += k * x * k.adjoint();
  return y;
}

Matrix CpMap::adjoint_apply(const Matrix& y) const {
  Matrix x = Matrix::Zero(static_cast<Eigen::Index>(din), static_cast<Eigen::Index>(din));
  for (const auto& k : kraus) x.noalias() += k.adjoint() * y * k;
  return x;
}

ChannelDiagnostics validate_channel(std::size_t din, std::size_t dout, const std::vector<Matrix>& kraus) {
  ChannelDiagnostics d;
  d.din = din;
  d.dout = dout;
  d.kraus_rank = kraus.size();
  Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(din), static_cast<Eigen::Index>(din));
  for (const auto& k : kraus) {
    if (k.rows() != static_cast<Eigen::Index>(dout) || k.cols() != static_cast<Eigen::Index>(din)) {
      d.completeness_residual = kInfinity;
      return d;
    }
    sum += k.adjoint() * k;
  }
  d.completeness_residual = kraus.empty() ? kInfinity : max_abs(sum - identity(din));
  d.trace_preserving = d.completeness_residual <= 1e-10;
  return d;
}

ChannelDiagnostics validate_channel(const KrausChannel& c) { return validate_channel(c.din(), c.dout(), c.kraus()); }

KrausChannel::KrausChannel(std::size_t din, std::size_t dout, std::vector<Matrix> kraus) {
  if (din == 0 || dout == 0) throw InvalidInput("KrausChannel: dimensions must be positive");
  for (const auto& k : kraus)
    if (!all_finite(k)) throw InvalidInput("KrausChannel: non-finite Kraus entry");
  const ChannelDiagnostics diag = validate_channel(din, dout, kraus);
  if (!std::isfinite(diag.completeness_residual))
    throw InvalidInput("KrausChannel: Kraus operators missing or of wrong shape");
  if (!diag.trace_preserving)
    throw InvalidInput("KrausChannel: Kraus operators are not complete (sum K^dagger K != I)");
  map_ = CpMap{din, dout, std::move(kraus)};
}

KrausChannel KrausChannel::with_measure_prepare(MeasurePrepare mp) const {
  KrausChannel out = *this;
  out.measure_prepare_ = std::move(mp);
  return out;
}

BlockChannel::BlockChannel(std::vector<Component> components) : components_(std::move(components)) {
  if (components_.empty()) throw InvalidInput("BlockChannel: no components");
  double total = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight >= 0.0)) throw InvalidInput("BlockChannel: weights must be nonnegative");
    if (c.channel.din() != components_.front().channel.din())
      throw InvalidInput("BlockChannel: components must share the input dimension");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidInput("BlockChannel: weights must sum to 1");
}

BlockChannel BlockChannel::single(const KrausChannel& c) { return BlockChannel({{1.0, c}}); }

std::vector<std::size_t> BlockChannel::output_layout() const {
  std::vector<std::size_t> layout;
  for (const auto& c : components_) layout.push_back(c.channel.dout());
  return layout;
}

DensityMatrix apply(const KrausChannel& c, const DensityMatrix& rho) {
  if (rho.dim() != c.din()) throw InvalidInput("apply: state dimension does not match channel input");
  return DensityMatrix(hermitian_part(c.map().apply(rho.matrix())));
}

BlockState apply_block(const BlockChannel& c, const DensityMatrix& rho) {
  if (rho.dim() != c.din()) throw InvalidInput("apply_block: state dimension does not match channel input");
  std::vector<Matrix> blocks;
  for (const auto& comp : c.components()) blocks.push_back(comp.weight * hermitian_part(comp.channel.map().apply(rho.matrix())));
  return BlockState(std::move(blocks));
}

KrausChannel noiseless(std::size_t d) {
  if (d < 1) throw InvalidInput("noiseless: dimension must be positive");
  return KrausChannel(d, d, {identity(d)});
}

KrausChannel depolarizing(double p, std::size_t d) {
  if (d < 2) throw InvalidInput("depolarizing: dimension must be at least 2");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("depolarizing: p outside [0, 1]");
  const auto n = static_cast<Eigen::Index>(d);
  // Weyl operators X^a Z^b form a unitary error basis: (1/d^2) sum W rho W^dagger = Tr(rho) I/d.
  Matrix shift = Matrix::Zero(n, n);
  Matrix clock = Matrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    shift((k + 1) % n, k) = 1.0;
    clock(k, k) = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(d));
  }
  const double dd = static_cast<double>(d * d);
  std::vector<Matrix> kraus;
  kraus.push_back(std::sqrt(1.0 - p + p / dd) * identity(d));
  if (p > 0.0) {
    Matrix xa = identity(d);
    for (std::size_t a = 0; a < d; ++a) {
      Matrix zb = identity(d);
      for (std::size_t b = 0; b < d; ++b) {
        if (a != 0 || b != 0) kraus.push_back(std::sqrt(p / dd) * xa * zb);
        zb = zb * clock;
      }
      xa = xa * shift;
    }
  }
  return KrausChannel(d, d, std::move(kraus));
}

KrausChannel completely_depolarizing(std::size_t d) {
  if (d < 2) throw InvalidInput("completely_depolarizing: dimension must be at least 2");
  std::vector<Matrix> kraus;
  const double c = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      Matrix k = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c;
      kraus.push_back(k);
    }
  return KrausChannel(d, d, std::move(kraus));
}

KrausChannel constant_channel(std::size_t din, const DensityMatrix& omega) {
  if (din == 0) throw InvalidInput("constant_channel: dimension must be positive");
  const Spectrum s = eigh(omega.matrix());
  std::vector<Matrix> kraus;
  const auto n = static_cast<Eigen::Index>(din);
  for (Eigen::Index b = 0; b < s.values.size(); ++b) {
    if (s.values[b] <= kEigenFloor) continue;
    for (Eigen::Index a = 0; a < n; ++a) {
      Vector e = Vector::Zero(n);
      e[a] = 1.0;
      kraus.push_back(std::sqrt(s.values[b]) * s.vectors.col(b) * e.adjoint());
    }
  }
  // Renormalize away eigenvalues dropped by the floor.
  double total = 0.0;
  for (Eigen::Index b = 0; b < s.values.size(); ++b)
    if (s.values[b] > kEigenFloor) total += s.values[b];
  for (auto& k : kraus) k /= std::sqrt(total);
  return KrausChannel(din, omega.dim(), std::move(kraus)).with_measure_prepare({{identity(din)}, {omega}});
}

KrausChannel entanglement_breaking(const std::vector<HermitianOperator>& povm,
                                   const std::vector<DensityMatrix>& outputs) {
  if (povm.empty() || povm.size() != outputs.size())
    throw InvalidInput("entanglement_breaking: need matching non-empty POVM and outputs");
  const std::size_t din = povm.front().dim();
  const std::size_t dout = outputs.front().dim();
  Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(din), static_cast<Eigen::Index>(din));
  for (std::size_t k = 0; k < povm.size(); ++k) {
    if (povm[k].dim() != din || outputs[k].dim() != dout)
      throw InvalidInput("entanglement_breaking: inconsistent dimensions");
    if (povm[k].eigenvalues().minCoeff() < -kPsdTol) throw InvalidInput("entanglement_breaking: effect is not positive");
    sum += povm[k].matrix();
  }
  if (max_abs(sum - identity(din)) > 1e-10) throw InvalidInput("entanglement_breaking: POVM is not complete");

  std::vector<Matrix> kraus;
  MeasurePrepare mp;
  for (std::size_t k = 0; k < povm.size(); ++k) {
    const Spectrum m = eigh(povm[k].matrix());
    const Spectrum s = eigh(outputs[k].matrix());
    for (Eigen::Index a = 0; a < m.values.size(); ++a) {
      if (m.values[a] <= kEigenFloor) continue;
      for (Eigen::Index b = 0; b < s.values.size(); ++b) {
        if (s.values[b] <= kEigenFloor) continue;
        kraus.push_back(std::sqrt(m.values[a] * s.values[b]) * s.vectors.col(b) * m.vectors.col(a).adjoint());
      }
    }
    mp.povm.push_back(povm[k].matrix());
    mp.outputs.push_back(outputs[k]);
  }
  return KrausChannel(din, dout, std::move(kraus)).with_measure_prepare(std::move(mp));
}

BlockChannel erasure(double q, std::size_t d) {
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidInput("erasure: q outside [0, 1]");
  const DensityMatrix flag(Matrix::Ones(1, 1));
  return BlockChannel({{q, noiseless(d)}, {1.0 - q, constant_channel(d, flag)}});
}

KrausChannel random_channel(std::size_t din, std::size_t dout, std::size_t rank, std::uint64_t seed) {
  if (din == 0 || dout == 0 || rank == 0 || din > dout * rank)
    throw InvalidInput("random_channel: need din <= dout * rank");
  Rng rng(seed);
  const Matrix v = random_isometry(dout * rank, din, rng);
  std::vector<Matrix> kraus;
  const auto out = static_cast<Eigen::Index>(dout);
  for (std::size_t k = 0; k < rank; ++k) kraus.push_back(v.middleRows(static_cast<Eigen::Index>(k) * out, out));
  return KrausChannel(din, dout, std::move(kraus));
}

KrausChannel random_entanglement_breaking(std::size_t din, std::size_t dout, std::size_t outcomes,
                                          std::uint64_t seed) {
  if (outcomes < din) throw InvalidInput("random_entanglement_breaking: need outcomes >= din");
  Rng rng(seed);
  const Matrix v = random_isometry(outcomes, din, rng);
  std::vector<HermitianOperator> povm;
  std::vector<DensityMatrix> outputs;
  for (Eigen::Index k = 0; k < v.rows(); ++k) {
    const Vector row = v.row(k).adjoint();
    povm.emplace_back(hermitian_part(row * row.adjoint()));
    outputs.push_back(random_state(dout, 1 + static_cast<std::size_t>(rng() % dout), rng()));
  }
  return entanglement_breaking(povm, outputs);
}

CpMap tensor_maps(const CpMap& a, const CpMap& b) {
  CpMap out{a.din * b.din, a.dout * b.dout, {}};
  out.kraus.reserve(a.kraus.size() * b.kraus.size());
  for (const auto& ka : a.kraus)
    for (const auto& kb : b.kraus) out.kraus.push_back(kron(ka, kb));
  return out;
}

KrausChannel tensor_channels(const KrausChannel& a, const KrausChannel& b) {
  CpMap m = tensor_maps(a.map(), b.map());
  return KrausChannel(m.din, m.dout, std::move(m.kraus));
}

BlockChannel tensor_block(const BlockChannel& a, const KrausChannel& b) {
  std::vector<BlockChannel::Component> comps;
  for (const auto& c : a.components()) comps.push_back({c.weight, tensor_channels(c.channel, b)});
  return BlockChannel(std::move(comps));
}

namespace {

void require_input_dim(std::size_t din, const Ensemble& e, const char* what) {
  if (e.dim() != din) throw InvalidInput(std::string(what) + ": ensemble dimension does not match channel input");
}

}  // namespace

double chi_of_map(const CpMap& m, const Ensemble& e) {
  require_input_dim(m.din, e, "chi_of_map");
  Matrix avg = Matrix::Zero(static_cast<Eigen::Index>(m.dout), static_cast<Eigen::Index>(m.dout));
  double mixed = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const Matrix out = m.apply(e.state(i).matrix());
    avg += e.weight(i) * out;
    mixed += e.weight(i) * detail::subnormalized_entropy_raw(out);
  }
  return detail::subnormalized_entropy_raw(avg) - mixed;
}

double chi_of_ensemble(const KrausChannel& c, const Ensemble& e) {
  require_input_dim(c.din(), e, "chi_of_ensemble");
  return chi_of_map(c.map(), e);
}

double chi_of_ensemble_direct(const BlockChannel& c, const Ensemble& e) {
  require_input_dim(c.din(), e, "chi_of_ensemble");
  double mixed = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) mixed += e.weight(i) * block_entropy(apply_block(c, e.state(i)));
  return block_entropy(apply_block(c, average_state(e))) - mixed;
}

double chi_of_ensemble(const BlockChannel& c, const Ensemble& e) {
  require_input_dim(c.din(), e, "chi_of_ensemble");
  double blockwise = 0.0;
  for (const auto& comp : c.components())
    if (comp.weight > 0.0) blockwise += comp.weight * chi_of_ensemble(comp.channel, e);
  const double direct = chi_of_ensemble_direct(c, e);
  if (std::abs(blockwise - direct) > 1e-9)
    throw InternalConsistencyError("chi_of_ensemble: blockwise and direct block-entropy values disagree");
  return blockwise;
}

}  // namespace chicap
