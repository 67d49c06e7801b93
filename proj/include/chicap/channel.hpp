#pragma once

#include "chicap/state.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace chicap {

// Completely positive map in Kraus form, not necessarily trace preserving.
struct CpMap {
  std::size_t din = 0;
  std::size_t dout = 0;
  std::vector<Matrix> kraus;  // each dout x din

  Matrix apply(const Matrix& x) const;
  Matrix adjoint_apply(const Matrix& y) const;  // Heisenberg picture
};

// Measure-and-prepare description rho -> sum_k Tr(M_k rho) sigma_k.
struct MeasurePrepare {
  std::vector<Matrix> povm;
  std::vector<DensityMatrix> outputs;
};

// Trace-preserving CpMap (completeness residual <= 1e-10).
class KrausChannel {
 public:
  KrausChannel(std::size_t din, std::size_t dout, std::vector<Matrix> kraus);

  std::size_t din() const { return map_.din; }
  std::size_t dout() const { return map_.dout; }
  const std::vector<Matrix>& kraus() const { return map_.kraus; }
  const CpMap& map() const { return map_; }

  const std::optional<MeasurePrepare>& measure_prepare() const { return measure_prepare_; }
  bool is_entanglement_breaking() const { return measure_prepare_.has_value(); }
  KrausChannel with_measure_prepare(MeasurePrepare mp) const;

 private:
  CpMap map_;
  std::optional<MeasurePrepare> measure_prepare_;
};

// Direct-sum mixture (+)_j q_j Phi_j of channels sharing an input space.
class BlockChannel {
 public:
  struct Component {
    double weight;
    KrausChannel channel;
  };

  explicit BlockChannel(std::vector<Component> components);
  static BlockChannel single(const KrausChannel& c);

  std::size_t din() const { return components_.front().channel.din(); }
  std::size_t size() const { return components_.size(); }
  const std::vector<Component>& components() const { return components_; }
  std::vector<std::size_t> output_layout() const;

 private:
  std::vector<Component> components_;
};

DensityMatrix apply(const KrausChannel& c, const DensityMatrix& rho);
BlockState apply_block(const BlockChannel& c, const DensityMatrix& rho);

KrausChannel noiseless(std::size_t d);
KrausChannel depolarizing(double p, std::size_t d);
KrausChannel completely_depolarizing(std::size_t d);
KrausChannel constant_channel(std::size_t din, const DensityMatrix& omega);
KrausChannel entanglement_breaking(const std::vector<HermitianOperator>& povm,
                                   const std::vector<DensityMatrix>& outputs);
// q Id (+) (1 - q) (trace to a one-dimensional flag block).
BlockChannel erasure(double q, std::size_t d);
// Channel with `rank` Kraus operators drawn from a Haar isometry C^din -> C^(dout*rank).
KrausChannel random_channel(std::size_t din, std::size_t dout, std::size_t rank, std::uint64_t seed);
// Measure-and-prepare channel with a random rank-one POVM of `outcomes` elements and random outputs.
KrausChannel random_entanglement_breaking(std::size_t din, std::size_t dout, std::size_t outcomes,
                                          std::uint64_t seed);

KrausChannel tensor_channels(const KrausChannel& a, const KrausChannel& b);
CpMap tensor_maps(const CpMap& a, const CpMap& b);
BlockChannel tensor_block(const BlockChannel& a, const KrausChannel& b);

// chi = H(Phi(rho_av)) - sum_i p_i H(Phi(rho_i)).
double chi_of_ensemble(const KrausChannel& c, const Ensemble& e);
// Blockwise sum_j q_j chi_{Phi_j}; cross-checked against chi_of_ensemble_direct.
double chi_of_ensemble(const BlockChannel& c, const Ensemble& e);
// Block-entropy evaluation of the whole direct-sum output.
double chi_of_ensemble_direct(const BlockChannel& c, const Ensemble& e);
// H_sub(M(rho_av)) - sum_i p_i H_sub(M(rho_i)) for a trace-nonincreasing map.
double chi_of_map(const CpMap& m, const Ensemble& e);

struct ChannelDiagnostics {
  std::size_t din = 0;
  std::size_t dout = 0;
  std::size_t kraus_rank = 0;
  double completeness_residual = 0.0;
  bool trace_preserving = false;
};

ChannelDiagnostics validate_channel(std::size_t din, std::size_t dout, const std::vector<Matrix>& kraus);
ChannelDiagnostics validate_channel(const KrausChannel& c);

}  // namespace chicap
