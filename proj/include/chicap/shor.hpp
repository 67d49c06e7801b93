#pragma once

#include "chicap/capacity.hpp"

#include <vector>

namespace chicap {

// Block-diagonal input {rho_1, ..., rho_d} of the extension; parts are positive with total trace 1.
class IndexedState {
 public:
  explicit IndexedState(std::vector<Matrix> parts);

  std::size_t d() const { return parts_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(parts_.front().rows()); }
  const std::vector<Matrix>& parts() const { return parts_; }
  Matrix total() const;

 private:
  std::vector<Matrix> parts_;
};

// With probability 1 - q acts as `base` on sum_j rho_j; with probability q measures {I - E, E}
// and, on outcome E, also reveals the index j.
class ShorExtension {
 public:
  ShorExtension(KrausChannel base, const Matrix& effect, double q, std::size_t d);

  const KrausChannel& base() const { return base_; }
  const Matrix& effect() const { return effect_; }
  Matrix effect_complement() const { return identity(base_.din()) - effect_; }
  double q() const { return q_; }
  std::size_t d() const { return d_; }
  std::size_t din() const { return base_.din(); }

 private:
  KrausChannel base_;
  Matrix effect_;
  double q_;
  std::size_t d_;
};

// sigma in slot j (1-based), zeros elsewhere.
IndexedState delta_embed(const DensityMatrix& sigma, std::size_t j, std::size_t d);

// Blocks [(1-q) Phi(rho), q diag(Tr rho E', Tr rho_1 E, ..., Tr rho_d E)] with E' = I - E.
BlockState apply_extension(const ShorExtension& x, const IndexedState& rho);

// Kraus form of Psi_A(s) = Tr_H (A (x) I)(Id (x) Psi)(s) on H (x) K, dim H = A.rows().
CpMap reduced_cp_map(const KrausChannel& psi, const Matrix& a);
Matrix reduced_map(const KrausChannel& psi, const Matrix& a, const Matrix& sigma);

// Blocks [(1-q)(Phi (x) Psi)(s), q Psi_{E'}(s), q Psi_E(s_1), ..., q Psi_E(s_d)] with s = sum_j s_j.
BlockState apply_extension_tensor(const ShorExtension& x, const KrausChannel& psi, const std::vector<Matrix>& sigmas);

// chi_{Psi_E}(e) + chi_{Psi_{E'}}(e), within [0, log2 dim K' + 1].
double f_functional(const KrausChannel& psi, const Matrix& effect, const Ensemble& e);

struct ExtensionChi {
  double closed_form = 0.0;
  double direct = 0.0;
};

// chi of (Phi^ (x) Psi) on the symmetric ensemble {mu_i / d, delta_j(sigma_i)}, by the closed form
// (1-q) chi_{Phi (x) Psi} + q log2(d) Tr sigma_av (E (x) I) + q f and by direct block entropies.
// Throws InternalConsistencyError when the two differ by more than 1e-6.
ExtensionChi chi_extension_ensemble(const ShorExtension& x, const KrausChannel& psi, const Ensemble& e);

// The closed form above as a generic objective on H (x) K.
ChiObjectiveSpec extension_objective(const ShorExtension& x, const KrausChannel& psi);

// One-dimensional channel C -> C.
KrausChannel trivial_channel();

CapacityResult extension_capacity(const ShorExtension& x, const OptimizerConfig& cfg = {});
// Capacity of Phi^ (x) Psi with Tr_H sigma_av in B.
CapacityResult extension_capacity_joint(const ShorExtension& x, const KrausChannel& psi, const ConstraintSet& b,
                                        const OptimizerConfig& cfg = {});

// The extension as a direct-sum channel on H (x) C^d (block-diagonal inputs); d <= 2 only.
BlockChannel unreduced_extension(const ShorExtension& x);
CapacityResult extension_capacity_unreduced(const ShorExtension& x, const OptimizerConfig& cfg = {});

struct Prop3Report {
  double lhs = 0.0;
  double rhs = 0.0;
  double deviation = 0.0;  // |lhs - rhs|
  double bound = 0.0;      // q (log2 dim K' + 1)
  double slack = 0.0;
  bool pass = false;
  bool converged = false;
};

Prop3Report prop3_check(const KrausChannel& phi, const KrausChannel& psi, const Matrix& effect, double q,
                        std::size_t d, const ConstraintSet& b, const OptimizerConfig& cfg = {},
                        double slack = 1e-3);

// max over sigma with Tr_H sigma in B of chi_{Phi (x) Psi}(sigma) + lambda Tr sigma (E (x) I).
CapacityResult lagrangian_joint_max(const KrausChannel& phi, const KrausChannel& psi, const Matrix& effect,
                                    double lambda, const ConstraintSet& b, const OptimizerConfig& cfg = {});

}  // namespace chicap
