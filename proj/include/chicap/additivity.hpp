#pragma once

#include "chicap/capacity.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace chicap {

// One additivity-type comparison. Every quantity is oriented so that gap < -tolerance is a
// violation of the (proven or conjectured) inequality.
struct GapReport {
  std::string quantity;
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
  double tolerance = 0.0;
  bool proven = false;  // the inequality is a theorem for this instance class
  bool pass = true;
  bool converged = true;  // all sub-solves certified
  std::uint64_t seed = 0;
  std::optional<Matrix> state;  // bipartite input, when the quantity depends on one
  std::vector<std::pair<std::string, double>> details;
};

// True for unitary and entanglement-breaking channels, for which subadditivity is proven.
bool subadditivity_proven(const KrausChannel& phi, const KrausChannel& psi);

// gap = chi_Phi(s^Phi) + chi_Psi(s^Psi) - chi_{Phi (x) Psi}(s).
GapReport subadditivity_gap(const KrausChannel& phi, const KrausChannel& psi, const DensityMatrix& sigma,
                            const OptimizerConfig& cfg = {}, double tol = 2e-3);

// gap = hatH_{Phi (x) Psi}(s) - hatH_Phi(s^Phi) - hatH_Psi(s^Psi).
GapReport hatH_superadditivity_gap(const KrausChannel& phi, const KrausChannel& psi, const DensityMatrix& sigma,
                                   const OptimizerConfig& cfg = {}, double tol = 2e-3);

struct EquivalenceProbe {
  GapReport subadditivity;
  GapReport superadditivity;
  bool consistent = true;  // superadditivity holding implies subadditivity holding
};
EquivalenceProbe equivalence_probe(const KrausChannel& phi, const KrausChannel& psi, const DensityMatrix& sigma,
                             const OptimizerConfig& cfg = {}, double tol = 2e-3);

// gap = C(Phi; A) + C(Psi; B) - C(Phi (x) Psi; A (x) B).
GapReport constrained_additivity_gap(const KrausChannel& phi, const ConstraintSet& a, const KrausChannel& psi,
                                     const ConstraintSet& b, const OptimizerConfig& cfg = {}, double tol = 2e-3);

// C(Id (x) Psi; {rho} (x) {omega}) against H(rho) + chi_Psi(omega); passes when |gap| <= tol.
GapReport prop2_noiseless_check(const KrausChannel& psi, const DensityMatrix& rho, const DensityMatrix& omega,
                                const OptimizerConfig& cfg = {}, double tol = 1e-2);

// The inequality chain for Phi_q = q Id (+) (1 - q) Phi_0; details hold the lines L1 ... L5.
GapReport prop2_directsum_check(const KrausChannel& phi0, const KrausChannel& psi, double q,
                                const DensityMatrix& sigma, const OptimizerConfig& cfg = {}, double tol = 2e-3);

// gap = max over a grid alpha + beta = gamma of [C(Phi; A, alpha) + C(Psi; B, beta)]
//       - C(Phi (x) Psi; (A (x) I + I (x) B) / 2, gamma / 2).
GapReport weak_additivity_check(const KrausChannel& phi, const Matrix& a, const KrausChannel& psi, const Matrix& b,
                                double gamma, int grid_n, const OptimizerConfig& cfg = {}, double tol = 2e-3);

// H(s) - sum_j p_j H(s_j) for the measurement {|e_j><e_j| (x) I_K}.
double glo_check(const DensityMatrix& sigma, std::size_t dh, std::size_t dk, const Matrix& basis);

struct SearchOptions {
  int budget = 100;
  int refine_steps = 20;
  double bias = 0.5;  // pull toward maximally entangled inputs
};

// Random sampling of bipartite inputs followed by a random-walk refinement of the best one;
// returns the smallest subadditivity gap found.
GapReport violation_search(const KrausChannel& phi, const KrausChannel& psi, const SearchOptions& opts,
                           const OptimizerConfig& cfg = {}, double tol = 2e-3);

}  // namespace chicap
