#pragma once

#include "chicap/channel.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace chicap {

// Admissible set for ensemble averages.
class ConstraintSet {
 public:
  struct Full {};
  // Tr(A rho) <= alpha with 0 <= A <= I and 0 <= alpha <= 1.
  struct Linear {
    Matrix effect;
    double alpha;
  };
  struct Singleton {
    DensityMatrix rho;
  };
  // Tr_K rho in left and Tr_H rho in right, for rho on H (x) K.
  struct Marginals {
    std::size_t dh;
    std::size_t dk;
    std::shared_ptr<const ConstraintSet> left;
    std::shared_ptr<const ConstraintSet> right;
  };
  using Variant = std::variant<Full, Linear, Singleton, Marginals>;

  static ConstraintSet full();
  // A must be an effect and alpha in [0, 1].
  static ConstraintSet linear(const Matrix& effect, double alpha);
  // Any Hermitian A with ||A|| > 0; rescaled to A' = (A/||A|| + I)/2, alpha' = (alpha/||A|| + 1)/2
  // unless A is already an effect.
  static ConstraintSet linear_general(const Matrix& a, double alpha);
  static ConstraintSet singleton(const DensityMatrix& rho);
  static ConstraintSet marginals(const ConstraintSet& left, const ConstraintSet& right, std::size_t dh,
                                 std::size_t dk);

  const Variant& variant() const { return v_; }
  bool is_full() const { return std::holds_alternative<Full>(v_); }
  std::string kind() const;

  // Membership test for a candidate average.
  bool contains(const Matrix& rho, double tol = 1e-8) const;
  // Largest violation (0 when feasible).
  double violation(const Matrix& rho) const;

 private:
  explicit ConstraintSet(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

struct OptimizerConfig {
  int restarts = 4;
  int max_iterations = 3000;
  std::size_t ensemble_size = 0;  // 0 selects din^2
  double tol_value = 1e-9;
  double tol_certificate = 1e-4;
  std::uint64_t seed = 1234567;
  // Skip the optimality certificate (used inside bisection loops).
  bool certify = true;

  void validate() const;
};

struct CapacityResult {
  double value = 0.0;
  Ensemble ensemble;
  DensityMatrix average;
  double certificate = 0.0;
  double certificate_gap = 0.0;
  std::optional<double> multiplier;
  bool converged = false;
  int iterations = 0;
};

// A weighted sum of chi-quantities of CP maps plus a linear functional of the average:
//   F(e) = sum_t w_t chi_{M_t}(e) + Tr(L rho_av).
// Ordinary channels, direct-sum mixtures, Lagrangian objectives and Shor's extension
// all reduce to this form.
struct ChiObjectiveSpec {
  struct Term {
    double weight;
    CpMap map;
  };
  std::size_t din = 0;
  std::vector<Term> terms;
  Matrix linear;  // Hermitian on the input space; empty means zero

  static ChiObjectiveSpec of(const KrausChannel& c);
  static ChiObjectiveSpec of(const BlockChannel& c);
  ChiObjectiveSpec with_linear(const Matrix& l) const;

  double evaluate(const Ensemble& e) const;
};

// Convex roof of the output entropy and its witnessing decomposition.
struct HatHResult {
  double value = 0.0;
  Ensemble ensemble;
  bool converged = false;
};

HatHResult hat_H(const KrausChannel& c, const DensityMatrix& rho, const OptimizerConfig& cfg = {});
HatHResult hat_H(const BlockChannel& c, const DensityMatrix& rho, const OptimizerConfig& cfg = {});

double chi_function(const KrausChannel& c, const DensityMatrix& rho, const OptimizerConfig& cfg = {});
double chi_function(const BlockChannel& c, const DensityMatrix& rho, const OptimizerConfig& cfg = {});

CapacityResult chi_capacity(const KrausChannel& c, const ConstraintSet& constraint, const OptimizerConfig& cfg = {});
CapacityResult chi_capacity(const BlockChannel& c, const ConstraintSet& constraint, const OptimizerConfig& cfg = {});

// max over ensembles of chi_Phi(e) + lambda Tr(rho_av E).
CapacityResult lagrangian_capacity(const KrausChannel& c, const Matrix& effect, double lambda,
                                   const OptimizerConfig& cfg = {});

struct KuhnTuckerResult {
  double lambda = 0.0;
  CapacityResult capacity;        // constrained optimum, Tr(A rho_av) = alpha when lambda > 0
  double lagrangian_value = 0.0;  // max chi + lambda Tr(rho (I - A))
  double slackness_residual = 0.0;
  bool converged = false;
};

KuhnTuckerResult kuhn_tucker_multiplier(const KrausChannel& c, const Matrix& effect, double alpha,
                                        const OptimizerConfig& cfg = {});

struct Certificate {
  double value = 0.0;  // sup of the average output relative entropy to Phi(rho_av)
  double gap = 0.0;    // value - chi(candidate)
  bool certified = false;
  bool converged = true;
  bool support_violation = false;
};

Certificate optimality_certificate(const KrausChannel& c, const ConstraintSet& constraint,
                                   const Ensemble& candidate, const OptimizerConfig& cfg = {});

// C - chi(rho) - H(Phi(rho) || Phi(rho_av)) for an optimum with average rho_av; >= -tol expected.
double corollary1_check(const KrausChannel& c, const CapacityResult& optimal, const DensityMatrix& rho,
                        const OptimizerConfig& cfg = {});

// |sum_i p_i H(Phi(rho_i)||Phi(ref)) - chi(e) - H(Phi(rho_av)||Phi(ref))|; +inf on support violation.
double donald_residual(const KrausChannel& c, const Ensemble& e, const DensityMatrix& reference);

struct SupportingConstraint {
  Matrix effect;
  double alpha = 0.0;
  double chi_at_point = 0.0;
  double constrained_capacity = 0.0;
  double gap = 0.0;
  bool degenerate = false;  // vanishing supergradient
  bool upper_side = false;  // (I - A', 1 - alpha') was selected
};

SupportingConstraint find_supporting_constraint(const KrausChannel& c, const DensityMatrix& rho0,
                                                const OptimizerConfig& cfg = {}, double tol = 2e-3);

struct ProfilePoint {
  double alpha = 0.0;
  double value = 0.0;
  bool converged = false;
};

struct AlphaProfile {
  std::vector<ProfilePoint> points;
  bool nondecreasing = false;
  bool concave = false;
  double max_decrease = 0.0;
  double max_second_difference = 0.0;
};

AlphaProfile f_alpha_profile(const KrausChannel& c, const Matrix& effect, const std::vector<double>& alphas,
                             const OptimizerConfig& cfg = {}, double tol = 1e-5);

// A (x) I (x) ... + ... + I (x) ... (x) A on the n-fold tensor power.
Matrix tensor_power_constraint(const Matrix& a, int n);
// Linear(A^(n)/n, alpha) for n in {1, 2}; throws Unsupported for larger n.
ConstraintSet tensor_power_linear(const Matrix& a, int n, double alpha);

// Generic engine entry points over ChiObjectiveSpec.
CapacityResult maximize_objective(const ChiObjectiveSpec& spec, const ConstraintSet& constraint,
                                  const OptimizerConfig& cfg);
// Maximum of the objective over decompositions of a fixed average.
CapacityResult maximize_over_decompositions(const ChiObjectiveSpec& spec, const DensityMatrix& rho,
                                            const OptimizerConfig& cfg);
Certificate objective_certificate(const ChiObjectiveSpec& spec, const ConstraintSet& constraint,
                                  const Ensemble& candidate, const OptimizerConfig& cfg);

}  // namespace chicap
