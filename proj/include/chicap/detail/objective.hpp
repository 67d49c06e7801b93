#pragma once

#include "chicap/capacity.hpp"

#include <vector>

namespace chicap::detail {

// log of a PSD matrix with eigenvalues clipped at `floor` (gradient use only).
Matrix clipped_log(const Spectrum& s, double floor = 1e-14);

// F(Psi) for an ensemble encoded as unnormalized vectors: column i of Psi is sqrt(p_i) psi_i,
// so rho_av = Psi Psi^dagger. Values in bits; the gradient is dF/dconj(Psi).
class ChiObjective {
 public:
  explicit ChiObjective(const ChiObjectiveSpec& spec);

  double evaluate(const Matrix& psi, Matrix* grad) const;
  std::size_t din() const { return spec_.din; }
  const ChiObjectiveSpec& spec() const { return spec_; }

 private:
  ChiObjectiveSpec spec_;
};

// phi(psi) = sum_t w_t D(M_t(psi psi^dagger) || M_t(ref)) + psi^dagger (L + extra) psi for unit psi,
// with the generalized divergence D(X||Y) = Tr X(log X - log Y) - Tr X + Tr Y, which reduces to the
// relative entropy for trace-preserving maps. Certificates maximize phi over pure inputs.
class DivergenceObjective {
 public:
  DivergenceObjective(const ChiObjectiveSpec& spec, const Matrix& reference_average, const Matrix& extra_linear);

  double evaluate(const Vector& psi, Vector* grad) const;
  std::size_t din() const { return spec_.din; }
  // Inputs whose images stay inside every supp M_t(ref), intersected with span(within).
  Matrix support_compatible_subspace(const Matrix& within) const;

 private:
  struct TermData {
    double weight;
    const CpMap* map;
    Matrix log_ref;
    Matrix support;  // projector onto supp M_t(ref)
    double trace_ref;
  };
  ChiObjectiveSpec spec_;
  std::vector<TermData> data_;
  Matrix linear_;
};

// Constraint on a single factor (the whole space, or one side of a bipartite marginal).
struct FactorConstraint {
  enum class Kind { Full, Linear, Singleton };
  Kind kind = Kind::Full;
  std::size_t dim = 1;
  Matrix subspace;  // dim x r isometry the factor's marginal must live in
  Matrix effect;    // Linear
  double alpha = 0.0;
  Vector min_vector;  // eigenvector of the smallest eigenvalue of `effect`
  double min_value = 0.0;
  Matrix rho;  // Singleton
};

struct InequalityFunctional {
  Matrix op;  // on the full space
  double bound;
};

struct EqualityFunctional {
  Side keep;
  Matrix target;
};

// Constraint set lowered onto H (x) K (K one-dimensional for non-bipartite constraints).
struct CompiledConstraint {
  std::size_t dh = 1;
  std::size_t dk = 1;
  FactorConstraint left;
  FactorConstraint right;
  Matrix subspace;  // kron of factor subspaces
  std::vector<InequalityFunctional> inequalities;
  std::vector<EqualityFunctional> equalities;
  bool fixed_average = false;  // top-level Singleton: use the decomposition engine
  Matrix fixed_rho;

  Matrix marginal(const Matrix& rho, Side keep) const;
  Matrix lift(const Matrix& x, Side keep) const;
  bool has_functionals() const { return !inequalities.empty() || !equalities.empty(); }
};

CompiledConstraint compile_constraint(const ConstraintSet& c, std::size_t din);

struct AugmentedLagrangian {
  std::vector<double> mu;
  std::vector<Matrix> lambda;
  double penalty = 10.0;

  void reset(const CompiledConstraint& cc);
  // Penalty value P(rho) and dP/drho (Hermitian) for the maximization F - P.
  double evaluate(const CompiledConstraint& cc, const Matrix& rho, Matrix* grad) const;
  // Returns the maximal violation before the update.
  double update(const CompiledConstraint& cc, const Matrix& rho);
  double violation(const CompiledConstraint& cc, const Matrix& rho) const;
};

struct EngineSolution {
  std::vector<double> weights;
  std::vector<Matrix> states;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  AugmentedLagrangian multipliers;
};

// Multi-start maximization over ensembles whose average satisfies the compiled constraint.
EngineSolution solve_free(const ChiObjective& obj, const CompiledConstraint& cc, const OptimizerConfig& cfg);
// Multi-start maximization over decompositions of rho.
EngineSolution solve_decomposition(const ChiObjective& obj, const Matrix& rho, const OptimizerConfig& cfg);

// Exact feasibility repair by mixing in one extra (possibly mixed) member; weights sum to 1.
void repair_feasibility(const CompiledConstraint& cc, std::vector<double>& weights, std::vector<Matrix>& states);
// Drops weights below 1e-8 and merges members with fidelity above 1 - 1e-8.
void prune_and_merge(std::vector<double>& weights, std::vector<Matrix>& states);

Ensemble make_ensemble(const std::vector<double>& weights, const std::vector<Matrix>& states);

// Maximum of a DivergenceObjective over unit vectors in the column span of `subspace`.
struct SphereSearchResult {
  Vector psi;
  double value = 0.0;  // smooth (clipped) objective value
};
SphereSearchResult maximize_on_sphere(const DivergenceObjective& obj, const Matrix& subspace,
                                      const std::vector<Vector>& starts, int random_starts,
                                      std::uint64_t seed, int max_iterations);

}  // namespace chicap::detail
