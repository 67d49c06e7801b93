#pragma once

#include "chicap/linalg.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace chicap {

// Square complex matrix with M = M^dagger (residual <= 1e-12), stored symmetrized.
class HermitianOperator {
 public:
  explicit HermitianOperator(const Matrix& m, double tol = kHermitianTol);

  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
  const Matrix& matrix() const { return matrix_; }
  RealVector eigenvalues() const { return eigenvalues_h(matrix_); }

  // True when the spectrum lies in [-tol, 1 + tol].
  bool is_effect(double tol = kPsdTol) const;

 private:
  Matrix matrix_;
};

// Positive semidefinite, unit-trace operator.
class DensityMatrix {
 public:
  explicit DensityMatrix(const Matrix& m);

  static DensityMatrix maximally_mixed(std::size_t d);
  static DensityMatrix pure(const Vector& psi);  // normalizes psi
  static DensityMatrix basis(std::size_t d, std::size_t k);

  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
  const Matrix& matrix() const { return matrix_; }
  operator const Matrix&() const { return matrix_; }

 private:
  Matrix matrix_;
};

// Finite weighted family of states sharing one dimension.
class Ensemble {
 public:
  Ensemble(std::vector<double> weights, std::vector<DensityMatrix> states);

  // Renormalizes the weights and drops non-positive ones before validating.
  static Ensemble normalized(std::vector<double> weights, std::vector<DensityMatrix> states);

  std::size_t size() const { return weights_.size(); }
  std::size_t dim() const { return states_.front().dim(); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<DensityMatrix>& states() const { return states_; }
  double weight(std::size_t i) const { return weights_[i]; }
  const DensityMatrix& state(std::size_t i) const { return states_[i]; }

 private:
  std::vector<double> weights_;
  std::vector<DensityMatrix> states_;
};

DensityMatrix average_state(const Ensemble& e);

// Direct sum of positive blocks with unit total trace.
class BlockState {
 public:
  explicit BlockState(std::vector<Matrix> blocks);

  std::size_t size() const { return blocks_.size(); }
  const std::vector<Matrix>& blocks() const { return blocks_; }
  const Matrix& block(std::size_t j) const { return blocks_[j]; }
  std::vector<double> block_weights() const;

 private:
  std::vector<Matrix> blocks_;
};

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);
DensityMatrix partial_trace(const DensityMatrix& s, std::size_t dh, std::size_t dk, Side keep);

struct Posterior {
  double probability;
  DensityMatrix state;
};

// Outcomes of the von Neumann measurement {|e_j><e_j| (x) I_K} on a state of H (x) K.
// `basis` holds the orthonormal vectors e_j as columns. Outcomes with p <= 1e-12 are dropped.
std::vector<Posterior> measurement_posteriors(const DensityMatrix& s, std::size_t dh,
                                              std::size_t dk, const Matrix& basis);

}  // namespace chicap
