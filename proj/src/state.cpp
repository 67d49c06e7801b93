#include "chicap/state.hpp"

#include "chicap/errors.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace chicap {

namespace {

void require_square_finite(const Matrix& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols())
    throw InvalidInput(std::string(what) + ": matrix must be square and non-empty");
  if (!all_finite(m)) throw InvalidInput(std::string(what) + ": non-finite entry");
}

}  // namespace

HermitianOperator::HermitianOperator(const Matrix& m, double tol) {
  require_square_finite(m, "HermitianOperator");
  if (hermiticity_residual(m) > tol) throw InvalidInput("HermitianOperator: matrix is not Hermitian");
  matrix_ = hermitian_part(m);
}

bool HermitianOperator::is_effect(double tol) const {
  const RealVector ev = eigenvalues();
  return ev.minCoeff() >= -tol && ev.maxCoeff() <= 1.0 + tol;
}

DensityMatrix::DensityMatrix(const Matrix& m) {
  require_square_finite(m, "DensityMatrix");
  if (hermiticity_residual(m) > kHermitianTol) throw InvalidInput("DensityMatrix: matrix is not Hermitian");
  matrix_ = hermitian_part(m);
  const double tr = matrix_.trace().real();
  if (std::abs(tr - 1.0) > kTraceTol)
    throw InvalidInput("DensityMatrix: trace " + std::to_string(tr) + " differs from 1");
  if (eigenvalues_h(matrix_).minCoeff() < -kPsdTol)
    throw InvalidInput("DensityMatrix: matrix is not positive semidefinite");
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t d) {
  if (d == 0) throw InvalidInput("maximally_mixed: dimension must be positive");
  return DensityMatrix(identity(d) / static_cast<double>(d));
}

DensityMatrix DensityMatrix::pure(const Vector& psi) {
  const double n = psi.norm();
  if (psi.size() == 0 || !(n > 0.0)) throw InvalidInput("pure: zero vector");
  const Vector u = psi / n;
  return DensityMatrix(u * u.adjoint());
}

DensityMatrix DensityMatrix::basis(std::size_t d, std::size_t k) { return DensityMatrix(projector(d, k)); }

Ensemble::Ensemble(std::vector<double> weights, std::vector<DensityMatrix> states)
    : weights_(std::move(weights)), states_(std::move(states)) {
  if (weights_.empty() || weights_.size() != states_.size())
    throw InvalidInput("Ensemble: weights and states must be non-empty and of equal length");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w > 0.0)) throw InvalidInput("Ensemble: weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidInput("Ensemble: weights must sum to 1");
  for (const auto& s : states_)
    if (s.dim() != states_.front().dim()) throw InvalidInput("Ensemble: states must share one dimension");
}

Ensemble Ensemble::normalized(std::vector<double> weights, std::vector<DensityMatrix> states) {
  if (weights.size() != states.size()) throw InvalidInput("Ensemble: weights and states must be of equal length");
  std::vector<double> w;
  std::vector<DensityMatrix> s;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) {
      w.push_back(weights[i]);
      s.push_back(states[i]);
    }
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (w.empty() || !(total > 0.0)) throw InvalidInput("Ensemble: no positive weight");
  for (double& x : w) x /= total;
  return Ensemble(std::move(w), std::move(s));
}

DensityMatrix average_state(const Ensemble& e) {
  Matrix avg = Matrix::Zero(static_cast<Eigen::Index>(e.dim()), static_cast<Eigen::Index>(e.dim()));
  for (std::size_t i = 0; i < e.size(); ++i) avg += e.weight(i) * e.state(i).matrix();
  return DensityMatrix(avg);
}

BlockState::BlockState(std::vector<Matrix> blocks) : blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw InvalidInput("BlockState: no blocks");
  double total = 0.0;
  for (auto& b : blocks_) {
    if (b.rows() != b.cols()) throw InvalidInput("BlockState: blocks must be square");
    if (!all_finite(b)) throw InvalidInput("BlockState: non-finite entry");
    if (b.size() == 0) continue;
    if (hermiticity_residual(b) > 1e-10) throw InvalidInput("BlockState: block is not Hermitian");
    b = hermitian_part(b);
    if (eigenvalues_h(b).minCoeff() < -kPsdTol) throw InvalidInput("BlockState: block is not positive");
    total += b.trace().real();
  }
  if (std::abs(total - 1.0) > kTraceTol) throw InvalidInput("BlockState: total trace differs from 1");
}

std::vector<double> BlockState::block_weights() const {
  std::vector<double> w;
  w.reserve(blocks_.size());
  for (const auto& b : blocks_) w.push_back(b.size() == 0 ? 0.0 : b.trace().real());
  return w;
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix(kron(a.matrix(), b.matrix()));
}

DensityMatrix partial_trace(const DensityMatrix& s, std::size_t dh, std::size_t dk, Side keep) {
  return DensityMatrix(partial_trace(s.matrix(), dh, dk, keep));
}

std::vector<Posterior> measurement_posteriors(const DensityMatrix& s, std::size_t dh,
                                              std::size_t dk, const Matrix& basis) {
  const auto h = static_cast<Eigen::Index>(dh);
  if (s.dim() != dh * dk) throw InvalidInput("measurement_posteriors: state dimension does not factor");
  if (basis.rows() != h || basis.cols() != h)
    throw InvalidInput("measurement_posteriors: basis must be dh x dh");
  if ((basis.adjoint() * basis - identity(dh)).cwiseAbs().maxCoeff() > 1e-10)
    throw InvalidInput("measurement_posteriors: basis is not orthonormal");

  std::vector<Posterior> out;
  const Matrix ik = identity(dk);
  for (Eigen::Index j = 0; j < h; ++j) {
    // (<e_j| (x) I) sigma (|e_j> (x) I) gives the unnormalized K-part; re-embed as |e_j><e_j| (x) block.
    const Matrix bra = kron(basis.col(j).adjoint(), ik);
    const Matrix block = bra * s.matrix() * bra.adjoint();
    const double p = block.trace().real();
    if (p <= 1e-12) continue;
    const Matrix proj = basis.col(j) * basis.col(j).adjoint();
    out.push_back({p, DensityMatrix(kron(proj, block / p))});
  }
  return out;
}

}  // namespace chicap
