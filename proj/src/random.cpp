#include "chicap/random.hpp"

#include "chicap/errors.hpp"

#include <Eigen/QR>

#include <cmath>

namespace chicap {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over the pair
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Vector random_vector(std::size_t dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const double re = normal(rng);
    const double im = normal(rng);
    v[k] = Complex(re, im);
  }
  return v;
}

Vector random_unit_vector(std::size_t dim, Rng& rng) {
  Vector v = random_vector(dim, rng);
  return v / v.norm();
}

Matrix random_ginibre(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index c = 0; c < g.cols(); ++c) g.col(c) = random_vector(rows, rng);
  return g;
}

Matrix random_isometry(std::size_t rows, std::size_t cols, Rng& rng) {
  if (cols > rows || cols == 0) throw InvalidInput("random_isometry: need 0 < cols <= rows");
  const Matrix g = random_ginibre(rows, cols, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(g.rows(), g.cols());
  const Matrix r = qr.matrixQR();
  // Fix column phases so the distribution is Haar.
  for (Eigen::Index c = 0; c < q.cols(); ++c) {
    const Complex d = r(c, c);
    if (std::abs(d) > 0.0) q.col(c) *= d / std::abs(d);
  }
  return q;
}

Matrix random_unitary(std::size_t dim, Rng& rng) { return random_isometry(dim, dim, rng); }

DensityMatrix random_state(std::size_t dim, std::size_t rank, std::uint64_t seed) {
  if (dim == 0 || rank == 0 || rank > dim) throw InvalidInput("random_state: need 1 <= rank <= dim");
  Rng rng(seed);
  const Matrix g = random_ginibre(dim, rank, rng);
  const Matrix rho = g * g.adjoint();
  return DensityMatrix(hermitian_part(rho / rho.trace().real()));
}

HermitianOperator random_effect(std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw InvalidInput("random_effect: dimension must be positive");
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Matrix u = random_unitary(dim, rng);
  RealVector spec(static_cast<Eigen::Index>(dim));
  for (Eigen::Index k = 0; k < spec.size(); ++k) spec[k] = unif(rng);
  return HermitianOperator(hermitian_part(u * spec.cast<Complex>().asDiagonal() * u.adjoint()));
}

Ensemble random_ensemble(std::size_t dim, std::size_t n, std::uint64_t seed) {
  if (dim == 0 || n == 0) throw InvalidInput("random_ensemble: need dim >= 1 and n >= 1");
  Rng rng(seed);
  std::exponential_distribution<double> expo(1.0);
  std::uniform_int_distribution<std::size_t> rank_dist(1, dim);
  std::vector<double> w;
  std::vector<DensityMatrix> states;
  for (std::size_t i = 0; i < n; ++i) {
    w.push_back(expo(rng) + 1e-3);
    states.push_back(random_state(dim, rank_dist(rng), rng()));
  }
  return Ensemble::normalized(std::move(w), std::move(states));
}

DensityMatrix random_bipartite_state(std::size_t dh, std::size_t dk, std::size_t rank,
                                     double bias, std::uint64_t seed) {
  const std::size_t d = dh * dk;
  if (d == 0 || rank == 0 || rank > d) throw InvalidInput("random_bipartite_state: need 1 <= rank <= dh*dk");
  if (!(bias >= 0.0 && bias <= 1.0)) throw InvalidInput("random_bipartite_state: bias outside [0, 1]");
  Rng rng(seed);
  const std::size_t m = std::min(dh, dk);
  Matrix rho = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  std::exponential_distribution<double> expo(1.0);
  for (std::size_t r = 0; r < rank; ++r) {
    Vector maxent = Vector::Zero(static_cast<Eigen::Index>(d));
    const Matrix u = random_unitary(dh, rng);
    const Matrix v = random_unitary(dk, rng);
    for (std::size_t k = 0; k < m; ++k) {
      maxent += kron(u.col(static_cast<Eigen::Index>(k)), v.col(static_cast<Eigen::Index>(k))) /
                std::sqrt(static_cast<double>(m));
    }
    const Vector g = random_unit_vector(d, rng);
    Vector psi = (1.0 - bias) * g + bias * maxent;
    if (psi.norm() < 1e-12) psi = maxent;
    psi /= psi.norm();
    rho += (expo(rng) + 1e-3) * psi * psi.adjoint();
  }
  return DensityMatrix(hermitian_part(rho / rho.trace().real()));
}

}  // namespace chicap
