#include "chicap/linalg.hpp"

#include "chicap/errors.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <limits>

namespace chicap {

double log_base(double x) { return std::log(x) / std::log(kLogBase); }
double to_bits(double nats) { return nats / std::log(kLogBase); }

Spectrum eigh(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(m));
  if (solver.info() != Eigen::Success) throw InvalidInput("eigh: eigensolver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

RealVector eigenvalues_h(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(m), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw InvalidInput("eigenvalues_h: eigensolver failed");
  return solver.eigenvalues();
}

Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

double hermiticity_residual(const Matrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

bool all_finite(const Matrix& m) {
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    const Complex z = m.data()[k];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double operator_norm_h(const Matrix& m) {
  const RealVector ev = eigenvalues_h(m);
  return ev.size() == 0 ? 0.0 : std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
}

Matrix identity(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  return Matrix::Identity(n, n);
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out = Eigen::kroneckerProduct(a, b).eval();
  return out;
}

Matrix ket_bra(const Vector& ket, const Vector& bra) { return ket * bra.adjoint(); }

Matrix projector(std::size_t d, std::size_t k) {
  if (k >= d) throw InvalidInput("projector: index out of range");
  Matrix p = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  p(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = 1.0;
  return p;
}

Matrix partial_trace(const Matrix& m, std::size_t dh, std::size_t dk, Side keep) {
  const auto n = static_cast<Eigen::Index>(dh * dk);
  if (dh == 0 || dk == 0 || m.rows() != n || m.cols() != n) {
    throw InvalidInput("partial_trace: operator dimension does not factor as dh * dk");
  }
  const auto h = static_cast<Eigen::Index>(dh);
  const auto k = static_cast<Eigen::Index>(dk);
  if (keep == Side::Left) {
    Matrix out = Matrix::Zero(h, h);
    for (Eigen::Index i = 0; i < h; ++i)
      for (Eigen::Index j = 0; j < h; ++j)
        out(i, j) = m.block(i * k, j * k, k, k).trace();
    return out;
  }
  Matrix out = Matrix::Zero(k, k);
  for (Eigen::Index i = 0; i < h; ++i) out += m.block(i * k, i * k, k, k);
  return out;
}

Matrix sqrt_psd(const Matrix& m) {
  return spectral_apply(eigh(m), [](double x) { return x > 0.0 ? std::sqrt(x) : 0.0; });
}

Matrix support_isometry(const Matrix& m, double floor) {
  const Spectrum s = eigh(m);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < s.values.size(); ++k)
    if (s.values[k] > floor) keep.push_back(k);
  Matrix v(m.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c)
    v.col(static_cast<Eigen::Index>(c)) = s.vectors.col(keep[c]);
  return v;
}

std::vector<Matrix> traceless_hermitian_basis(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  std::vector<Matrix> basis;
  const double r = 1.0 / std::sqrt(2.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      Matrix x = Matrix::Zero(n, n);
      x(i, j) = r;
      x(j, i) = r;
      basis.push_back(x);
      Matrix y = Matrix::Zero(n, n);
      y(i, j) = Complex(0.0, -r);
      y(j, i) = Complex(0.0, r);
      basis.push_back(y);
    }
  }
  // Generalized Gell-Mann diagonal elements.
  for (Eigen::Index l = 1; l < n; ++l) {
    Matrix z = Matrix::Zero(n, n);
    const double c = 1.0 / std::sqrt(static_cast<double>(l * (l + 1)));
    for (Eigen::Index k = 0; k < l; ++k) z(k, k) = c;
    z(l, l) = -static_cast<double>(l) * c;
    basis.push_back(z);
  }
  return basis;
}

}  // namespace chicap
