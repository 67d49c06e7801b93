#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <vector>

namespace chicap {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// All entropies are reported in bits.
inline constexpr double kLogBase = 2.0;
double log_base(double x);
double to_bits(double nats);

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
// Eigenvalues below this are treated as exact zeros (entropy terms, support tests).
inline constexpr double kEigenFloor = 1e-12;

enum class Side { Left, Right };

struct Spectrum {
  RealVector values;  // ascending
  Matrix vectors;     // columns
};

// Hermitian eigendecomposition; the input is symmetrized first.
Spectrum eigh(const Matrix& m);
RealVector eigenvalues_h(const Matrix& m);

Matrix hermitian_part(const Matrix& m);
double hermiticity_residual(const Matrix& m);
bool all_finite(const Matrix& m);
double max_abs(const Matrix& m);
double operator_norm_h(const Matrix& m);  // spectral norm of a Hermitian matrix

Matrix identity(std::size_t d);
Matrix kron(const Matrix& a, const Matrix& b);
Matrix ket_bra(const Vector& ket, const Vector& bra);
Matrix projector(std::size_t d, std::size_t k);  // |k><k|

// Tr_K or Tr_H of an operator on H (dim dh) tensor K (dim dk), keeping `keep`.
Matrix partial_trace(const Matrix& m, std::size_t dh, std::size_t dk, Side keep);

// f applied to the spectrum of a Hermitian matrix.
template <class F>
Matrix spectral_apply(const Spectrum& s, F&& f) {
  RealVector mapped(s.values.size());
  for (Eigen::Index k = 0; k < s.values.size(); ++k) mapped[k] = f(s.values[k]);
  return s.vectors * mapped.cast<Complex>().asDiagonal() * s.vectors.adjoint();
}

Matrix sqrt_psd(const Matrix& m);

// Isometry onto the span of eigenvectors whose eigenvalue exceeds `floor`.
Matrix support_isometry(const Matrix& m, double floor = kEigenFloor);

// Orthonormal basis (Hilbert-Schmidt) of traceless Hermitian d x d matrices.
std::vector<Matrix> traceless_hermitian_basis(std::size_t d);

}  // namespace chicap
