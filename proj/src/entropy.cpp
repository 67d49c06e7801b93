#include "chicap/entropy.hpp"

#include "chicap/errors.hpp"

#include <algorithm>
#include <cmath>

namespace chicap {

namespace detail {

double entropy_of_spectrum(const RealVector& values) {
  double h = 0.0;
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    const double x = values[k];
    if (x > kEigenFloor) h -= x * std::log(x);
  }
  return to_bits(h);
}

double subnormalized_entropy_raw(const Matrix& s) {
  if (s.size() == 0) return 0.0;
  return entropy_of_spectrum(eigenvalues_h(s));
}

double relative_entropy_raw(const Matrix& x, const Matrix& y) {
  const Spectrum sx = eigh(x);
  const Spectrum sy = eigh(y);
  // Tr X log X
  double first = 0.0;
  for (Eigen::Index k = 0; k < sx.values.size(); ++k) {
    const double v = sx.values[k];
    if (v > kEigenFloor) first += v * std::log(v);
  }
  // Tr X log Y evaluated in Y's eigenbasis.
  double second = 0.0;
  for (Eigen::Index k = 0; k < sy.values.size(); ++k) {
    const Vector e = sy.vectors.col(k);
    const double weight = (e.adjoint() * x * e)(0, 0).real();
    const double mu = sy.values[k];
    if (mu < kEigenFloor) {
      if (weight > 1e-10) return kInfinity;
      continue;
    }
    second += weight * std::log(mu);
  }
  return to_bits(first - second);
}

}  // namespace detail

double entropy(const DensityMatrix& rho) {
  // Rounding in the eigenvalues can push the sum a few ulps outside [0, log2 d].
  const double h = detail::entropy_of_spectrum(eigenvalues_h(rho.matrix()));
  return std::clamp(h, 0.0, std::log2(static_cast<double>(rho.dim())));
}

double subnormalized_entropy(const Matrix& s) {
  if (s.rows() != s.cols()) throw InvalidInput("subnormalized_entropy: matrix must be square");
  if (s.size() == 0) return 0.0;
  if (!all_finite(s) || hermiticity_residual(s) > 1e-10)
    throw InvalidInput("subnormalized_entropy: matrix is not Hermitian");
  const RealVector ev = eigenvalues_h(s);
  if (ev.minCoeff() < -kPsdTol) throw InvalidInput("subnormalized_entropy: negative eigenvalue");
  const double tr = ev.sum();
  if (tr > 1.0 + kTraceTol) throw InvalidInput("subnormalized_entropy: trace exceeds 1");
  return detail::entropy_of_spectrum(ev);
}

double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw InvalidInput("relative_entropy: dimension mismatch");
  const double d = detail::relative_entropy_raw(rho.matrix(), sigma.matrix());
  return d < 0.0 ? 0.0 : d;
}

double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidInput("binary_entropy: argument outside [0, 1]");
  double h = 0.0;
  if (x > 0.0) h -= x * log_base(x);
  if (x < 1.0) h -= (1.0 - x) * log_base(1.0 - x);
  return h;
}

double block_entropy(const BlockState& b) {
  double h = 0.0;
  for (const auto& block : b.blocks()) h += detail::subnormalized_entropy_raw(block);
  return h;
}

}  // namespace chicap
