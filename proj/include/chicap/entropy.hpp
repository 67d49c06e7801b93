#pragma once

#include "chicap/state.hpp"

#include <limits>

namespace chicap {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

double entropy(const DensityMatrix& rho);

// -Tr S log S for a positive operator with trace in [0, 1].
double subnormalized_entropy(const Matrix& s);

// Tr rho (log rho - log sigma); +infinity when supp(rho) is not inside supp(sigma).
double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma);

double binary_entropy(double x);

double block_entropy(const BlockState& b);

namespace detail {

// Unvalidated kernels shared by the optimizers. Inputs are assumed Hermitian PSD.
double entropy_of_spectrum(const RealVector& values);
double subnormalized_entropy_raw(const Matrix& s);
// Tr X (log X - log Y) for positive X, Y (no trace correction); +inf on support violation.
double relative_entropy_raw(const Matrix& x, const Matrix& y);

}  // namespace detail
}  // namespace chicap
