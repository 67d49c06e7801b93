#pragma once

// Independent reference implementations used as test oracles. Nothing here calls the
// library's linear algebra beyond Eigen's own eigen-solver.

#include "chicap/channel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

using chicap::Complex;
using chicap::Matrix;

inline double h2(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

// rho_HK[(i k),(j l)] summed over the traced index, written as explicit loops.
inline Matrix trace_out_k(const Matrix& m, int dh, int dk) {
  Matrix out = Matrix::Zero(dh, dh);
  for (int i = 0; i < dh; ++i)
    for (int j = 0; j < dh; ++j)
      for (int k = 0; k < dk; ++k) out(i, j) += m(i * dk + k, j * dk + k);
  return out;
}

inline Matrix trace_out_h(const Matrix& m, int dh, int dk) {
  Matrix out = Matrix::Zero(dk, dk);
  for (int k = 0; k < dk; ++k)
    for (int l = 0; l < dk; ++l)
      for (int i = 0; i < dh; ++i) out(k, l) += m(i * dk + k, i * dk + l);
  return out;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      for (int k = 0; k < b.rows(); ++k)
        for (int l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

inline double entropy(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()));
  double h = 0.0;
  for (int k = 0; k < es.eigenvalues().size(); ++k) {
    const double v = es.eigenvalues()[k];
    if (v > 1e-15) h -= v * std::log2(v);
  }
  return h;
}

// Tr rho (log2 rho - log2 sigma) for sigma of full rank.
inline double relative_entropy(const Matrix& rho, const Matrix& sigma) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (sigma + sigma.adjoint()));
  Matrix logs = Matrix::Zero(sigma.rows(), sigma.cols());
  for (int k = 0; k < es.eigenvalues().size(); ++k) {
    const auto v = es.eigenvectors().col(k);
    logs += std::log2(es.eigenvalues()[k]) * v * v.adjoint();
  }
  return -entropy(rho) - (rho * logs).trace().real();
}

// 2x2 entropy from the Bloch vector length alone.
inline double qubit_entropy(const Matrix& rho) {
  const double x = 2.0 * rho(0, 1).real();
  const double y = -2.0 * rho(0, 1).imag();
  const double z = (rho(0, 0) - rho(1, 1)).real();
  const double r = std::min(1.0, std::sqrt(x * x + y * y + z * z));
  return h2(0.5 * (1.0 + r));
}

inline Matrix apply(const std::vector<Matrix>& kraus, const Matrix& rho) {
  Matrix out = Matrix::Zero(kraus.front().rows(), kraus.front().rows());
  for (const Matrix& k : kraus) out += k * rho * k.adjoint();
  return out;
}

inline Matrix bloch_state(double theta, double phi) {
  Matrix rho(2, 2);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  rho(0, 0) = 0.5 * (1.0 + c);
  rho(1, 1) = 0.5 * (1.0 - c);
  rho(0, 1) = 0.5 * s * Complex(std::cos(phi), -std::sin(phi));
  rho(1, 0) = std::conj(rho(0, 1));
  return rho;
}

// Brute force over pairs of grid points on the Bloch sphere and a weight grid for a
// qubit-to-qubit channel, working with output Bloch vectors. The grid contains antipodal pairs,
// so it is exact for unital covariant channels up to the weight grid; a lower bound in general.
inline double bloch_grid_capacity(const std::vector<Matrix>& kraus, int n_theta = 40, int n_phi = 16, int n_w = 40) {
  struct Out {
    double x, y, z, h;
  };
  std::vector<Out> outs;
  const double pi = std::acos(-1.0);
  for (int a = 0; a <= n_theta; ++a) {
    const double theta = pi * a / n_theta;
    const int nphi = (a == 0 || a == n_theta) ? 1 : n_phi;
    for (int b = 0; b < nphi; ++b) {
      const Matrix o = oracle::apply(kraus, bloch_state(theta, 2.0 * pi * b / n_phi));
      outs.push_back({2.0 * o(0, 1).real(), -2.0 * o(0, 1).imag(), (o(0, 0) - o(1, 1)).real(), qubit_entropy(o)});
    }
  }
  double best = 0.0;
  for (std::size_t i = 0; i < outs.size(); ++i)
    for (std::size_t j = i + 1; j < outs.size(); ++j)
      for (int w = 1; w < n_w; ++w) {
        const double p = static_cast<double>(w) / n_w;
        const double x = p * outs[i].x + (1.0 - p) * outs[j].x;
        const double y = p * outs[i].y + (1.0 - p) * outs[j].y;
        const double z = p * outs[i].z + (1.0 - p) * outs[j].z;
        const double r = std::min(1.0, std::sqrt(x * x + y * y + z * z));
        best = std::max(best, h2(0.5 * (1.0 + r)) - p * outs[i].h - (1.0 - p) * outs[j].h);
      }
  return best;
}

}  // namespace oracle
