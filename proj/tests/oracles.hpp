#pragma once

// Reference implementations used only by the tests. Nothing here is shared with
// the library, so agreement is evidence rather than tautology.

#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Dense>

namespace oracle {

using cd = std::complex<double>;
using MatrixXcd = Eigen::MatrixXcd;
using VectorXcd = Eigen::VectorXcd;

/// exp(A) by [13/13] Pade approximation with scaling and squaring (Higham 2005).
inline MatrixXcd expm(const MatrixXcd& A) {
  static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;
  const Eigen::Index n = A.rows();
  const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm1 > theta13) s = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  const MatrixXcd X = A / std::ldexp(1.0, s);
  const MatrixXcd I = MatrixXcd::Identity(n, n);
  const MatrixXcd X2 = X * X, X4 = X2 * X2, X6 = X4 * X2;
  const MatrixXcd U =
      X * (X6 * (b[13] * X6 + b[11] * X4 + b[9] * X2) + b[7] * X6 + b[5] * X4 + b[3] * X2 + b[1] * I);
  const MatrixXcd V = X6 * (b[12] * X6 + b[10] * X4 + b[8] * X2) + b[6] * X6 + b[4] * X4 + b[2] * X2 + b[0] * I;
  MatrixXcd R = (V - U).partialPivLu().solve(V + U);
  for (int k = 0; k < s; ++k) R = R * R;
  return R;
}

/// exp(-i H t) for Hermitian H through its eigendecomposition.
inline MatrixXcd hermitian_propagator(const MatrixXcd& H, double t) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(H);
  const Eigen::VectorXcd phases = (es.eigenvalues().cast<cd>() * cd(0, -t)).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

inline MatrixXcd random_hermitian(Eigen::Index n, std::mt19937_64& gen, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  MatrixXcd M(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) M(i, j) = cd(dist(gen), dist(gen));
  return (M + M.adjoint()) / 2.0;
}

/// Random Hermitian matrix rescaled to spectral norm `norm`.
inline MatrixXcd random_hermitian_unit(Eigen::Index n, std::mt19937_64& gen, double norm = 1.0) {
  MatrixXcd H = random_hermitian(n, gen);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(H, Eigen::EigenvaluesOnly);
  return H * (norm / es.eigenvalues().cwiseAbs().maxCoeff());
}

inline VectorXcd random_unit_vector(Eigen::Index n, std::mt19937_64& gen) {
  std::normal_distribution<double> dist(0.0, 1.0);
  VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = cd(dist(gen), dist(gen));
  return v / v.norm();
}

}  // namespace oracle
