#pragma once
// Small dense complex linear algebra helpers shared by every module.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace maslov {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr double pi = std::numbers::pi;
inline constexpr Complex I_unit{0.0, 1.0};

/// Standard symplectic matrix J = [0 -I; I 0] of size 2n.
inline Matrix symplectic_j(Eigen::Index n) {
  Matrix j = Matrix::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n) = -Matrix::Identity(n, n);
  j.bottomLeftCorner(n, n) = Matrix::Identity(n, n);
  return j;
}

/// Left-multiply by J without forming it: J (X;Y) = (-Y; X).
inline Matrix apply_j(const Matrix& m) {
  const Eigen::Index n = m.rows() / 2;
  Matrix out(m.rows(), m.cols());
  out.topRows(n) = -m.bottomRows(n);
  out.bottomRows(n) = m.topRows(n);
  return out;
}

inline double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

inline Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

/// Eigenvalues of the Hermitian part of m, ascending.
inline RealVector hermitian_eigenvalues(const Matrix& m) {
  if (m.size() == 0) return RealVector();
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

inline double min_hermitian_eigenvalue(const Matrix& m) {
  const RealVector ev = hermitian_eigenvalues(m);
  return ev.size() ? ev(0) : 0.0;
}

inline Vector complex_eigenvalues(const Matrix& m) {
  Eigen::ComplexEigenSolver<Matrix> es(m, false);
  return es.eigenvalues();
}

/// Moore–Penrose pseudoinverse; singular values below rel_cutoff * sigma_max are dropped.
inline Matrix pseudo_inverse(const Matrix& m, double rel_cutoff) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RealVector& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  RealVector inv = RealVector::Zero(s.size());
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > rel_cutoff * smax && s(k) > 0.0) inv(k) = 1.0 / s(k);
  return svd.matrixV().leftCols(s.size()) * inv.cast<Complex>().asDiagonal() *
         svd.matrixU().leftCols(s.size()).adjoint();
}

/// Number of singular values at or below rel_tol * sigma_max (plus missing rank for wide matrices).
inline Eigen::Index nullity(const Matrix& m, double rel_tol) {
  if (m.cols() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const RealVector& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > rel_tol * std::max(smax, 1e-300)) ++rank;
  return m.cols() - rank;
}

/// Orthonormal basis for the column space via thin Householder QR.
/// The returned R satisfies m = Q R.
struct ThinQr {
  Matrix q;
  Matrix r;
};

inline ThinQr thin_qr(const Matrix& m) {
  Eigen::HouseholderQR<Matrix> qr(m);
  const Eigen::Index k = m.cols();
  ThinQr out;
  out.q = qr.householderQ() * Matrix::Identity(m.rows(), k);
  out.r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  return out;
}

/// Phase difference wrapped into (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * pi);
  if (a <= -pi) a += 2.0 * pi;
  return a;
}

/// Signed angle of z relative to the unit-modulus reference point, in (-pi, pi].
inline double relative_phase(Complex z, Complex point) { return std::arg(z / point); }

}  // namespace maslov
