#pragma once
// Systems and random data shared by the test suites and the acceptance run.

#include "maslov/maslov.hpp"

#include <cmath>
#include <random>

namespace maslov::testing {

inline SeparatedBC dirichlet1() {
  Matrix a(1, 2);
  a << 1, 0;
  return {a, a};
}

/// -phi'' = lambda phi, Dirichlet; eigenvalues (k pi)^2.
inline HamiltonianSystem scalar_sl() {
  return make_sturm_liouville(constant_coefficient(Matrix::Identity(1, 1)), constant_coefficient(Matrix::Zero(1, 1)),
                              constant_coefficient(Matrix::Identity(1, 1)));
}

/// J y' = lambda y, y1(0) = y1(1) = 0; eigenvalues k pi.
inline HamiltonianSystem scalar_dirac() {
  return make_dirac(constant_coefficient(Matrix::Identity(2, 2)), constant_coefficient(Matrix::Zero(2, 2)));
}

inline Matrix dirac_paper_potential(double x) {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = .13 + .7 * std::cos(6 * pi * x) / (2 + std::cos(6 * pi * x));
  m(0, 1) = m(1, 0) = std::cos(pi * x) / (2 + std::cos(4 * pi * x));
  m(1, 1) = 1;
  return m;
}

inline HamiltonianSystem dirac_paper() {
  return make_dirac(constant_coefficient(Matrix::Identity(4, 4)), dirac_paper_potential);
}

/// alpha = beta = (0 I): the second component vanishes at both ends.
inline SeparatedBC dirac_paper_bc() {
  Matrix a = Matrix::Zero(2, 4);
  a(0, 2) = 1;
  a(1, 3) = 1;
  return {a, a};
}

inline Matrix sl_paper_potential(double x) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = -2.7;
  m(0, 1) = m(1, 0) = -18 * std::sin(3 * x) + .0081 * x * x;
  return m;
}

inline HamiltonianSystem sl_paper() {
  return make_sturm_liouville(constant_coefficient(Matrix::Identity(2, 2)), sl_paper_potential,
                              constant_coefficient(9.0 * Matrix::Identity(2, 2)));
}

/// phi + phi'/3 = 0 at both ends.
inline SeparatedBC sl_paper_bc() {
  const double s = 1 / std::sqrt(2.0);
  Matrix a = Matrix::Zero(2, 4);
  a(0, 0) = a(1, 1) = s;
  a(0, 2) = a(1, 3) = s / 3;
  return {a, a};
}

inline DAEReduction dae_paper_reduction() {
  DAEReduction r;
  r.m = 2;
  r.n = 4;
  r.P11 = constant_coefficient(Matrix::Identity(2, 2));
  r.V11 = [](double x) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = -8 - .7 * std::cos(6 * pi * x) / (2 + std::cos(6 * pi * x));
    m(0, 1) = m(1, 0) = -std::cos(pi * x) / (2 + std::cos(4 * pi * x));
    m(1, 1) = 1;
    return m;
  };
  r.V12 = constant_coefficient(Matrix::Identity(2, 2));
  r.V22 = [](double x) { return Matrix((1 - .8 * x * std::sin(x)) * Matrix::Identity(2, 2)); };
  return r;
}

inline HamiltonianSystem dae_paper(std::pair<double, double> window) { return make_dae(dae_paper_reduction(), window); }

/// Neumann on phi1: alpha = beta = (0 I).
inline SeparatedBC dae_paper_bc() { return dirac_paper_bc(); }

inline Matrix random_complex(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> g;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

inline Matrix random_unitary(std::mt19937_64& rng, Eigen::Index n) {
  return thin_qr(random_complex(rng, n, n)).q;
}

/// Frame ((I + U)/2; (U - I)/(2i)) C, whose plus Cayley factor is U.
inline Matrix frame_from_unitary(const Matrix& u, const Matrix& c) {
  const Eigen::Index n = u.rows();
  const Matrix id = Matrix::Identity(n, n);
  Matrix f(2 * n, n);
  f.topRows(n) = 0.5 * (id + u);
  f.bottomRows(n) = (u - id) / Complex(0.0, 2.0);
  return f * c;
}

inline Matrix random_invertible(std::mt19937_64& rng, Eigen::Index n) {
  return random_complex(rng, n, n) + 3.0 * Matrix::Identity(n, n);
}

/// Random pair of Lagrangian frames whose subspaces meet in exactly `k` dimensions.
inline std::pair<LagrangianFrame, LagrangianFrame> random_pair(std::mt19937_64& rng, Eigen::Index n, Eigen::Index k) {
  std::uniform_real_distribution<double> phase(0.3, 2 * pi - 0.3);
  const Matrix u2 = random_unitary(rng, n);
  const Matrix v = random_unitary(rng, n);
  Vector d(n);
  for (Eigen::Index j = 0; j < n; ++j) d(j) = j < k ? Complex(1.0, 0.0) : std::polar(1.0, phase(rng));
  const Matrix u1 = v * d.asDiagonal() * v.adjoint() * u2;
  return {LagrangianFrame(frame_from_unitary(u1, random_invertible(rng, n))),
          LagrangianFrame(frame_from_unitary(u2, random_invertible(rng, n)))};
}

}  // namespace maslov::testing
