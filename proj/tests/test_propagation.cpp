#include "support.hpp"

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

using namespace maslov;
using namespace maslov::testing;

namespace {

HamiltonianSystem constant_system(const Matrix& b) {
  auto eval = [b](double, double) { return b; };
  auto deriv = [n = b.rows()](double, double) { return Matrix(Matrix::Zero(n, n)); };
  return HamiltonianSystem(b.rows() / 2, {}, eval, deriv);
}

Matrix random_hermitian(std::mt19937_64& rng, Eigen::Index n) {
  const Matrix a = random_complex(rng, n, n);
  return 0.5 * (a + a.adjoint());
}

LagrangianFrame frame_of(const Matrix& v) { return LagrangianFrame(v); }

}  // namespace

TEST(IntegrateFrame, ZeroCoefficientKeepsFrame) {
  std::mt19937_64 rng(1);
  const auto init = random_pair(rng, 2, 0).first;
  const auto sys = constant_system(Matrix::Zero(4, 4));
  const auto path = integrate_frame(sys, 0.0, init, PathDirection::forward, uniform_grid(21));
  for (const auto& f : path.frames()) EXPECT_LT(grassmann_distance(f, init), 1e-13);
  const auto fs = fundamental_solution(sys, 0.0, uniform_grid(11));
  for (const auto& m : fs.matrices) EXPECT_LT(operator_norm(m - Matrix::Identity(4, 4)), 1e-15);
}

TEST(IntegrateFrame, DiracRotation) {
  Matrix d(2, 1);
  d << 0, 1;
  const auto path = integrate_frame(scalar_dirac(), pi, frame_of(d), PathDirection::forward, uniform_grid(5));
  for (std::size_t k = 0; k < path.size(); ++k) {
    const double x = path.grid()[k];
    Matrix expected(2, 1);
    expected << std::sin(pi * x), std::cos(pi * x);
    EXPECT_LT(grassmann_distance(path.frames()[k], frame_of(expected)), 1e-9) << x;
  }
  EXPECT_LT(grassmann_distance(path.frames().back(), frame_of(d)), 1e-9);
}

TEST(IntegrateFrame, DiracPaperStaysLagrangian) {
  const auto init = left_boundary_frame(dirac_paper_bc());
  for (double lambda : {-1.0, 0.0, 1.0}) {
    const auto path = integrate_frame(dirac_paper(), lambda, init, PathDirection::forward, uniform_grid(401));
    EXPECT_LE(path.max_lagrangian_residual(), 1e-8);
  }
}

TEST(IntegrateFrame, OffGridMatchesDirectPropagation) {
  const auto init = left_boundary_frame(sl_paper_bc());
  const auto path = integrate_frame(sl_paper(), 1.3, init, PathDirection::forward, uniform_grid(11));
  for (double x : {0.05, 0.333, 0.97}) {
    const auto direct = propagate_frame(sl_paper(), 1.3, init, 0.0, x);
    EXPECT_LT(grassmann_distance(path.at(x), direct), 1e-8) << x;
  }
}

TEST(IntegrateFrame, BackwardPathEndsOnTarget) {
  const auto target = right_boundary_frame(sl_paper_bc());
  const auto back = integrate_frame(sl_paper(), -0.7, target, PathDirection::backward, uniform_grid(101));
  EXPECT_LT(grassmann_distance(back.frames().back(), target), 1e-14);
  const auto forward = propagate_frame(sl_paper(), -0.7, back.frames().front(), 0.0, 1.0);
  EXPECT_LT(grassmann_distance(forward, target), 1e-8);
  const auto mid = propagate_frame(sl_paper(), -0.7, back.frames().front(), 0.0, back.grid()[40]);
  EXPECT_LT(grassmann_distance(mid, back.frames()[40]), 1e-8);
}

TEST(IntegrateFrame, Errors) {
  Matrix d(2, 1);
  d << 0, 1;
  EXPECT_THROW(integrate_frame(sl_paper(), 0.0, frame_of(d), PathDirection::forward, uniform_grid(5)),
               DimensionMismatch);
  EXPECT_THROW(integrate_frame(scalar_dirac(), 0.0, frame_of(d), PathDirection::forward, {0.0, 0.5, 0.5, 1.0}),
               Error);
  EXPECT_THROW(integrate_frame(scalar_dirac(), 0.0, frame_of(d), PathDirection::forward, {0.0}), Error);
  EXPECT_THROW(integrate_frame(dae_paper({-10, 0.2}), 0.5, left_boundary_frame(dae_paper_bc()),
                               PathDirection::forward, uniform_grid(5)),
               OutsideSpectralInterval);
}

TEST(FundamentalSolution, ConstantCoefficientMatchesExponential) {
  std::mt19937_64 rng(17);
  for (Eigen::Index n : {1, 2, 3}) {
    const Matrix b = random_hermitian(rng, 2 * n);
    const auto fs = fundamental_solution(constant_system(b), 0.0, {0.25, 0.5, 1.0});
    const Matrix jb = -apply_j(b);
    for (std::size_t k = 0; k < fs.grid.size(); ++k) {
      const Matrix expected = (jb * fs.grid[k]).exp();
      EXPECT_LT(operator_norm(fs.matrices[k] - expected) / operator_norm(expected), 1e-8) << n << " " << fs.grid[k];
    }
    EXPECT_LE(fs.conservation_residual(), 1e-8);
  }
}

TEST(FundamentalSolution, ConservationOnPaperSystems) {
  const auto grid = uniform_grid(201);
  for (double lambda : {-2.0, 0.0, 2.0}) {
    EXPECT_LE(fundamental_solution(sl_paper(), lambda, grid).conservation_residual(), 1e-8);
    EXPECT_LE(fundamental_solution(dirac_paper(), lambda, grid).conservation_residual(), 1e-8);
  }
  EXPECT_LE(fundamental_solution(dae_paper({-10, 0.2}), -5.0, grid).conservation_residual(), 1e-8);
}

TEST(CanonicalFrames, BoundaryFrames) {
  const Matrix f = left_boundary_frame(dirac_paper_bc()).data();
  Matrix expected = Matrix::Zero(4, 2);
  expected.topRows(2) = -Matrix::Identity(2, 2);
  EXPECT_LT(operator_norm(f - expected), 1e-15);
}

TEST(CanonicalFrames, PaperDiracPaths) {
  const auto cf = canonical_frames(dirac_paper(), dirac_paper_bc(), -1, 1, uniform_grid(401));
  EXPECT_FALSE(cf.doubled);
  EXPECT_LE(cf.first.max_lagrangian_residual(), 1e-8);
  EXPECT_LE(cf.second.max_lagrangian_residual(), 1e-8);
  EXPECT_EQ(cf.first.lambda(), -1);
  EXPECT_EQ(cf.second.lambda(), 1);
  EXPECT_LT(grassmann_distance(cf.second.frames().back(), right_boundary_frame(dirac_paper_bc())), 1e-14);
  EXPECT_THROW(canonical_frames(dirac_paper(), dirac_paper_bc(), 1, -1, uniform_grid(5)), Error);
}

TEST(CanonicalFrames, GeneralConditionsUseDoubledSystem) {
  const auto cf = canonical_frames(sl_paper(), to_general(sl_paper_bc()), -1, 1, uniform_grid(201));
  EXPECT_TRUE(cf.doubled);
  EXPECT_EQ(cf.working_system->n(), 4);
  EXPECT_LE(cf.first.max_lagrangian_residual(), 1e-8);
  EXPECT_LE(cf.second.max_lagrangian_residual(), 1e-8);
}
