#pragma once
// Linear Hamiltonian systems J y' = B(x; lambda) y on [0,1]: the built-in
// families, boundary data, and the doubling used for general boundary conditions.

#include "maslov/errors.hpp"
#include "maslov/lagrangian.hpp"
#include "maslov/linalg.hpp"

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace maslov {

/// x -> matrix coefficient.
using CoefficientFn = std::function<Matrix(double)>;

inline CoefficientFn constant_coefficient(Matrix m) {
  return [m = std::move(m)](double) { return m; };
}

/// Open admissible range for the spectral parameter.
struct SpectralInterval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool contains(double lambda) const noexcept { return lambda > lo && lambda < hi; }
};

struct DiracCoefficients {
  CoefficientFn Q;
  CoefficientFn V;
};

struct SturmLiouvilleCoefficients {
  CoefficientFn P;
  CoefficientFn V;
  CoefficientFn Q;
};

struct BlockCoefficients {
  CoefficientFn R;
  CoefficientFn V;
  Eigen::Index r = 0;
};

/// Differential-algebraic system -(P11 phi1')' + V11 phi1 + V12 phi2 = lambda phi1,
/// V12^* phi1 + V22 phi2 = lambda phi2, with phi1 in C^m and phi2 in C^{n-m}.
struct DAEReduction {
  Eigen::Index m = 0;
  Eigen::Index n = 0;
  CoefficientFn P11;
  CoefficientFn V11;
  CoefficientFn V12;
  CoefficientFn V22;
};

class HamiltonianSystem;

struct DoubledSystemData {
  std::shared_ptr<const HamiltonianSystem> base;
};

using FamilyData =
    std::variant<std::monostate, DiracCoefficients, SturmLiouvilleCoefficients, BlockCoefficients, DAEReduction,
                 DoubledSystemData>;

class HamiltonianSystem {
 public:
  using Evaluator = std::function<Matrix(double x, double lambda)>;

  HamiltonianSystem(Eigen::Index n, SpectralInterval interval, Evaluator b, Evaluator b_lambda, FamilyData family = {},
                    std::vector<double> breakpoints = {})
      : n_(n),
        interval_(interval),
        b_(std::move(b)),
        b_lambda_(std::move(b_lambda)),
        family_(std::move(family)),
        breakpoints_(std::move(breakpoints)) {
    if (n_ <= 0) throw DimensionMismatch("system dimension must be positive");
  }

  Eigen::Index n() const noexcept { return n_; }
  const SpectralInterval& interval() const noexcept { return interval_; }
  Matrix eval_B(double x, double lambda) const { return b_(x, lambda); }
  Matrix eval_B_lambda(double x, double lambda) const { return b_lambda_(x, lambda); }
  const FamilyData& family() const noexcept { return family_; }

  /// Interior points where coefficients may jump; the integrator stops exactly on them.
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }

  std::string family_name() const {
    switch (family_.index()) {
      case 1: return "dirac";
      case 2: return "sturm_liouville";
      case 3: return "block";
      case 4: return "dae";
      case 5: return "doubled";
      default: return "custom";
    }
  }

  void require_lambda(double lambda) const {
    if (!interval_.contains(lambda))
      throw OutsideSpectralInterval("lambda = " + std::to_string(lambda) + " outside admissible interval (" +
                                    std::to_string(interval_.lo) + ", " + std::to_string(interval_.hi) + ")");
  }

 private:
  Eigen::Index n_;
  SpectralInterval interval_;
  Evaluator b_;
  Evaluator b_lambda_;
  FamilyData family_;
  std::vector<double> breakpoints_;
};

// ---------------------------------------------------------------- boundary data

/// alpha y(0) = 0, beta y(1) = 0 with alpha, beta of size n x 2n.
struct SeparatedBC {
  Matrix alpha;
  Matrix beta;
};

/// Theta (y(0); y(1)) = 0 with Theta of size 2n x 4n.
struct GeneralBC {
  Matrix theta;
};

using BoundaryConditions = std::variant<SeparatedBC, GeneralBC>;

/// diag(-J, J) of size 4n.
inline Matrix doubled_bc_form(Eigen::Index n) {
  Matrix j = Matrix::Zero(4 * n, 4 * n);
  j.topLeftCorner(2 * n, 2 * n) = -symplectic_j(n);
  j.bottomRightCorner(2 * n, 2 * n) = symplectic_j(n);
  return j;
}

namespace detail {

inline void check_bc_row(const Matrix& a, Eigen::Index rows, Eigen::Index cols, const Matrix& form, const char* name,
                         double tol) {
  if (a.rows() != rows || a.cols() != cols)
    throw DimensionMismatch(std::string(name) + " must be " + std::to_string(rows) + " x " + std::to_string(cols) +
                            ", got " + std::to_string(a.rows()) + " x " + std::to_string(a.cols()));
  if (nullity(a.adjoint(), 1e-10) != 0) throw InvalidBoundaryConditions(std::string(name) + " is not of full rank");
  const double scale = std::max(operator_norm(a), 1e-300);
  const double res = operator_norm(a * form * a.adjoint()) / (scale * scale);
  if (res > tol)
    throw InvalidBoundaryConditions(std::string(name) + " fails the self-adjointness condition: residual norm " +
                                    std::to_string(res));
}

}  // namespace detail

inline void validate_bc(const SeparatedBC& bc, Eigen::Index n, double tol = 1e-10) {
  detail::check_bc_row(bc.alpha, n, 2 * n, symplectic_j(n), "alpha", tol);
  detail::check_bc_row(bc.beta, n, 2 * n, symplectic_j(n), "beta", tol);
}

inline void validate_bc(const GeneralBC& bc, Eigen::Index n, double tol = 1e-10) {
  detail::check_bc_row(bc.theta, 2 * n, 4 * n, doubled_bc_form(n), "theta", tol);
}

inline void validate_bc(const BoundaryConditions& bc, Eigen::Index n, double tol = 1e-10) {
  std::visit([&](const auto& b) { validate_bc(b, n, tol); }, bc);
}

/// Theta = diag(alpha, beta): the separated conditions written as general ones.
inline GeneralBC to_general(const SeparatedBC& bc) {
  const Eigen::Index n = bc.alpha.rows();
  GeneralBC g{Matrix::Zero(2 * n, 4 * n)};
  g.theta.topLeftCorner(n, 2 * n) = bc.alpha;
  g.theta.bottomRightCorner(n, 2 * n) = bc.beta;
  return g;
}

// ---------------------------------------------------------------- coefficient checks

struct CoefficientCheckOptions {
  int samples = 21;
  double adjoint_tol = 1e-12;
};

namespace detail {

inline std::vector<double> sample_points(int count) {
  std::vector<double> xs(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) xs[static_cast<std::size_t>(k)] = count == 1 ? 0.5 : double(k) / (count - 1);
  return xs;
}

inline Matrix sample_square(const CoefficientFn& f, double x, Eigen::Index size, const char* name) {
  if (!f) throw InvalidCoefficients(std::string(name) + " is not set");
  Matrix m = f(x);
  if (m.rows() != size || m.cols() != size)
    throw DimensionMismatch(std::string(name) + " must be " + std::to_string(size) + " x " + std::to_string(size) +
                            ", got " + std::to_string(m.rows()) + " x " + std::to_string(m.cols()));
  if (!m.allFinite()) throw InvalidCoefficients(std::string(name) + " is not finite at x = " + std::to_string(x));
  return m;
}

inline void require_self_adjoint(const Matrix& m, double x, const char* name, double tol) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tol * scale)
    throw InvalidCoefficients(std::string(name) + " is not self-adjoint at x = " + std::to_string(x));
}

inline void require_positive(const Matrix& m, double x, const char* name) {
  if (!(min_hermitian_eigenvalue(m) > 0.0))
    throw InvalidCoefficients(std::string(name) + " is not positive definite at x = " + std::to_string(x));
}

inline void require_invertible(const Matrix& m, double x, const char* name) {
  if (nullity(m, 1e-12) != 0) throw InvalidCoefficients(std::string(name) + " is singular at x = " + std::to_string(x));
}

}  // namespace detail

// ---------------------------------------------------------------- families

/// J y' = (lambda Q + V) y with Q, V of size 2n x 2n.
inline HamiltonianSystem make_dirac(CoefficientFn Q, CoefficientFn V, const CoefficientCheckOptions& chk = {}) {
  if (!Q || !V) throw InvalidCoefficients("dirac: Q and V are required");
  const Matrix q0 = Q(0.0);
  if (q0.rows() % 2 != 0 || q0.rows() != q0.cols()) throw DimensionMismatch("dirac: Q must be 2n x 2n");
  const Eigen::Index n2 = q0.rows();
  for (double x : detail::sample_points(chk.samples)) {
    const Matrix q = detail::sample_square(Q, x, n2, "Q");
    const Matrix v = detail::sample_square(V, x, n2, "V");
    detail::require_self_adjoint(q, x, "Q", chk.adjoint_tol);
    detail::require_self_adjoint(v, x, "V", chk.adjoint_tol);
    detail::require_positive(q, x, "Q");
  }
  auto b = [Q, V](double x, double lambda) { return Matrix(lambda * Q(x) + V(x)); };
  auto bl = [Q](double x, double) { return Q(x); };
  return HamiltonianSystem(n2 / 2, {}, b, bl, DiracCoefficients{Q, V});
}

/// -(P phi')' + V phi = lambda Q phi in first-order form y = (phi, P phi').
inline HamiltonianSystem make_sturm_liouville(CoefficientFn P, CoefficientFn V, CoefficientFn Q,
                                              const CoefficientCheckOptions& chk = {}) {
  if (!P || !V || !Q) throw InvalidCoefficients("sturm_liouville: P, V and Q are required");
  const Eigen::Index n = P(0.0).rows();
  for (double x : detail::sample_points(chk.samples)) {
    const Matrix p = detail::sample_square(P, x, n, "P");
    const Matrix v = detail::sample_square(V, x, n, "V");
    const Matrix q = detail::sample_square(Q, x, n, "Q");
    detail::require_self_adjoint(p, x, "P", chk.adjoint_tol);
    detail::require_self_adjoint(v, x, "V", chk.adjoint_tol);
    detail::require_self_adjoint(q, x, "Q", chk.adjoint_tol);
    detail::require_invertible(p, x, "P");
    detail::require_positive(q, x, "Q");
  }
  auto b = [P, V, Q, n](double x, double lambda) {
    Matrix out = Matrix::Zero(2 * n, 2 * n);
    out.topLeftCorner(n, n) = lambda * Q(x) - V(x);
    out.bottomRightCorner(n, n) = hermitian_part(P(x).inverse());
    return out;
  };
  auto bl = [Q, n](double x, double) {
    Matrix out = Matrix::Zero(2 * n, 2 * n);
    out.topLeftCorner(n, n) = Q(x);
    return out;
  };
  return HamiltonianSystem(n, {}, b, bl, SturmLiouvilleCoefficients{P, V, Q});
}

/// J y' = (lambda Q + V) y with Q = diag(R, 0), R of size r x r.
inline HamiltonianSystem make_block(CoefficientFn R, CoefficientFn V, Eigen::Index r,
                                    const CoefficientCheckOptions& chk = {}) {
  if (!R || !V) throw InvalidCoefficients("block: R and V are required");
  const Matrix v0 = V(0.0);
  if (v0.rows() % 2 != 0 || v0.rows() != v0.cols()) throw DimensionMismatch("block: V must be 2n x 2n");
  const Eigen::Index n2 = v0.rows();
  if (r < 1 || r > n2) throw DimensionMismatch("block: r must lie in [1, 2n]");
  for (double x : detail::sample_points(chk.samples)) {
    const Matrix rr = detail::sample_square(R, x, r, "R");
    const Matrix v = detail::sample_square(V, x, n2, "V");
    detail::require_self_adjoint(rr, x, "R", chk.adjoint_tol);
    detail::require_self_adjoint(v, x, "V", chk.adjoint_tol);
    detail::require_positive(rr, x, "R");
  }
  auto q = [R, r, n2](double x) {
    Matrix out = Matrix::Zero(n2, n2);
    out.topLeftCorner(r, r) = R(x);
    return out;
  };
  auto b = [q, V](double x, double lambda) { return Matrix(lambda * q(x) + V(x)); };
  auto bl = [q](double x, double) { return q(x); };
  return HamiltonianSystem(n2 / 2, {}, b, bl, BlockCoefficients{R, V, r});
}

/// Sampled eigenvalue ranges of V22 over the grid, merged into disjoint closed intervals.
inline std::vector<std::pair<double, double>> dae_essential_spectrum(const DAEReduction& red,
                                                                     const std::vector<double>& x_grid) {
  const Eigen::Index k = red.n - red.m;
  if (k <= 0 || x_grid.empty()) return {};
  std::vector<std::pair<double, double>> branches(static_cast<std::size_t>(k),
                                                  {std::numeric_limits<double>::infinity(),
                                                   -std::numeric_limits<double>::infinity()});
  for (double x : x_grid) {
    const RealVector ev = hermitian_eigenvalues(red.V22(x));
    for (Eigen::Index j = 0; j < k; ++j) {
      auto& b = branches[static_cast<std::size_t>(j)];
      b.first = std::min(b.first, ev(j));
      b.second = std::max(b.second, ev(j));
    }
  }
  std::sort(branches.begin(), branches.end());
  std::vector<std::pair<double, double>> merged;
  for (const auto& b : branches) {
    if (!merged.empty() && b.first <= merged.back().second)
      merged.back().second = std::max(merged.back().second, b.second);
    else
      merged.push_back(b);
  }
  return merged;
}

inline std::vector<double> uniform_grid(std::size_t count, double a = 0.0, double b = 1.0) {
  std::vector<double> g(count);
  for (std::size_t k = 0; k < count; ++k) g[k] = count == 1 ? a : a + (b - a) * double(k) / double(count - 1);
  if (count > 1) g.back() = b;
  return g;
}

enum class EssentialSpectrumPolicy { reject, allow };

/// Schur-reduced system of half-dimension m with B = diag(lambda I - V(x; lambda), P11^{-1}),
/// V(x; lambda) = V11 + V12 (lambda I - V22)^{-1} V12^*.
inline HamiltonianSystem make_dae(const DAEReduction& red, std::pair<double, double> window,
                                  EssentialSpectrumPolicy policy = EssentialSpectrumPolicy::reject,
                                  const CoefficientCheckOptions& chk = {}) {
  if (red.m <= 0 || red.m >= red.n) throw DimensionMismatch("dae: need 0 < m < n");
  const Eigen::Index m = red.m;
  const Eigen::Index k = red.n - red.m;
  for (double x : detail::sample_points(chk.samples)) {
    const Matrix p = detail::sample_square(red.P11, x, m, "P11");
    const Matrix v11 = detail::sample_square(red.V11, x, m, "V11");
    const Matrix v22 = detail::sample_square(red.V22, x, k, "V22");
    const Matrix v12 = red.V12(x);
    if (v12.rows() != m || v12.cols() != k) throw DimensionMismatch("V12 must be m x (n-m)");
    detail::require_self_adjoint(p, x, "P11", chk.adjoint_tol);
    detail::require_self_adjoint(v11, x, "V11", chk.adjoint_tol);
    detail::require_self_adjoint(v22, x, "V22", chk.adjoint_tol);
    detail::require_invertible(p, x, "P11");
  }
  const auto ess = dae_essential_spectrum(red, uniform_grid(401));
  SpectralInterval interval;
  for (const auto& [lo, hi] : ess) {
    const bool touches = window.first <= hi && window.second >= lo;
    if (touches && policy == EssentialSpectrumPolicy::reject)
      throw WindowTouchesEssentialSpectrum("window [" + std::to_string(window.first) + ", " +
                                           std::to_string(window.second) + "] meets essential spectrum [" +
                                           std::to_string(lo) + ", " + std::to_string(hi) + "]");
    if (!touches) {
      if (hi < window.first) interval.lo = std::max(interval.lo, hi);
      if (lo > window.second) interval.hi = std::min(interval.hi, lo);
    }
  }
  if (policy == EssentialSpectrumPolicy::allow) interval = {};
  auto resolvent_coupling = [red, k](double x, double lambda) {
    const Matrix shifted = lambda * Matrix::Identity(k, k) - red.V22(x);
    Eigen::FullPivLU<Matrix> lu(shifted);
    if (!lu.isInvertible())
      throw InversionFailure("lambda I - V22 is singular at x = " + std::to_string(x) + ", lambda = " +
                             std::to_string(lambda));
    return Matrix(lu.solve(red.V12(x).adjoint()));
  };
  auto b = [red, m, resolvent_coupling](double x, double lambda) {
    const Matrix c = resolvent_coupling(x, lambda);
    Matrix out = Matrix::Zero(2 * m, 2 * m);
    out.topLeftCorner(m, m) = hermitian_part(lambda * Matrix::Identity(m, m) - red.V11(x) - red.V12(x) * c);
    out.bottomRightCorner(m, m) = hermitian_part(red.P11(x).inverse());
    return out;
  };
  auto bl = [m, resolvent_coupling](double x, double lambda) {
    // I - V_lambda with V_lambda = -C^* C, C = (lambda I - V22)^{-1} V12^*.
    const Matrix c = resolvent_coupling(x, lambda);
    Matrix out = Matrix::Zero(2 * m, 2 * m);
    out.topLeftCorner(m, m) = Matrix::Identity(m, m) + c.adjoint() * c;
    return out;
  };
  return HamiltonianSystem(m, interval, b, bl, red);
}

/// V(x; lambda) of the reduction.
inline Matrix dae_effective_potential(const DAEReduction& red, double x, double lambda) {
  const Eigen::Index k = red.n - red.m;
  const Matrix shifted = lambda * Matrix::Identity(k, k) - red.V22(x);
  return red.V11(x) + red.V12(x) * shifted.fullPivLu().solve(red.V12(x).adjoint());
}

// ---------------------------------------------------------------- doubling

/// Trace matrix M: (a, b, c, d) -> (a, c, -b, d) in n-blocks.
inline Matrix trace_matrix(Eigen::Index n) {
  Matrix m = Matrix::Zero(4 * n, 4 * n);
  const Matrix id = Matrix::Identity(n, n);
  m.block(0, 0, n, n) = id;
  m.block(n, 2 * n, n, n) = id;
  m.block(2 * n, n, n, n) = -id;
  m.block(3 * n, 3 * n, n, n) = id;
  return m;
}

namespace detail {

/// Embed B's blocks at positions 2 and 4 of the n-block pattern.
inline Matrix embed_doubled(const Matrix& b, Eigen::Index n) {
  Matrix out = Matrix::Zero(4 * n, 4 * n);
  out.block(n, n, n, n) = b.topLeftCorner(n, n);
  out.block(n, 3 * n, n, n) = b.topRightCorner(n, n);
  out.block(3 * n, n, n, n) = b.bottomLeftCorner(n, n);
  out.block(3 * n, 3 * n, n, n) = b.bottomRightCorner(n, n);
  return out;
}

}  // namespace detail

/// The 4n x 4n system carrying (y(0), y(x)) in trace coordinates.
inline HamiltonianSystem double_system(const HamiltonianSystem& sys) {
  auto base = std::make_shared<const HamiltonianSystem>(sys);
  const Eigen::Index n = sys.n();
  auto b = [base, n](double x, double lambda) { return detail::embed_doubled(base->eval_B(x, lambda), n); };
  auto bl = [base, n](double x, double lambda) { return detail::embed_doubled(base->eval_B_lambda(x, lambda), n); };
  return HamiltonianSystem(2 * n, sys.interval(), b, bl, DoubledSystemData{base}, sys.breakpoints());
}

/// X3(0) = (I 0; I 0; 0 -I; 0 I), the trace of every solution at x = 0.
inline LagrangianFrame doubled_initial_frame(Eigen::Index n) {
  Matrix f = Matrix::Zero(4 * n, 2 * n);
  const Matrix id = Matrix::Identity(n, n);
  f.block(0, 0, n, n) = id;
  f.block(n, 0, n, n) = id;
  f.block(2 * n, n, n, n) = -id;
  f.block(3 * n, n, n, n) = id;
  return LagrangianFrame(f);
}

/// M diag(-J, J) Theta^*.
inline LagrangianFrame doubled_target_frame(const GeneralBC& bc) {
  const Eigen::Index n = bc.theta.rows() / 2;
  return LagrangianFrame(Matrix(trace_matrix(n) * doubled_bc_form(n) * bc.theta.adjoint()));
}

/// Jalpha^* and Jbeta^*.
inline LagrangianFrame left_boundary_frame(const SeparatedBC& bc) {
  return LagrangianFrame(apply_j(bc.alpha.adjoint()));
}
inline LagrangianFrame right_boundary_frame(const SeparatedBC& bc) {
  return LagrangianFrame(apply_j(bc.beta.adjoint()));
}

}  // namespace maslov
