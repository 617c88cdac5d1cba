#pragma once
// Independent eigenvalue counts: a dense finite-difference eigensolver and the
// fixed-target Maslov index computation.

#include "maslov/errors.hpp"
#include "maslov/hamiltonian.hpp"
#include "maslov/maslov_flow.hpp"
#include "maslov/renormalized_count.hpp"

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

namespace maslov {

struct FdOptions {
  double h = 1.0 / 200;
  /// Repeat at h/2 and flag eigenvalues too close to a window end.
  bool refine = true;
  /// Ambiguity radius in units of |lambda(h) - lambda(h/2)|.
  double ambiguity_factor = 10.0;
};

struct OracleReport {
  int count = 0;
  std::vector<double> eigenvalues_in_window;
  double h = 0.0;
  Eigen::Index dimension = 0;
  /// Coarse-mesh data when refine is set (the fields above then refer to h/2).
  int coarse_count = 0;
  std::vector<double> coarse_eigenvalues_in_window;
  double coarse_h = 0.0;
  /// Largest |lambda(h) - lambda(h/2)| over eigenvalues near the window.
  double max_shift = 0.0;
};

namespace detail {

/// Assembled generalized problem K u = lambda M u.
struct FdProblem {
  Matrix k;
  Matrix m;
};

inline Matrix range_basis_of(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU);
  const RealVector& s = svd.singularValues();
  Eigen::Index r = 0;
  for (Eigen::Index j = 0; j < s.size(); ++j)
    if (s(j) > 1e-12 * std::max(1.0, s(0))) ++r;
  return svd.matrixU().leftCols(r);
}

/// Lumped-mass linear elements for -(P phi')' + V phi = lambda Q phi with separated conditions on
/// (phi, P phi'). Dirichlet components are removed by restricting end nodes to ran(alpha2^*) / ran(beta2^*);
/// the rest enter as boundary terms. With `algebraic`, each node also carries phi2 with rows
/// w_i (V12^* phi1 + V22 phi2) = lambda w_i phi2.
inline FdProblem assemble_second_order(const CoefficientFn& P, const CoefficientFn& V, const CoefficientFn& Q,
                                       const SeparatedBC& bc, double h, const DAEReduction* algebraic) {
  const Eigen::Index n = bc.alpha.rows();
  const auto cells = static_cast<Eigen::Index>(std::llround(1.0 / h));
  const double hh = 1.0 / double(cells);
  const Matrix a1 = bc.alpha.leftCols(n), a2 = bc.alpha.rightCols(n);
  const Matrix b1 = bc.beta.leftCols(n), b2 = bc.beta.rightCols(n);
  std::vector<Matrix> basis(static_cast<std::size_t>(cells + 1), Matrix::Identity(n, n));
  basis.front() = range_basis_of(a2.adjoint());
  basis.back() = range_basis_of(b2.adjoint());
  const Eigen::Index k2 = algebraic ? algebraic->n - algebraic->m : 0;
  std::vector<Eigen::Index> off(static_cast<std::size_t>(cells + 2), 0);
  for (Eigen::Index i = 0; i <= cells; ++i)
    off[static_cast<std::size_t>(i + 1)] = off[static_cast<std::size_t>(i)] + basis[static_cast<std::size_t>(i)].cols() + k2;
  const Eigen::Index dim = off.back();
  FdProblem p{Matrix::Zero(dim, dim), Matrix::Zero(dim, dim)};
  auto blk = [&](Matrix& mat, Eigen::Index i, Eigen::Index j, const Matrix& v) {
    const auto& si = basis[static_cast<std::size_t>(i)];
    const auto& sj = basis[static_cast<std::size_t>(j)];
    if (si.cols() == 0 || sj.cols() == 0) return;
    mat.block(off[static_cast<std::size_t>(i)], off[static_cast<std::size_t>(j)], si.cols(), sj.cols()) +=
        si.adjoint() * v * sj;
  };
  for (Eigen::Index i = 0; i < cells; ++i) {
    const Matrix pm = P((double(i) + 0.5) * hh) / hh;
    blk(p.k, i, i, pm);
    blk(p.k, i + 1, i + 1, pm);
    blk(p.k, i, i + 1, -pm);
    blk(p.k, i + 1, i, -pm);
  }
  for (Eigen::Index i = 0; i <= cells; ++i) {
    const double x = double(i) * hh;
    const double w = (i == 0 || i == cells) ? 0.5 * hh : hh;
    blk(p.k, i, i, w * V(x));
    blk(p.m, i, i, w * Q(x));
    if (algebraic) {
      const auto& s = basis[static_cast<std::size_t>(i)];
      const Eigen::Index o1 = off[static_cast<std::size_t>(i)];
      const Eigen::Index o2 = o1 + s.cols();
      p.k.block(o2, o2, k2, k2) += w * algebraic->V22(x);
      p.m.block(o2, o2, k2, k2) += w * Matrix::Identity(k2, k2);
      if (s.cols() > 0) {
        const Matrix c = w * s.adjoint() * algebraic->V12(x);
        p.k.block(o1, o2, s.cols(), k2) += c;
        p.k.block(o2, o1, k2, s.cols()) += c.adjoint();
      }
    }
  }
  blk(p.k, 0, 0, hermitian_part(-a1.adjoint() * pseudo_inverse(a2.adjoint(), 1e-12)));
  blk(p.k, cells, cells, hermitian_part(b1.adjoint() * pseudo_inverse(b2.adjoint(), 1e-12)));
  return p;
}

inline bool is_block_diagonal(const Matrix& m, Eigen::Index n) {
  return m.topRightCorner(n, n).cwiseAbs().maxCoeff() <= 1e-14 && m.bottomLeftCorner(n, n).cwiseAbs().maxCoeff() <= 1e-14;
}

/// Staggered grid for J y' = (lambda Q + V) y with y = (u, v), Q and V block-diagonal, and the
/// same Dirichlet component (u or v) vanishing at both ends. The Dirichlet component lives on
/// interior integer nodes, the other on half nodes.
inline FdProblem assemble_dirac(const DiracCoefficients& c, const SeparatedBC& bc, double h) {
  const Eigen::Index n = bc.alpha.rows();
  auto kind = [n](const Matrix& a) {
    const Matrix ua = a.leftCols(n), va = a.rightCols(n);
    if (va.cwiseAbs().maxCoeff() <= 1e-14 && nullity(ua, 1e-12) == 0) return 0;
    if (ua.cwiseAbs().maxCoeff() <= 1e-14 && nullity(va, 1e-12) == 0) return 1;
    return -1;
  };
  const int ka = kind(bc.alpha), kb = kind(bc.beta);
  if (ka < 0 || ka != kb)
    throw UnsupportedSystem("finite differences need alpha and beta both of the form (A 0) or both (0 A)");
  for (double x : sample_points(21))
    if (!is_block_diagonal(c.Q(x), n) || !is_block_diagonal(c.V(x), n))
      throw UnsupportedSystem("finite differences need Q and V without u-v coupling");
  const auto cells = static_cast<Eigen::Index>(std::llround(1.0 / h));
  const double hh = 1.0 / double(cells);
  const Eigen::Index n_int = (cells - 1) * n;  // interior integer nodes
  const Eigen::Index n_half = cells * n;       // half nodes
  const Eigen::Index dim = n_int + n_half;
  FdProblem p{Matrix::Zero(dim, dim), Matrix::Zero(dim, dim)};
  const bool u_dirichlet = ka == 0;
  // Offsets: integer-node component first, then half-node component.
  auto int_off = [n](Eigen::Index i) { return (i - 1) * n; };
  auto half_off = [n, n_int](Eigen::Index i) { return n_int + i * n; };
  auto diag_block = [](const Matrix& m, bool upper_left, Eigen::Index nn) {
    return upper_left ? Matrix(m.topLeftCorner(nn, nn)) : Matrix(m.bottomRightCorner(nn, nn));
  };
  for (Eigen::Index i = 1; i < cells; ++i) {
    const double x = double(i) * hh;
    const Matrix q = c.Q(x), v = c.V(x);
    p.k.block(int_off(i), int_off(i), n, n) = -diag_block(v, u_dirichlet, n);
    p.m.block(int_off(i), int_off(i), n, n) = diag_block(q, u_dirichlet, n);
  }
  for (Eigen::Index i = 0; i < cells; ++i) {
    const double x = (double(i) + 0.5) * hh;
    const Matrix q = c.Q(x), v = c.V(x);
    p.k.block(half_off(i), half_off(i), n, n) = -diag_block(v, !u_dirichlet, n);
    p.m.block(half_off(i), half_off(i), n, n) = diag_block(q, !u_dirichlet, n);
  }
  // D: (D w)_{i+1/2} = (w_{i+1} - w_i) / h. Coupling is [[., D^T], [D, .]] when u carries the
  // Dirichlet condition and [[., -D^T], [-D, .]] when v does.
  const double sgn = u_dirichlet ? 1.0 : -1.0;
  const Matrix id = Matrix::Identity(n, n) * (sgn / hh);
  for (Eigen::Index i = 0; i < cells; ++i) {
    if (i + 1 < cells) {
      p.k.block(half_off(i), int_off(i + 1), n, n) += id;
      p.k.block(int_off(i + 1), half_off(i), n, n) += id;
    }
    if (i >= 1) {
      p.k.block(half_off(i), int_off(i), n, n) -= id;
      p.k.block(int_off(i), half_off(i), n, n) -= id;
    }
  }
  return p;
}

inline std::vector<double> generalized_eigenvalues(const FdProblem& p) {
  const double imag = std::max(p.k.imag().cwiseAbs().maxCoeff(), p.m.imag().cwiseAbs().maxCoeff());
  RealVector ev;
  if (imag <= 1e-14) {
    const RealMatrix k = hermitian_part(p.k).real(), m = hermitian_part(p.m).real();
    Eigen::GeneralizedSelfAdjointEigenSolver<RealMatrix> es(k, m, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error("finite-difference eigensolve failed");
    ev = es.eigenvalues();
  } else {
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(hermitian_part(p.k), hermitian_part(p.m),
                                                         Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error("finite-difference eigensolve failed");
    ev = es.eigenvalues();
  }
  return std::vector<double>(ev.data(), ev.data() + ev.size());
}

inline FdProblem assemble(const HamiltonianSystem& sys, const SeparatedBC& bc, double h) {
  if (const auto* sl = std::get_if<SturmLiouvilleCoefficients>(&sys.family()))
    return assemble_second_order(sl->P, sl->V, sl->Q, bc, h, nullptr);
  if (const auto* d = std::get_if<DiracCoefficients>(&sys.family())) return assemble_dirac(*d, bc, h);
  if (const auto* r = std::get_if<DAEReduction>(&sys.family()))
    return assemble_second_order(r->P11, r->V11, constant_coefficient(Matrix::Identity(r->m, r->m)), bc, h, r);
  throw UnsupportedSystem("finite differences support the dirac, sturm_liouville and dae families, not " +
                          sys.family_name());
}

inline std::vector<double> in_window(const std::vector<double>& ev, double l1, double l2) {
  std::vector<double> out;
  for (double e : ev)
    if (e >= l1 && e < l2) out.push_back(e);
  return out;
}

}  // namespace detail

/// Eigenvalues of a dense finite-difference discretization counted in [lambda1, lambda2).
inline OracleReport fd_count(const HamiltonianSystem& sys, const BoundaryConditions& bc, double lambda1,
                             double lambda2, const FdOptions& opts = {}) {
  const auto* sep = std::get_if<SeparatedBC>(&bc);
  if (!sep) throw UnsupportedSystem("finite differences need separated boundary conditions");
  validate_bc(*sep, sys.n());
  if (!(opts.h > 0.0 && opts.h <= 0.25)) throw Error("fd_count: mesh size must lie in (0, 1/4]");
  OracleReport rep;
  const auto coarse = detail::assemble(sys, *sep, opts.h);
  const auto ev_h = detail::generalized_eigenvalues(coarse);
  rep.h = opts.h;
  rep.dimension = coarse.k.rows();
  rep.eigenvalues_in_window = detail::in_window(ev_h, lambda1, lambda2);
  rep.count = static_cast<int>(rep.eigenvalues_in_window.size());
  if (!opts.refine) return rep;

  const auto fine = detail::assemble(sys, *sep, opts.h / 2);
  const auto ev_f = detail::generalized_eigenvalues(fine);
  rep.coarse_h = rep.h;
  rep.coarse_count = rep.count;
  rep.coarse_eigenvalues_in_window = rep.eigenvalues_in_window;
  rep.h = opts.h / 2;
  rep.dimension = fine.k.rows();
  rep.eigenvalues_in_window = detail::in_window(ev_f, lambda1, lambda2);
  rep.count = static_cast<int>(rep.eigenvalues_in_window.size());

  const double width = lambda2 - lambda1;
  for (double mu : ev_f) {
    if (mu < lambda1 - width || mu > lambda2 + width) continue;
    double shift = std::numeric_limits<double>::infinity();
    for (double e : ev_h) shift = std::min(shift, std::abs(e - mu));
    rep.max_shift = std::max(rep.max_shift, shift);
    const double radius = opts.ambiguity_factor * shift;
    if (std::abs(mu - lambda1) <= radius || std::abs(mu - lambda2) <= radius)
      throw AmbiguousNearEndpoint("eigenvalue " + std::to_string(mu) + " lies within " + std::to_string(radius) +
                                  " of the window [" + std::to_string(lambda1) + ", " + std::to_string(lambda2) + ")");
  }
  if (rep.count != rep.coarse_count)
    throw AmbiguousNearEndpoint("counts at h and h/2 differ (" + std::to_string(rep.coarse_count) + " vs " +
                                std::to_string(rep.count) + ")");
  return rep;
}

// ---------------------------------------------------------------- fixed-target Maslov count

struct StandardCountReport {
  int count = 0;
  /// Mas(l1(.; lambda), J beta^*; [0, 1]) at lambda1 and lambda2.
  MaslovResult at_lambda1;
  MaslovResult at_lambda2;
  /// Crossings whose compression changed sign on both sides (index unaffected).
  int indefinite_crossings = 0;
};

namespace detail {

inline MaslovResult fixed_target_index(const HamiltonianSystem& sys, const SeparatedBC& bc, double lambda,
                                       const CountOptions& opts, int& indefinite) {
  const auto grid = uniform_grid(opts.propagation.grid_points);
  const LagrangianFrame target = right_boundary_frame(bc);
  const FramePath p1 = integrate_frame(sys, lambda, left_boundary_frame(bc), PathDirection::forward, grid,
                                       opts.propagation);
  const FramePath p2 = FramePath::constant(target, grid);
  const EigenphasePath path = eigenphase_path(p1, p2, opts.tracking);
  MaslovResult m = maslov_index(path);
  const Eigen::Index n2 = 2 * sys.n();
  const MatrixPathFn b1 = [&sys, lambda](double x) { return sys.eval_B(x, lambda); };
  const MatrixPathFn b2 = [n2](double) { return Matrix(Matrix::Zero(n2, n2)); };
  for (auto& c : m.crossings) {
    try {
      c.audit = crossing_direction(b1, b2, p1.at(c.location), target, c.location, {0.0, 1.0}, opts.direction);
    } catch (const IndefiniteDirection&) {
      ++indefinite;
    }
  }
  return m;
}

}  // namespace detail

/// Count from the frame path against the fixed boundary subspace J beta^* at both window ends.
/// The index at lambda1 minus the index at lambda2 equals the count under counterclockwise-positive
/// orientation.
inline StandardCountReport standard_maslov_count(const HamiltonianSystem& sys, const BoundaryConditions& bc,
                                                 double lambda1, double lambda2, const CountOptions& opts = {}) {
  const auto* sep = std::get_if<SeparatedBC>(&bc);
  if (!sep) throw UnsupportedSystem("the fixed-target count needs separated boundary conditions");
  validate_bc(*sep, sys.n());
  if (!(lambda1 < lambda2)) throw Error("standard_maslov_count: need lambda1 < lambda2");
  sys.require_lambda(lambda1);
  sys.require_lambda(lambda2);
  StandardCountReport rep;
  rep.at_lambda1 = detail::fixed_target_index(sys, *sep, lambda1, opts, rep.indefinite_crossings);
  rep.at_lambda2 = detail::fixed_target_index(sys, *sep, lambda2, opts, rep.indefinite_crossings);
  for (const auto* m : {&rep.at_lambda1, &rep.at_lambda2})
    for (const auto& c : m->crossings)
      if (c.graze)
        throw IndeterminateCrossing("fixed-target path touches the target near x = " + std::to_string(c.location));
  rep.count = rep.at_lambda1.index - rep.at_lambda2.index;
  return rep;
}

}  // namespace maslov
