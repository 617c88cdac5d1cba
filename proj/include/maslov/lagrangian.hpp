#pragma once
// Frames for Lagrangian subspaces of C^{2n}, the unitary W-calculus that
// detects their intersections, and orthogonal projector utilities.

#include "maslov/errors.hpp"
#include "maslov/linalg.hpp"

#include <optional>
#include <string>
#include <vector>

namespace maslov {

struct FrameTolerances {
  /// Smallest singular value must exceed rank_tol * sigma_max.
  double rank_tol = 1e-8;
  /// Bound on ||X*Y - Y*X|| / ||data||^2.
  double frame_tol = 1e-8;
};

enum class FrameDefect { none, odd_rows, rank_deficient, not_lagrangian };

class LagrangianFrame;

struct FrameCheck {
  FrameDefect defect = FrameDefect::none;
  /// Scaled residual of the failing invariant (smallest relative singular value or Lagrangian residual).
  double residual = 0.0;
  /// X*Y - Y*X of the candidate (empty for odd row counts).
  Matrix lagrangian_residual;
  std::optional<Matrix> accepted;

  bool ok() const noexcept { return defect == FrameDefect::none; }
};

/// Measures both frame invariants without throwing.
inline FrameCheck validate_frame(const Matrix& candidate, const FrameTolerances& tol = {}) {
  FrameCheck out;
  if (candidate.rows() % 2 != 0 || candidate.rows() != 2 * candidate.cols() || candidate.cols() == 0) {
    out.defect = FrameDefect::odd_rows;
    return out;
  }
  const Eigen::Index n = candidate.cols();
  Eigen::JacobiSVD<Matrix> svd(candidate);
  const RealVector& s = svd.singularValues();
  const double smax = s(0);
  const Matrix x = candidate.topRows(n);
  const Matrix y = candidate.bottomRows(n);
  out.lagrangian_residual = x.adjoint() * y - y.adjoint() * x;
  if (!(smax > 0.0) || s(n - 1) <= tol.rank_tol * smax) {
    out.defect = FrameDefect::rank_deficient;
    out.residual = smax > 0.0 ? s(n - 1) / smax : 0.0;
    return out;
  }
  const double lag = operator_norm(out.lagrangian_residual) / (smax * smax);
  out.residual = lag;
  if (lag > tol.frame_tol) {
    out.defect = FrameDefect::not_lagrangian;
    return out;
  }
  out.accepted = candidate;
  return out;
}

/// A 2n x n matrix (X; Y) whose columns span a Lagrangian subspace.
class LagrangianFrame {
 public:
  /// Validates and throws RankDeficient / NotLagrangian / DimensionMismatch on failure.
  explicit LagrangianFrame(const Matrix& data, const FrameTolerances& tol = {}) : data_(data) {
    const FrameCheck c = validate_frame(data, tol);
    switch (c.defect) {
      case FrameDefect::none:
        break;
      case FrameDefect::odd_rows:
        throw DimensionMismatch("frame must be 2n x n, got " + std::to_string(data.rows()) + " x " +
                                std::to_string(data.cols()));
      case FrameDefect::rank_deficient:
        throw RankDeficient("frame columns are linearly dependent (relative sigma_min " +
                            std::to_string(c.residual) + ")");
      case FrameDefect::not_lagrangian:
        throw NotLagrangian("frame violates X*Y - Y*X = 0 (scaled residual " + std::to_string(c.residual) + ")");
    }
  }

  /// Wraps data already known to satisfy the invariants (e.g. X_1(0) = J alpha^*).
  static LagrangianFrame trusted(Matrix data) {
    LagrangianFrame f;
    f.data_ = std::move(data);
    return f;
  }

  Eigen::Index n() const noexcept { return data_.cols(); }
  const Matrix& data() const noexcept { return data_; }
  Matrix x() const { return data_.topRows(n()); }
  Matrix y() const { return data_.bottomRows(n()); }

  /// ||X*J X|| scaled by ||data||^2.
  double lagrangian_residual() const {
    const double s = operator_norm(data_);
    return operator_norm(data_.adjoint() * apply_j(data_)) / (s * s);
  }

  /// Same subspace, orthonormal columns.
  LagrangianFrame orthonormalized() const { return trusted(thin_qr(data_).q); }

 private:
  LagrangianFrame() = default;
  Matrix data_;
};

/// n x n unitary matrix produced by the Cayley-type maps below.
class UnitaryPairMatrix {
 public:
  UnitaryPairMatrix() = default;
  explicit UnitaryPairMatrix(Matrix m) : m_(std::move(m)) {}
  const Matrix& matrix() const noexcept { return m_; }
  Eigen::Index n() const noexcept { return m_.rows(); }
  double unitarity_residual() const {
    return operator_norm(m_.adjoint() * m_ - Matrix::Identity(m_.rows(), m_.cols()));
  }
  Vector eigenvalues() const { return complex_eigenvalues(m_); }

 private:
  Matrix m_;
};

enum class CayleySign { plus, minus };

/// (X + iY)(X - iY)^{-1} for plus, (X - iY)(X + iY)^{-1} for minus.
/// The inverse uses (X -/+ iY)^{-1} = M^2 (X^* +/- iY^*) with M^2 = (X^*X + Y^*Y)^{-1}.
inline UnitaryPairMatrix cayley_factor(const LagrangianFrame& frame, CayleySign sign) {
  // An orthonormal basis keeps M^2 close to I regardless of how the frame was scaled.
  const Matrix q = thin_qr(frame.data()).q;
  const Eigen::Index n = frame.n();
  const Matrix x = q.topRows(n);
  const Matrix y = q.bottomRows(n);
  const Matrix gram = x.adjoint() * x + y.adjoint() * y;
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(gram));
  const RealVector& ev = es.eigenvalues();
  if (!(ev(0) > 1e-14 * ev(ev.size() - 1)))
    throw InversionFailure("X*X + Y*Y is numerically singular; frame tolerance too loose");
  const Matrix m2 = es.eigenvectors() * ev.cwiseInverse().cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  const Complex s = sign == CayleySign::plus ? I_unit : -I_unit;
  // (X + sY) (X - sY)^{-1}, with (X - sY)^{-1} = M^2 (X^* + s Y^*) when s = +/- i.
  return UnitaryPairMatrix((x + s * y) * m2 * (x.adjoint() + s * y.adjoint()));
}

/// W = -(X1 + iY1)(X1 - iY1)^{-1} (X2 - iY2)(X2 + iY2)^{-1}.
inline UnitaryPairMatrix w_pair(const LagrangianFrame& f1, const LagrangianFrame& f2) {
  if (f1.n() != f2.n())
    throw DimensionMismatch("w_pair: frames of dimension " + std::to_string(f1.n()) + " and " +
                            std::to_string(f2.n()));
  return UnitaryPairMatrix(-cayley_factor(f1, CayleySign::plus).matrix() *
                           cayley_factor(f2, CayleySign::minus).matrix());
}

/// Number of eigenvalues of a unitary W whose phase lies within angle_tol of arg(point).
inline int kernel_dim_at(const Vector& eigenvalues, Complex point, double angle_tol) {
  int k = 0;
  for (Eigen::Index j = 0; j < eigenvalues.size(); ++j)
    if (std::abs(relative_phase(eigenvalues(j), point)) <= angle_tol) ++k;
  return k;
}

inline int kernel_dim_at(const UnitaryPairMatrix& w, Complex point, double angle_tol = 1e-6) {
  return kernel_dim_at(w.eigenvalues(), point, angle_tol);
}

/// Frame i(1 - w0) X2 - (1 + w0) J X2 of the subspace whose intersections with ell_1
/// are detected by the eigenvalue w0 of W.
inline LagrangianFrame rotate_target(const LagrangianFrame& frame2, Complex w0) {
  const Matrix& x2 = frame2.data();
  return LagrangianFrame::trusted(I_unit * (1.0 - w0) * x2 - (1.0 + w0) * apply_j(x2));
}

/// G = i(1 - w0) I - (1 + w0) J, mapping ell_2 to the rotated target.
inline Matrix rotation_g(Eigen::Index n, Complex w0) {
  return I_unit * (1.0 - w0) * Matrix::Identity(2 * n, 2 * n) - (1.0 + w0) * symplectic_j(n);
}

inline Matrix rotation_g_inverse(Eigen::Index n, Complex w0) {
  return (1.0 / (4.0 * w0)) * (I_unit * (1.0 - w0) * Matrix::Identity(2 * n, 2 * n) + (1.0 + w0) * symplectic_j(n));
}

/// Orthogonal projection matrix onto a subspace of C^{2n}.
class OrthoProjector {
 public:
  OrthoProjector() = default;
  explicit OrthoProjector(Matrix p) : p_(std::move(p)) {}

  /// P = X (X^*X)^{-1} X^*, formed from an orthonormal basis of ran X.
  static OrthoProjector onto(const Matrix& basis) {
    if (basis.cols() == 0) return OrthoProjector(Matrix::Zero(basis.rows(), basis.rows()));
    const Matrix q = thin_qr(basis).q;
    return OrthoProjector(q * q.adjoint());
  }
  static OrthoProjector onto(const LagrangianFrame& f) { return onto(f.data()); }

  const Matrix& matrix() const noexcept { return p_; }
  Eigen::Index size() const noexcept { return p_.rows(); }

  double idempotency_residual() const { return operator_norm(p_ * p_ - p_); }
  double adjointness_residual() const { return operator_norm(p_ - p_.adjoint()); }

  /// Orthonormal basis of the range (eigenvalues above 1/2).
  Matrix range_basis() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(p_));
    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
      if (es.eigenvalues()(k) > 0.5) keep.push_back(k);
    Matrix b(p_.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) b.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(keep[c]);
    return b;
  }
  Eigen::Index rank() const { return range_basis().cols(); }

 private:
  Matrix p_;
};

/// Projector onto ran P1 ∩ ran P2 via 2 P1 (P1 + P2)^† P2. Near-intersections within the
/// pseudoinverse cutoff count as intersections; the result is snapped to an exact
/// orthogonal projector by rounding the eigenvalues of its Hermitian part to {0, 1}.
inline OrthoProjector intersection_projector(const OrthoProjector& p1, const OrthoProjector& p2,
                                             double pinv_cutoff = 1e-10) {
  if (p1.size() != p2.size())
    throw DimensionMismatch("intersection_projector: projector sizes differ");
  const Matrix raw = 2.0 * p1.matrix() * pseudo_inverse(p1.matrix() + p2.matrix(), pinv_cutoff) * p2.matrix();
  const Matrix basis = OrthoProjector(hermitian_part(raw)).range_basis();
  return OrthoProjector::onto(basis);
}

/// d(l1, l2) = ||P1 - P2|| in the operator 2-norm.
inline double grassmann_distance(const LagrangianFrame& f1, const LagrangianFrame& f2) {
  if (f1.n() != f2.n()) throw DimensionMismatch("grassmann_distance: frame dimensions differ");
  return operator_norm(OrthoProjector::onto(f1).matrix() - OrthoProjector::onto(f2).matrix());
}

/// dim(l1 ∩ l2) from the singular values of the stacked basis [X1 X2].
inline Eigen::Index intersection_dimension(const LagrangianFrame& f1, const LagrangianFrame& f2,
                                           double rel_tol = 1e-8) {
  Matrix stacked(f1.data().rows(), f1.n() + f2.n());
  stacked << f1.orthonormalized().data(), f2.orthonormalized().data();
  return nullity(stacked, rel_tol);
}

/// Rank deficiency of X1^* J X2 (orthonormalized frames, so the threshold is scale free).
inline Eigen::Index conjugate_nullity(const LagrangianFrame& f1, const LagrangianFrame& f2, double rel_tol = 1e-8) {
  const Matrix a = f1.orthonormalized().data();
  const Matrix b = f2.orthonormalized().data();
  const Matrix m = a.adjoint() * apply_j(b);
  Eigen::JacobiSVD<Matrix> svd(m);
  const RealVector& s = svd.singularValues();
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < s.size(); ++j)
    if (s(j) <= rel_tol) ++k;
  return k;
}

}  // namespace maslov
