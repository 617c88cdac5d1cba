#pragma once
// Frame paths J X' = B(x; lambda) X, the fundamental solution, and the two
// canonical frame paths whose intersections count eigenvalues.

#include "maslov/errors.hpp"
#include "maslov/hamiltonian.hpp"
#include "maslov/lagrangian.hpp"
#include "maslov/ode.hpp"

#include <algorithm>
#include <memory>
#include <string>
#include <vector>

namespace maslov {

struct PropagationOptions {
  OdeOptions ode;
  FrameTolerances frame;
  std::size_t grid_points = 2001;
};

enum class PathDirection { forward, backward };

namespace detail {

inline auto frame_rhs(const HamiltonianSystem& sys, double lambda) {
  return [&sys, lambda](double x, const Matrix& y) { return apply_j_inverse(sys.eval_B(x, lambda) * y); };
}

inline std::vector<double> ordered(const std::vector<double>& grid, PathDirection dir) {
  std::vector<double> g = grid;
  if (dir == PathDirection::backward) std::reverse(g.begin(), g.end());
  return g;
}

inline void check_grid(const std::vector<double>& grid) {
  if (grid.size() < 2) throw Error("grid needs at least two points");
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (!(grid[k] > grid[k - 1])) throw Error("grid must be strictly increasing");
  if (grid.front() < 0.0 || grid.back() > 1.0) throw Error("grid must lie in [0, 1]");
}

}  // namespace detail

/// Frames of a Lagrangian path on an ascending x-grid. Off-grid frames are produced by a short
/// integration from the nearest stored sample.
class FramePath {
 public:
  FramePath(std::shared_ptr<const HamiltonianSystem> sys, double lambda, PathDirection dir, std::vector<double> grid,
            std::vector<LagrangianFrame> frames, PropagationOptions opts)
      : sys_(std::move(sys)),
        lambda_(lambda),
        dir_(dir),
        grid_(std::move(grid)),
        frames_(std::move(frames)),
        opts_(opts) {}

  /// A path that does not move (e.g. a fixed target subspace).
  static FramePath constant(const LagrangianFrame& f, std::vector<double> grid) {
    std::vector<LagrangianFrame> frames(grid.size(), f);
    return FramePath(nullptr, 0.0, PathDirection::forward, std::move(grid), std::move(frames), {});
  }

  double lambda() const noexcept { return lambda_; }
  PathDirection direction() const noexcept { return dir_; }
  const std::vector<double>& grid() const noexcept { return grid_; }
  const std::vector<LagrangianFrame>& frames() const noexcept { return frames_; }
  std::size_t size() const noexcept { return grid_.size(); }
  bool is_constant() const noexcept { return sys_ == nullptr; }
  const std::shared_ptr<const HamiltonianSystem>& system() const noexcept { return sys_; }

  LagrangianFrame at(double x) const {
    auto it = std::lower_bound(grid_.begin(), grid_.end(), x);
    std::size_t k = static_cast<std::size_t>(it - grid_.begin());
    if (k == grid_.size()) k = grid_.size() - 1;
    if (k > 0 && std::abs(grid_[k - 1] - x) < std::abs(grid_[k] - x)) --k;
    if (std::abs(grid_[k] - x) <= 1e-15 || is_constant()) return frames_[k];
    const auto out = integrate_dense(detail::frame_rhs(*sys_, lambda_), frames_[k].data(), grid_[k], {x}, opts_.ode,
                                     Normalization::orthonormal, sys_->breakpoints());
    return LagrangianFrame::trusted(thin_qr(out[0]).q);
  }

  double max_lagrangian_residual() const {
    double r = 0.0;
    for (const auto& f : frames_) r = std::max(r, f.lagrangian_residual());
    return r;
  }

  /// Largest Grassmann distance between consecutive frames.
  double max_step_distance() const {
    double d = 0.0;
    for (std::size_t k = 1; k < frames_.size(); ++k) d = std::max(d, grassmann_distance(frames_[k - 1], frames_[k]));
    return d;
  }

 private:
  std::shared_ptr<const HamiltonianSystem> sys_;
  double lambda_;
  PathDirection dir_;
  std::vector<double> grid_;
  std::vector<LagrangianFrame> frames_;
  PropagationOptions opts_;
};

/// Integrates from x = 0 (forward) or x = 1 (backward) and stores an orthonormal frame at every grid point.
inline FramePath integrate_frame(const HamiltonianSystem& system, double lambda, const LagrangianFrame& init,
                                 PathDirection dir, const std::vector<double>& grid,
                                 const PropagationOptions& opts = {}) {
  system.require_lambda(lambda);
  detail::check_grid(grid);
  if (init.data().rows() != 2 * system.n())
    throw DimensionMismatch("initial frame has " + std::to_string(init.data().rows()) + " rows, system needs " +
                            std::to_string(2 * system.n()));
  auto sys = std::make_shared<const HamiltonianSystem>(system);
  const double x0 = dir == PathDirection::forward ? 0.0 : 1.0;
  const std::vector<double> outs = detail::ordered(grid, dir);
  const Matrix start = thin_qr(init.data()).q;
  auto raw = integrate_dense(detail::frame_rhs(*sys, lambda), start, x0, outs, opts.ode, Normalization::orthonormal,
                             sys->breakpoints());
  if (dir == PathDirection::backward) std::reverse(raw.begin(), raw.end());
  std::vector<LagrangianFrame> frames;
  frames.reserve(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) {
    const Matrix q = thin_qr(raw[k]).q;
    const FrameCheck c = validate_frame(q, opts.frame);
    if (!c.ok())
      throw ToleranceNotMet("propagated frame lost its invariants at x = " + std::to_string(grid[k]) +
                            " (residual " + std::to_string(c.residual) + ")");
    frames.push_back(LagrangianFrame::trusted(q));
  }
  return FramePath(sys, lambda, dir, grid, std::move(frames), opts);
}

/// Frame at x_to of the solution through init at x_from.
inline LagrangianFrame propagate_frame(const HamiltonianSystem& sys, double lambda, const LagrangianFrame& init,
                                       double x_from, double x_to, const PropagationOptions& opts = {}) {
  sys.require_lambda(lambda);
  const auto out = integrate_dense(detail::frame_rhs(sys, lambda), thin_qr(init.data()).q, x_from, {x_to}, opts.ode,
                                   Normalization::orthonormal, sys.breakpoints());
  return LagrangianFrame::trusted(thin_qr(out[0]).q);
}

/// Unnormalized solution matrix through init; used where the actual solution (not only its span) matters.
inline std::vector<Matrix> solution_matrices(const HamiltonianSystem& sys, double lambda, const Matrix& init,
                                             const std::vector<double>& grid, const PropagationOptions& opts = {}) {
  sys.require_lambda(lambda);
  detail::check_grid(grid);
  return integrate_dense(detail::frame_rhs(sys, lambda), init, 0.0, grid, opts.ode, Normalization::none,
                         sys.breakpoints());
}

struct FundamentalSolution {
  std::vector<double> grid;
  std::vector<Matrix> matrices;

  /// max over the grid of ||Phi^* J Phi - J||.
  double conservation_residual() const {
    double r = 0.0;
    for (const auto& m : matrices) {
      const Eigen::Index n = m.rows() / 2;
      r = std::max(r, operator_norm(m.adjoint() * apply_j(m) - symplectic_j(n)));
    }
    return r;
  }
};

/// Defaults for unnormalized solutions: Phi grows, so the step control is tighter than for frames.
inline PropagationOptions fundamental_defaults() {
  PropagationOptions o;
  o.ode.rtol = 1e-12;
  o.ode.atol = 1e-14;
  return o;
}

/// J Phi' = B Phi, Phi(0) = I.
inline FundamentalSolution fundamental_solution(const HamiltonianSystem& sys, double lambda,
                                                const std::vector<double>& grid,
                                                const PropagationOptions& opts = fundamental_defaults()) {
  FundamentalSolution fs;
  fs.grid = grid;
  fs.matrices = solution_matrices(sys, lambda, Matrix::Identity(2 * sys.n(), 2 * sys.n()), grid, opts);
  return fs;
}

/// The two frame paths of the renormalized count, plus the system they were integrated for
/// (the doubled system for general boundary conditions).
struct CanonicalFrames {
  FramePath first;
  FramePath second;
  std::shared_ptr<const HamiltonianSystem> working_system;
  LagrangianFrame initial;
  LagrangianFrame target;
  bool doubled = false;
};

/// Initial frame at x = 0, target frame at x = 1, and the system to integrate.
struct FrameSetup {
  std::shared_ptr<const HamiltonianSystem> working_system;
  LagrangianFrame initial;
  LagrangianFrame target;
  bool doubled;
};

inline FrameSetup frame_setup(const HamiltonianSystem& sys, const BoundaryConditions& bc) {
  validate_bc(bc, sys.n());
  if (const auto* s = std::get_if<SeparatedBC>(&bc))
    return {std::make_shared<const HamiltonianSystem>(sys), left_boundary_frame(*s), right_boundary_frame(*s), false};
  const auto& g = std::get<GeneralBC>(bc);
  return {std::make_shared<const HamiltonianSystem>(double_system(sys)), doubled_initial_frame(sys.n()),
          doubled_target_frame(g), true};
}

inline CanonicalFrames canonical_frames(const HamiltonianSystem& sys, const BoundaryConditions& bc, double lambda1,
                                        double lambda2, const std::vector<double>& grid,
                                        const PropagationOptions& opts = {}) {
  if (!(lambda1 < lambda2)) throw Error("canonical_frames: need lambda1 < lambda2");
  const FrameSetup s = frame_setup(sys, bc);
  FramePath p1 = integrate_frame(*s.working_system, lambda1, s.initial, PathDirection::forward, grid, opts);
  FramePath p2 = integrate_frame(*s.working_system, lambda2, s.target, PathDirection::backward, grid, opts);
  return {std::move(p1), std::move(p2), s.working_system, s.initial, s.target, s.doubled};
}

}  // namespace maslov
