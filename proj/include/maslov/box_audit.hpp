#pragma once
// Maslov index on the four sides of the box [lambda1, lambda2] x [0, 1] and the
// consistency relations between them.

#include "maslov/errors.hpp"
#include "maslov/maslov_flow.hpp"
#include "maslov/renormalized_count.hpp"

#include <sstream>
#include <string>
#include <vector>

namespace maslov {

struct AuditOptions {
  CountOptions count;
  /// Initial lambda samples on the bottom and top sides (refined adaptively).
  std::size_t lambda_samples = 129;
  /// Throw ShelfMismatch when the relations fail.
  bool strict = true;
};

struct ShelfReport {
  std::string name;
  int index = 0;
  std::vector<CrossingRecord> crossings;
  /// Largest phase excursion of any eigenvalue track from its starting value.
  double phase_motion = 0.0;
  bool constant_kernel = true;
  std::string note;
};

struct BoxAudit {
  std::pair<double, double> window;
  ShelfReport bottom, right, top, left;
  /// bottom + right - top - left, each side indexed with its parameter increasing.
  int loop_sum = 0;
  /// Conjugate-point count on the left side, x in (0, 1].
  int count = 0;
  /// Every top-side crossing moves clockwise in lambda.
  bool top_clockwise = true;
  /// Smallest eigenvalue of the integrated weight at x = 1 over top-side crossings.
  double top_weight_margin = std::numeric_limits<double>::infinity();
  bool consistent = false;

  std::string summary() const {
    std::ostringstream s;
    s << "bottom=" << bottom.index << " right=" << right.index << " top=" << top.index << " left=" << left.index
      << " loop=" << loop_sum << " count=" << count;
    return s.str();
  }
};

namespace detail {

inline double phase_excursion(const EigenphasePath& p) {
  double m = 0.0;
  for (const auto& l : p.lifts()) m = std::max(m, (l - p.lifts().front()).cwiseAbs().maxCoeff());
  return m;
}

inline double weight_at_one(const HamiltonianSystem& sys, const LagrangianFrame& initial, double lambda,
                            const PropagationOptions& prop) {
  const auto xs = uniform_grid(401);
  const auto s = solution_matrices(sys, lambda, initial.data(), xs, prop);
  Matrix acc = Matrix::Zero(initial.n(), initial.n());
  Matrix prev = s[0].adjoint() * sys.eval_B_lambda(xs[0], lambda) * s[0];
  for (std::size_t k = 1; k < xs.size(); ++k) {
    const Matrix cur = s[k].adjoint() * sys.eval_B_lambda(xs[k], lambda) * s[k];
    acc += 0.5 * (xs[k] - xs[k - 1]) * (prev + cur);
    prev = cur;
  }
  return min_hermitian_eigenvalue(acc);
}

}  // namespace detail

inline BoxAudit maslov_box_audit(const HamiltonianSystem& sys, const BoundaryConditions& bc, double lambda1,
                                 double lambda2, const AuditOptions& opts = {}) {
  if (!(lambda1 < lambda2)) throw Error("maslov_box_audit: need lambda1 < lambda2");
  BoxAudit a;
  a.window = {lambda1, lambda2};
  const CountOptions& co = opts.count;
  const SpectralCountReport rep = renormalized_count(sys, bc, lambda1, lambda2, co);
  a.count = rep.count;

  const FrameSetup setup = frame_setup(sys, bc);
  const auto work = setup.working_system;
  const auto grid = uniform_grid(co.propagation.grid_points);
  const auto lgrid = uniform_grid(opts.lambda_samples, lambda1, lambda2);
  const CanonicalFrames cf = canonical_frames(sys, bc, lambda1, lambda2, grid, co.propagation);

  // Left: x in [0, 1] at lambda1 against the path at lambda2.
  {
    const EigenphasePath p = eigenphase_path(cf.first, cf.second, co.tracking);
    const MaslovResult m = maslov_index(p);
    a.left = {"left", m.index, m.crossings, detail::phase_excursion(p), true, ""};
  }
  // Bottom: x = 0, lambda varies; both subspaces are fixed.
  {
    const LagrangianFrame f1 = setup.initial;
    const LagrangianFrame f2 = cf.second.frames().front();
    const EigenphasePath p = eigenphase_path([f1, f2](double) { return w_pair(f1, f2).matrix(); }, lgrid, co.tracking);
    const MaslovResult m = maslov_index(p);
    a.bottom = {"bottom", m.index, m.crossings, detail::phase_excursion(p), true, ""};
    if (a.bottom.phase_motion > co.tracking.angle_tol) a.bottom.note = "W moves along the bottom side";
  }
  // Right: x in [0, 1] at lambda2 for both paths.
  {
    const FramePath p1 = integrate_frame(*work, lambda2, setup.initial, PathDirection::forward, grid, co.propagation);
    const EigenphasePath p = eigenphase_path(p1, cf.second, co.tracking);
    const MaslovResult m = maslov_index(p);
    a.right = {"right", m.index, m.crossings, detail::phase_excursion(p), true, ""};
    const int k0 = kernel_dim_at(UnitaryPairMatrix(p.unitary_at(0.0)), Complex(-1.0, 0.0), co.tracking.angle_tol);
    for (std::size_t k = 0; k < p.grid().size(); k += 50)
      if (kernel_dim_at(UnitaryPairMatrix(p.unitary_at(p.grid()[k])), Complex(-1.0, 0.0), 1e-5) != k0)
        a.right.constant_kernel = false;
    if (!a.right.constant_kernel) a.right.note = "kernel dimension varies along the right side";
  }
  // Top: x = 1, lambda varies, target fixed.
  {
    const LagrangianFrame target = cf.second.frames().back();
    const LagrangianFrame init = setup.initial;
    const PropagationOptions prop = co.propagation;
    auto w = [work, init, target, prop](double l) {
      return w_pair(propagate_frame(*work, l, init, 0.0, 1.0, prop), target).matrix();
    };
    PhaseTrackingOptions tracking = co.tracking;
    tracking.speed_check = true;
    tracking.expected_direction = -1;
    const EigenphasePath p = eigenphase_path(w, lgrid, tracking);
    const MaslovResult m = maslov_index(p);
    a.top = {"top", m.index, m.crossings, detail::phase_excursion(p), true, ""};
    for (const auto& c : m.crossings) {
      if (c.direction != -1) a.top_clockwise = false;
      a.top_weight_margin =
          std::min(a.top_weight_margin, detail::weight_at_one(*work, init, c.location, co.propagation));
    }
  }
  a.loop_sum = a.bottom.index + a.right.index - a.top.index - a.left.index;
  a.consistent = a.bottom.index == 0 && a.right.index == 0 && a.right.constant_kernel && a.top.index == -a.count &&
                 a.left.index == a.count && a.loop_sum == 0;
  if (!a.consistent && opts.strict) {
    std::ostringstream s;
    s << "shelf relations fail on [" << lambda1 << ", " << lambda2 << "): " << a.summary();
    for (const auto* sh : {&a.bottom, &a.right, &a.top, &a.left})
      for (const auto& c : sh->crossings)
        s << "; " << sh->name << " crossing at " << c.location << " mult " << c.multiplicity << " contribution "
          << c.contribution;
    throw ShelfMismatch(s.str());
  }
  return a;
}

}  // namespace maslov
