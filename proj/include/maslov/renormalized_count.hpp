#pragma once
// Eigenvalue counts on [lambda1, lambda2) as conjugate-point counts of the
// frame path at lambda1 against the frame path at lambda2.

#include "maslov/assumptions.hpp"
#include "maslov/errors.hpp"
#include "maslov/maslov_flow.hpp"
#include "maslov/propagation.hpp"

#include <string>
#include <utility>
#include <vector>

namespace maslov {

struct CountOptions {
  PropagationOptions propagation;
  PhaseTrackingOptions tracking;
  DirectionOptions direction;
  AssumptionOptions assumptions;
  /// Run check_assumptions first.
  bool check = true;
  /// Continue when the check fails; the report keeps the failing status.
  bool force = false;
  /// Attach crossing-direction audits to every crossing.
  bool audit_directions = true;
};

struct CountingResult {
  int count = 0;
  std::vector<CrossingRecord> crossings;
};

/// Sum of kernel dimensions of W + I at the refined crossing points of the pair on [a, b];
/// no direction bookkeeping.
inline CountingResult counting_function(const FramePath& p1, const FramePath& p2, double a, double b,
                                        const PhaseTrackingOptions& opts = {}) {
  if (p1.grid() != p2.grid()) throw Error("counting_function: frame paths must share their grid");
  std::vector<double> sub{a};
  for (double x : p1.grid())
    if (x > a && x < b) sub.push_back(x);
  sub.push_back(b);
  auto w = [p1, p2](double x) { return w_pair(p1.at(x), p2.at(x)).matrix(); };
  const EigenphasePath path = eigenphase_path(w, sub, opts);
  const MaslovResult m = maslov_index(path);
  CountingResult out;
  for (const auto& c : m.crossings) {
    if (c.persistent)
      throw NonIsolatedIntersection("intersection persists across samples near x = " + std::to_string(c.location));
    out.count += c.multiplicity;
    out.crossings.push_back(c);
  }
  return out;
}

struct SpectralCountReport {
  int count = 0;
  std::pair<double, double> window;
  /// Crossings with x in (0, 1], each carrying its direction audit.
  std::vector<CrossingRecord> crossings;
  /// Crossings at x = 0 (recorded, not counted).
  std::vector<CrossingRecord> excluded;
  AssumptionReport assumptions;
  std::string method;
  /// Every counted crossing moves counterclockwise and its audit has m_minus = 0.
  bool monotone = true;
  /// Maslov index of the pair over [0, 1].
  int maslov_index = 0;
  double max_lagrangian_residual = 0.0;
  std::vector<std::string> warnings;
};

inline SpectralCountReport renormalized_count(const HamiltonianSystem& sys, const BoundaryConditions& bc,
                                              double lambda1, double lambda2, const CountOptions& opts = {}) {
  SpectralCountReport rep;
  rep.window = {lambda1, lambda2};
  rep.method = std::holds_alternative<SeparatedBC>(bc) ? "BC1" : "BC2";
  if (!(lambda1 < lambda2)) throw Error("renormalized_count: need lambda1 < lambda2");
  validate_bc(bc, sys.n());
  if (opts.check) {
    rep.assumptions = check_assumptions(sys, bc, lambda1, lambda2, opts.assumptions);
    if (!rep.assumptions.passed()) {
      if (!opts.force) throw AssumptionFailure(rep.assumptions.failures());
      rep.warnings.push_back("assumptions failed, count forced: " + rep.assumptions.failures());
    }
  }
  sys.require_lambda(lambda1);
  sys.require_lambda(lambda2);

  const auto grid = uniform_grid(opts.propagation.grid_points);
  const CanonicalFrames cf = canonical_frames(sys, bc, lambda1, lambda2, grid, opts.propagation);
  rep.max_lagrangian_residual = std::max(cf.first.max_lagrangian_residual(), cf.second.max_lagrangian_residual());

  const EigenphasePath path = eigenphase_path(cf.first, cf.second, opts.tracking);
  DirectionContext ctx;
  const auto work = cf.working_system;
  ctx.b1 = [work, lambda1](double x) { return work->eval_B(x, lambda1); };
  ctx.b2 = [work, lambda2](double x) { return work->eval_B(x, lambda2); };
  ctx.f1 = [p = cf.first](double x) { return p.at(x); };
  ctx.f2 = [p = cf.second](double x) { return p.at(x); };
  ctx.options = opts.direction;
  const MaslovResult m = maslov_index(path, Complex(-1.0, 0.0), opts.audit_directions ? &ctx : nullptr);
  rep.maslov_index = m.index;

  int left_contribution = 0;
  for (const auto& c : m.crossings) {
    if (c.persistent)
      throw NonIsolatedIntersection("conjugate points fill an interval near x = " + std::to_string(c.location));
    if (c.side == CrossingSide::left_endpoint) {
      left_contribution += c.contribution;
      rep.excluded.push_back(c);
      continue;
    }
    if (c.graze)
      throw IndeterminateCrossing("eigenvalue touches -1 without passing near x = " + std::to_string(c.location));
    rep.count += c.multiplicity;
    if (c.direction != 1 || (c.audit && c.audit->m_minus > 0)) rep.monotone = false;
    rep.crossings.push_back(c);
  }
  if (!rep.monotone) rep.warnings.push_back("a counted crossing is not counterclockwise");
  if (m.index - left_contribution != rep.count)
    rep.warnings.push_back("Maslov index " + std::to_string(m.index) + " differs from the conjugate-point count");
  return rep;
}

}  // namespace maslov
