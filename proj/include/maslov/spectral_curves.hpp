#pragma once
// Conjugate pairs (x, lambda) over the box [0, 1] x [lambda1, lambda2), linked into curves,
// with CSV and SVG export.

#include "maslov/errors.hpp"
#include "maslov/maslov_flow.hpp"
#include "maslov/propagation.hpp"
#include "maslov/renormalized_count.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace maslov {

enum class CurveMethod { standard, renormalized };

inline const char* to_string(CurveMethod m) { return m == CurveMethod::standard ? "standard" : "renormalized"; }

struct CurvePoint {
  double x = 0.0;
  double lambda = 0.0;
  int multiplicity = 1;
};

struct Curve {
  int id = 0;
  /// Sorted by lambda.
  std::vector<CurvePoint> points;
};

struct CurveSet {
  CurveMethod method = CurveMethod::renormalized;
  std::vector<CurvePoint> points;
  std::vector<Curve> curves;
  std::pair<double, double> box;
  /// Values of lambda in the box where a curve meets x = 1.
  std::vector<double> top_crossings;
};

struct ScanOptions {
  CountOptions count;
  /// Deepest halving of the base column spacing.
  int max_refinement = 12;
  /// Links are accepted up to this many base column spacings in scaled (x, lambda).
  double gap_factor = 3.0;
};

namespace detail {

struct Column {
  double lambda;
  std::vector<CurvePoint> points;
};

struct ScanContext {
  std::shared_ptr<const HamiltonianSystem> work;
  LagrangianFrame initial;
  FramePath second;
  LagrangianFrame target;
  std::vector<double> grid;
  CurveMethod method;
  const CountOptions* opts;
};

inline Column scan_column(const ScanContext& c, double lambda) {
  const FramePath p1 =
      integrate_frame(*c.work, lambda, c.initial, PathDirection::forward, c.grid, c.opts->propagation);
  const FramePath p2 = c.method == CurveMethod::renormalized ? c.second : FramePath::constant(c.target, c.grid);
  const MaslovResult m = maslov_index(eigenphase_path(p1, p2, c.opts->tracking));
  Column col{lambda, {}};
  for (const auto& r : m.crossings)
    if (r.location > 1e-9) col.points.push_back({r.location, lambda, r.multiplicity});
  std::sort(col.points.begin(), col.points.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
  return col;
}

inline double scaled_distance(const CurvePoint& a, const CurvePoint& b, double lambda_span) {
  return std::hypot(a.x - b.x, (a.lambda - b.lambda) / lambda_span);
}

/// Mutual nearest neighbours within `gap`; `forward[i]` is the index in b linked to a[i], or -1.
/// Returns false when some link is ambiguous (a runner-up within 1.5x of the best).
inline bool link_columns(const Column& a, const Column& b, double span, double gap, std::vector<int>& forward,
                         std::vector<int>& backward) {
  forward.assign(a.points.size(), -1);
  backward.assign(b.points.size(), -1);
  bool clean = true;
  auto nearest = [span](const CurvePoint& p, const std::vector<CurvePoint>& in, double& best, double& second) {
    int idx = -1;
    best = second = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < in.size(); ++j) {
      const double d = scaled_distance(p, in[j], span);
      if (d < best) {
        second = best;
        best = d;
        idx = static_cast<int>(j);
      } else if (d < second) {
        second = d;
      }
    }
    return idx;
  };
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    double best, second, back_best, back_second;
    const int j = nearest(a.points[i], b.points, best, second);
    if (j < 0 || best > gap) continue;
    const int k = nearest(b.points[j], a.points, back_best, back_second);
    if (k != static_cast<int>(i)) continue;
    if (second < 1.5 * best || back_second < 1.5 * back_best) {
      clean = false;
      continue;
    }
    forward[i] = j;
    backward[j] = static_cast<int>(i);
  }
  return clean;
}

inline bool has_top_crossing(const std::vector<double>& tops, double lo, double hi) {
  for (double t : tops)
    if (t > lo && t <= hi) return true;
  return false;
}

/// Every unlinked point is an exit or entry through x = 1 bracketed by the two columns.
inline bool columns_explained(const Column& a, const Column& b, const std::vector<int>& fwd,
                              const std::vector<int>& bwd, const std::vector<double>& tops, double gap) {
  const bool top = has_top_crossing(tops, a.lambda, b.lambda);
  for (std::size_t i = 0; i < fwd.size(); ++i)
    if (fwd[i] < 0 && !(top && a.points[i].x >= 1.0 - gap)) return false;
  for (std::size_t j = 0; j < bwd.size(); ++j)
    if (bwd[j] < 0 && !(top && b.points[j].x >= 1.0 - gap)) return false;
  return true;
}

}  // namespace detail

/// Lambda values in [lambda1, lambda2) where the frame at x = 1 meets the target.
inline std::vector<double> top_shelf_crossings(const HamiltonianSystem& work, const LagrangianFrame& initial,
                                               const LagrangianFrame& target, double lambda1, double lambda2,
                                               std::size_t samples, const CountOptions& opts) {
  const PropagationOptions prop = opts.propagation;
  auto w = [&work, initial, target, prop](double l) {
    return w_pair(propagate_frame(work, l, initial, 0.0, 1.0, prop), target).matrix();
  };
  PhaseTrackingOptions tracking = opts.tracking;
  tracking.speed_check = true;
  tracking.expected_direction = -1;
  const MaslovResult m = maslov_index(eigenphase_path(w, uniform_grid(samples, lambda1, lambda2), tracking));
  std::vector<double> out;
  for (const auto& c : m.crossings)
    if (c.side != CrossingSide::right_endpoint)
      for (int k = 0; k < c.multiplicity; ++k) out.push_back(c.location);
  return out;
}

inline CurveSet scan_box(const HamiltonianSystem& sys, const BoundaryConditions& bc, double lambda1, double lambda2,
                         int resolution, CurveMethod method, const ScanOptions& opts = {}) {
  if (resolution < 2) throw ResolutionTooCoarse("scan_box: need at least two lambda columns");
  if (!(lambda1 < lambda2)) throw Error("scan_box: need lambda1 < lambda2");
  if (method == CurveMethod::standard && !std::holds_alternative<SeparatedBC>(bc))
    throw UnsupportedSystem("the fixed-target scan needs separated boundary conditions");
  sys.require_lambda(lambda1);
  sys.require_lambda(lambda2);
  const CountOptions& co = opts.count;
  const auto grid = uniform_grid(co.propagation.grid_points);
  const CanonicalFrames cf = canonical_frames(sys, bc, lambda1, lambda2, grid, co.propagation);
  const detail::ScanContext ctx{cf.working_system, cf.initial, cf.second, cf.target, grid, method, &co};

  CurveSet cs;
  cs.method = method;
  cs.box = {lambda1, lambda2};
  cs.top_crossings = top_shelf_crossings(*cf.working_system, cf.initial, cf.target, lambda1, lambda2,
                                         static_cast<std::size_t>(resolution) + 1, co);

  const double span = lambda2 - lambda1;
  const double base = span / resolution;
  const double gap = opts.gap_factor / resolution;
  std::vector<detail::Column> cols;
  for (int k = 0; k < resolution; ++k) cols.push_back(detail::scan_column(ctx, lambda1 + k * base));

  const double finest = base / std::ldexp(1.0, opts.max_refinement);
  std::vector<int> fwd, bwd;
  for (bool inserted = true; inserted;) {
    inserted = false;
    std::vector<detail::Column> next{cols.front()};
    for (std::size_t i = 0; i + 1 < cols.size(); ++i) {
      const auto& a = cols[i];
      const auto& b = cols[i + 1];
      const bool clean = detail::link_columns(a, b, span, gap, fwd, bwd);
      if ((!clean || !detail::columns_explained(a, b, fwd, bwd, cs.top_crossings, gap)) &&
          b.lambda - a.lambda > 1.5 * finest) {
        next.push_back(detail::scan_column(ctx, 0.5 * (a.lambda + b.lambda)));
        inserted = true;
      }
      next.push_back(b);
    }
    cols = std::move(next);
  }

  // Chain links into curves; ambiguous or over-long links split.
  std::vector<std::vector<int>> id(cols.size());
  std::vector<std::vector<CurvePoint>> curves;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    id[i].assign(cols[i].points.size(), -1);
    if (i > 0) {
      detail::link_columns(cols[i - 1], cols[i], span, gap, fwd, bwd);
      for (std::size_t j = 0; j < bwd.size(); ++j)
        if (bwd[j] >= 0) id[i][j] = id[i - 1][bwd[j]];
    }
    for (std::size_t j = 0; j < cols[i].points.size(); ++j) {
      if (id[i][j] < 0) {
        id[i][j] = static_cast<int>(curves.size());
        curves.emplace_back();
      }
      curves[id[i][j]].push_back(cols[i].points[j]);
    }
  }

  // Attach each crossing of x = 1 to the nearest open curve end.
  for (double t : cs.top_crossings) {
    const CurvePoint top{1.0, t, 1};
    bool present = false;
    for (const auto& c : curves)
      for (const auto& p : c)
        if (p.x >= 1.0 - 1e-9 && std::abs(p.lambda - t) <= 1e-9 * std::max(1.0, std::abs(t))) present = true;
    if (present) continue;
    int best = -1;
    bool at_back = true;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < curves.size(); ++k) {
      // A curve reaches x = 1 after its last column or leaves it before its first.
      const CurvePoint& back = curves[k].back();
      const CurvePoint& front = curves[k].front();
      if (back.lambda <= t && back.x < 1.0 - 1e-9 && t - back.lambda <= base * 1.0001) {
        const double d = detail::scaled_distance(back, top, span);
        if (d < best_d) best_d = d, best = static_cast<int>(k), at_back = true;
      }
      if (front.lambda >= t && front.x < 1.0 - 1e-9 && front.lambda - t <= base * 1.0001) {
        const double d = detail::scaled_distance(front, top, span);
        if (d < best_d) best_d = d, best = static_cast<int>(k), at_back = false;
      }
    }
    if (best >= 0 && best_d <= 2.0 * gap)
      at_back ? curves[best].push_back(top) : (void)curves[best].insert(curves[best].begin(), top);
    else
      curves.push_back({top});
  }

  for (std::size_t k = 0; k < curves.size(); ++k) {
    auto& c = curves[k];
    std::sort(c.begin(), c.end(), [](const auto& a, const auto& b) {
      return a.lambda != b.lambda ? a.lambda < b.lambda : a.x < b.x;
    });
    cs.curves.push_back({static_cast<int>(k), c});
    cs.points.insert(cs.points.end(), c.begin(), c.end());
  }
  return cs;
}

/// Each curve's x is non-decreasing in lambda (renormalized scans under the standing assumptions).
inline bool curves_monotone(const CurveSet& cs, double tol = 1e-9) {
  for (const auto& c : cs.curves)
    for (std::size_t k = 1; k < c.points.size(); ++k)
      if (c.points[k].x < c.points[k - 1].x - tol) return false;
  return true;
}

/// Each curve starts on the lambda1 column or at x = 1.
inline bool curves_enter_left_or_top(const CurveSet& cs, double tol = 1e-9) {
  for (const auto& c : cs.curves) {
    const auto& p = c.points.front();
    if (std::abs(p.lambda - cs.box.first) > tol * std::max(1.0, std::abs(cs.box.first)) && p.x < 1.0 - tol)
      return false;
  }
  return true;
}

/// Lambda values of curve points on x = 1, sorted.
inline std::vector<double> curve_top_crossings(const CurveSet& cs, double tol = 1e-9) {
  std::vector<double> out;
  for (const auto& c : cs.curves)
    for (const auto& p : c.points)
      if (p.x >= 1.0 - tol)
        for (int k = 0; k < p.multiplicity; ++k) out.push_back(p.lambda);
  std::sort(out.begin(), out.end());
  return out;
}

enum class CurveFormat { csv, svg };

inline std::string curves_csv(const CurveSet& cs) {
  std::string out = "method,curve_id,x,lambda,multiplicity\n";
  char buf[128];
  for (const auto& c : cs.curves)
    for (const auto& p : c.points) {
      std::snprintf(buf, sizeof buf, "%s,%d,%.17g,%.17g,%d\n", to_string(cs.method), c.id, p.x, p.lambda,
                    p.multiplicity);
      out += buf;
    }
  return out;
}

inline std::string curves_svg(const CurveSet& cs) {
  constexpr double w = 640, h = 480, m = 48;
  const double l1 = cs.box.first, l2 = cs.box.second;
  auto px = [&](double x) { return m + x * (w - 2 * m); };
  auto py = [&](double l) { return h - m - (l - l1) / (l2 - l1) * (h - 2 * m); };
  std::ostringstream s;
  s.precision(6);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
    << ' ' << h << "\">\n";
  s << "<rect x=\"" << m << "\" y=\"" << m << "\" width=\"" << w - 2 * m << "\" height=\"" << h - 2 * m
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  s << "<text x=\"" << w / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\">x</text>\n";
  s << "<text x=\"14\" y=\"" << h / 2 << "\" text-anchor=\"middle\">&#955;</text>\n";
  s << "<text x=\"" << m << "\" y=\"" << h - m + 16 << "\" text-anchor=\"middle\">0</text>\n";
  s << "<text x=\"" << w - m << "\" y=\"" << h - m + 16 << "\" text-anchor=\"middle\">1</text>\n";
  s << "<text x=\"" << m - 4 << "\" y=\"" << h - m << "\" text-anchor=\"end\">" << l1 << "</text>\n";
  s << "<text x=\"" << m - 4 << "\" y=\"" << m + 4 << "\" text-anchor=\"end\">" << l2 << "</text>\n";
  for (const auto& c : cs.curves) {
    int mult = 1;
    for (const auto& p : c.points) mult = std::max(mult, p.multiplicity);
    s << "<polyline id=\"curve-" << c.id << "\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"" << 1.5 * mult
      << "\" points=\"";
    for (std::size_t k = 0; k < c.points.size(); ++k)
      s << (k ? " " : "") << px(c.points[k].x) << ',' << py(c.points[k].lambda);
    if (c.points.size() == 1) s << ' ' << px(c.points[0].x) << ',' << py(c.points[0].lambda);
    s << "\"/>\n";
  }
  s << "</svg>\n";
  return s.str();
}

inline void export_curves(const CurveSet& cs, CurveFormat format, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << (format == CurveFormat::csv ? curves_csv(cs) : curves_svg(cs));
  if (!f) throw IoError("write to " + path + " failed");
}

}  // namespace maslov
