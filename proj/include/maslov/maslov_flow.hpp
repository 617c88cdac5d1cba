#pragma once
// Eigenphase tracking of the unitary W along a path, the Maslov index with
// arrival/departure endpoint conventions, and crossing directions.

#include "maslov/errors.hpp"
#include "maslov/lagrangian.hpp"
#include "maslov/linalg.hpp"
#include "maslov/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace maslov {

/// t -> unitary matrix.
using UnitaryPathFn = std::function<Matrix(double)>;
/// t -> Hermitian matrix (coefficient path).
using MatrixPathFn = std::function<Matrix(double)>;
/// t -> frame.
using FramePathFn = std::function<LagrangianFrame(double)>;

struct PhaseTrackingOptions {
  /// Per-step motion allowed before a midpoint is inserted.
  double max_jump = pi / 4;
  /// Smallest interval that may still be split, relative to the path length.
  double min_width = 1e-13;
  std::size_t max_samples = 2'000'000;
  double angle_tol = 1e-6;
  /// Crossings are bisected down to this width, relative to max(1, path length).
  double bisect_width = 1e-10;
  /// Bound each step by the sampled angular speed as well (guards against a track wrapping between samples).
  bool speed_check = false;
  /// Expected sense of rotation of every track (+1 counterclockwise, -1 clockwise, 0 none); steps
  /// against it are refined down to min_width and then accepted.
  int expected_direction = 0;
};

namespace detail {

inline RealVector sorted_args(const Vector& ev) {
  RealVector a(ev.size());
  for (Eigen::Index j = 0; j < ev.size(); ++j) a(j) = std::arg(ev(j));
  std::sort(a.data(), a.data() + a.size());
  return a;
}

/// Continues the lifted phases `prev` to the eigenvalue arguments `args` by the cyclic
/// assignment of phase-sorted lists with the least squared arc motion. Returns the largest move.
inline double continue_lifts(const RealVector& prev, const RealVector& args, RealVector& next) {
  const Eigen::Index n = prev.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  RealVector wrapped(n);
  for (Eigen::Index j = 0; j < n; ++j) wrapped(j) = wrap_angle(prev(j));
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return wrapped(a) < wrapped(b); });
  RealVector sorted_new = args;
  std::sort(sorted_new.data(), sorted_new.data() + n);
  double best_cost = std::numeric_limits<double>::infinity();
  Eigen::Index best_shift = 0;
  for (Eigen::Index s = 0; s < n; ++s) {
    double cost = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = wrap_angle(sorted_new((j + s) % n) - wrapped(order[static_cast<std::size_t>(j)]));
      cost += d * d;
    }
    if (cost < best_cost) {
      best_cost = cost;
      best_shift = s;
    }
  }
  next.resize(n);
  double jump = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index idx = order[static_cast<std::size_t>(j)];
    const double d = wrap_angle(sorted_new((j + best_shift) % n) - wrapped(idx));
    next(idx) = prev(idx) + d;
    jump = std::max(jump, std::abs(d));
  }
  return jump;
}

}  // namespace detail

/// Continuous lifts of the eigenphases of W(t) on an adaptively refined grid.
class EigenphasePath {
 public:
  EigenphasePath(UnitaryPathFn w, std::vector<double> grid, std::vector<RealVector> lifts, PhaseTrackingOptions opts)
      : w_(std::move(w)), grid_(std::move(grid)), lifts_(std::move(lifts)), opts_(opts) {}

  const std::vector<double>& grid() const noexcept { return grid_; }
  /// lifts()[k](j): lifted phase of track j at grid()[k].
  const std::vector<RealVector>& lifts() const noexcept { return lifts_; }
  Eigen::Index n() const noexcept { return lifts_.empty() ? 0 : lifts_.front().size(); }
  double start() const noexcept { return grid_.front(); }
  double end() const noexcept { return grid_.back(); }
  const PhaseTrackingOptions& options() const noexcept { return opts_; }
  Matrix unitary_at(double t) const { return w_(t); }
  const UnitaryPathFn& unitary_fn() const noexcept { return w_; }

  /// Phases wrapped into (-pi, pi], sorted.
  RealVector wrapped_phases(std::size_t k) const {
    RealVector p = lifts_[k].unaryExpr([](double a) { return wrap_angle(a); });
    std::sort(p.data(), p.data() + p.size());
    return p;
  }

  /// Largest per-step move of any track.
  double max_step_jump() const {
    double j = 0.0;
    for (std::size_t k = 1; k < lifts_.size(); ++k) j = std::max(j, (lifts_[k] - lifts_[k - 1]).cwiseAbs().maxCoeff());
    return j;
  }

 private:
  UnitaryPathFn w_;
  std::vector<double> grid_;
  std::vector<RealVector> lifts_;
  PhaseTrackingOptions opts_;
};

/// Tracks the eigenphases of w over `grid`, inserting midpoints wherever a track moves more than max_jump.
inline EigenphasePath eigenphase_path(UnitaryPathFn w, const std::vector<double>& grid,
                                      const PhaseTrackingOptions& opts = {}) {
  if (grid.size() < 2) throw Error("eigenphase_path: need at least two samples");
  const double span = std::abs(grid.back() - grid.front());
  std::vector<double> ts{grid.front()};
  struct Sample {
    double t;
    RealVector args;
    double speed;
  };
  const double eps = 1e-7 * std::max(1.0, span);
  auto sample_at = [&](double t) {
    Sample s{t, detail::sorted_args(complex_eigenvalues(w(t))), 0.0};
    if (opts.speed_check) {
      // One-sided difference pointing into the grid.
      const double h = (t + eps <= std::max(grid.front(), grid.back())) ? eps : -eps;
      RealVector moved;
      s.speed = detail::continue_lifts(s.args, detail::sorted_args(complex_eigenvalues(w(t + h))), moved) / eps;
    }
    return s;
  };
  Sample first = sample_at(grid.front());
  std::vector<RealVector> lifts{first.args};
  double speed_prev = first.speed;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    std::vector<Sample> pending{sample_at(grid[k])};
    while (!pending.empty()) {
      const double t_prev = ts.back();
      const Sample& top = pending.back();
      const double width = std::abs(top.t - t_prev);
      RealVector next;
      const double jump = detail::continue_lifts(lifts.back(), top.args, next);
      const double swept = std::max(speed_prev, top.speed) * width;
      const bool against =
          opts.expected_direction != 0 &&
          (opts.expected_direction * (next - lifts.back()).array()).minCoeff() < -1e-9;
      if (jump > opts.max_jump || swept > opts.max_jump || against) {
        if (width <= opts.min_width * std::max(1.0, span)) {
          if (jump > opts.max_jump)
            throw RefinementLimit("eigenphase moves " + std::to_string(jump) + " rad over an interval of width " +
                                  std::to_string(width) + " near t = " + std::to_string(t_prev));
        } else {
          pending.push_back(sample_at(0.5 * (t_prev + top.t)));
          continue;
        }
      }
      ts.push_back(top.t);
      lifts.push_back(std::move(next));
      speed_prev = top.speed;
      pending.pop_back();
      if (ts.size() > opts.max_samples) throw RefinementLimit("eigenphase path exceeds the sample budget");
    }
  }
  return EigenphasePath(std::move(w), std::move(ts), std::move(lifts), opts);
}

/// W(x) = w_pair(p1(x), p2(x)) for two frame paths on a shared grid.
inline EigenphasePath eigenphase_path(const FramePath& p1, const FramePath& p2, const PhaseTrackingOptions& opts = {}) {
  if (p1.grid() != p2.grid()) throw Error("eigenphase_path: frame paths must share their grid");
  auto w = [p1, p2](double x) { return w_pair(p1.at(x), p2.at(x)).matrix(); };
  return eigenphase_path(w, p1.grid(), opts);
}

// ---------------------------------------------------------------- crossing directions

struct DirectionOptions {
  double delta_start = 1e-4;
  double delta_min = 1e-9;
  double shrink = 10.0;
  /// Eigenvalues with |mu| <= zero_tol * max(1, ||B2 - B1||) count as zero.
  double zero_tol = 1e-12;
  double pinv_cutoff = 1e-10;
};

struct DirectionAudit {
  int m_plus = 0;
  int m_minus = 0;
  /// Tracks that vanish at every sample (direction not resolved by the compression).
  int m_zero = 0;
  int intersection_rank = 0;
  double delta = 0.0;
  std::vector<double> sample_points;
  /// Eigenvalues of U^*(B2 - B1)U at each sample, ascending.
  std::vector<RealVector> eigenvalues;
  int contribution() const noexcept { return m_plus - m_minus; }
};

/// Signs of the compression of B2 - B1 onto the intersection of the frames' subspaces,
/// sampled on a shrinking window around t_star inside [a, b].
inline DirectionAudit crossing_direction(const MatrixPathFn& b1, const MatrixPathFn& b2, const LagrangianFrame& f1,
                                         const LagrangianFrame& f2, double t_star, std::pair<double, double> domain,
                                         const DirectionOptions& opts = {}) {
  const OrthoProjector pstar =
      intersection_projector(OrthoProjector::onto(f1), OrthoProjector::onto(f2), opts.pinv_cutoff);
  const Matrix u = pstar.range_basis();
  DirectionAudit audit;
  audit.intersection_rank = static_cast<int>(u.cols());
  if (u.cols() == 0) return audit;
  for (double delta = opts.delta_start; delta >= opts.delta_min * (1 - 1e-9); delta /= opts.shrink) {
    audit.delta = delta;
    audit.sample_points.clear();
    audit.eigenvalues.clear();
    for (double s : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
      const double t = t_star + s * delta;
      if (t < domain.first || t > domain.second) continue;
      audit.sample_points.push_back(t);
      const Matrix diff = b2(t) - b1(t);
      const double scale = std::max(1.0, operator_norm(diff));
      RealVector ev = hermitian_eigenvalues(u.adjoint() * diff * u);
      for (Eigen::Index j = 0; j < ev.size(); ++j)
        if (std::abs(ev(j)) <= opts.zero_tol * scale) ev(j) = 0.0;
      audit.eigenvalues.push_back(ev);
    }
    audit.m_plus = audit.m_minus = audit.m_zero = 0;
    bool mixed = false;
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
      bool pos = false, neg = false;
      for (const auto& ev : audit.eigenvalues) {
        pos = pos || ev(j) > 0.0;
        neg = neg || ev(j) < 0.0;
      }
      if (pos && neg) mixed = true;
      bool all_pos = true, all_neg = true;
      for (const auto& ev : audit.eigenvalues) {
        all_pos = all_pos && ev(j) > 0.0;
        all_neg = all_neg && ev(j) < 0.0;
      }
      if (all_pos)
        ++audit.m_plus;
      else if (all_neg)
        ++audit.m_minus;
      else if (!pos && !neg)
        ++audit.m_zero;
    }
    if (!mixed) return audit;
  }
  throw IndefiniteDirection("compression of B2 - B1 changes sign on both sides of t = " + std::to_string(t_star));
}

/// Direction of the eigenvalue w0 of W through the rotated target rotate_target(f2, w0),
/// with B3 = G B2 G^{-1}, G = i(1 - w0) I - (1 + w0) J.
inline DirectionAudit rotated_direction(const MatrixPathFn& b1, const MatrixPathFn& b2, const LagrangianFrame& f1,
                                        const LagrangianFrame& f2, double t_star, Complex w0,
                                        std::pair<double, double> domain, const DirectionOptions& opts = {}) {
  const Eigen::Index n = f1.n();
  const Matrix g = rotation_g(n, w0);
  const Matrix g_inv = rotation_g_inverse(n, w0);
  auto b3 = [b2, g, g_inv](double t) { return Matrix(hermitian_part(g * b2(t) * g_inv)); };
  return crossing_direction(b1, b3, f1, rotate_target(f2, w0), t_star, domain, opts);
}

/// Data needed to attach direction audits to detected crossings.
struct DirectionContext {
  MatrixPathFn b1;
  MatrixPathFn b2;
  FramePathFn f1;
  FramePathFn f2;
  DirectionOptions options;
};

// ---------------------------------------------------------------- Maslov index

enum class CrossingSide { interior, left_endpoint, right_endpoint };

inline const char* to_string(CrossingSide s) {
  switch (s) {
    case CrossingSide::left_endpoint: return "left-endpoint";
    case CrossingSide::right_endpoint: return "right-endpoint";
    default: return "interior";
  }
}

struct CrossingRecord {
  double location = 0.0;
  int multiplicity = 0;
  /// +1 counterclockwise, -1 clockwise, 0 indeterminate (per multiplicity unit).
  int direction = 0;
  CrossingSide side = CrossingSide::interior;
  /// Signed contribution of this record to the index.
  int contribution = 0;
  /// Touches the point without passing through it.
  bool graze = false;
  /// The intersection persists over consecutive samples.
  bool persistent = false;
  std::optional<DirectionAudit> audit;
};

struct MaslovResult {
  int index = 0;
  std::vector<CrossingRecord> crossings;
};

namespace detail {

struct TrackEvent {
  Eigen::Index track;
  double t;
  int contribution;
  int direction;
  bool graze;
  bool persistent;
};

/// Relative phase of the eigenvalue of W(t) closest to `guess`, measured from arg(point).
inline double track_value(const EigenphasePath& path, double t, Complex point, double guess) {
  const Vector ev = complex_eigenvalues(path.unitary_at(t));
  double best = 0.0;
  double dist = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < ev.size(); ++j) {
    const double p = relative_phase(ev(j), point);
    if (std::abs(p - guess) < dist) {
      dist = std::abs(p - guess);
      best = p;
    }
  }
  return best;
}

/// Root of a track's relative phase in [ta, tb] given opposite signs at the ends.
inline double bisect_track(const EigenphasePath& path, Complex point, double ta, double ga, double tb, double gb) {
  const double width = path.options().bisect_width * std::max(1.0, std::abs(path.end() - path.start()));
  for (int it = 0; it < 200 && std::abs(tb - ta) > width; ++it) {
    const double tm = 0.5 * (ta + tb);
    const double gm = track_value(path, tm, point, 0.5 * (ga + gb));
    if (gm == 0.0) return tm;
    if ((gm < 0.0) == (ga < 0.0)) {
      ta = tm;
      ga = gm;
    } else {
      tb = tm;
      gb = gm;
    }
  }
  return 0.5 * (ta + tb);
}

/// Minimum of |relative phase| of a track on [ta, tb] by golden-section search.
inline std::pair<double, double> graze_minimum(const EigenphasePath& path, Complex point, double ta, double tb,
                                               double guess) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = tb - r * (tb - ta), d = ta + r * (tb - ta);
  double fc = std::abs(track_value(path, c, point, guess));
  double fd = std::abs(track_value(path, d, point, guess));
  const double width = path.options().bisect_width * std::max(1.0, std::abs(path.end() - path.start()));
  for (int it = 0; it < 200 && std::abs(tb - ta) > width; ++it) {
    if (fc < fd) {
      tb = d;
      d = c;
      fd = fc;
      c = tb - r * (tb - ta);
      fc = std::abs(track_value(path, c, point, guess));
    } else {
      ta = c;
      c = d;
      fc = fd;
      d = ta + r * (tb - ta);
      fd = std::abs(track_value(path, d, point, guess));
    }
  }
  return fc < fd ? std::pair{c, fc} : std::pair{d, fd};
}

inline std::vector<TrackEvent> track_events(const EigenphasePath& path, Complex point, Eigen::Index j) {
  const double beta = std::arg(point);
  const double tol = path.options().angle_tol;
  const auto& ts = path.grid();
  const std::size_t k_max = ts.size();
  std::vector<long> f(k_max);
  std::vector<char> snapped(k_max);
  std::vector<double> g(k_max);  // relative phase measured from the nearest multiple of 2 pi
  for (std::size_t k = 0; k < k_max; ++k) {
    const double u = (path.lifts()[k](j) - beta) / (2 * pi);
    const double m = std::round(u);
    g[k] = (u - m) * 2 * pi;
    snapped[k] = std::abs(g[k]) <= tol;
    f[k] = snapped[k] ? static_cast<long>(m) : static_cast<long>(std::floor(u));
  }
  std::vector<TrackEvent> events;
  std::size_t k = 0;
  while (k < k_max) {
    if (snapped[k]) {
      std::size_t kb = k;
      while (kb + 1 < k_max && snapped[kb + 1]) ++kb;
      const long before = k > 0 ? f[k - 1] : f[k];
      const long after = kb + 1 < k_max ? f[kb + 1] : f[kb];
      const int contribution = static_cast<int>(after - before);
      double t = ts[k];
      std::size_t k_min = k;
      double run_max = 0.0;
      for (std::size_t q = k; q <= kb; ++q) {
        if (std::abs(g[q]) < std::abs(g[k_min])) k_min = q;
        run_max = std::max(run_max, std::abs(g[q]));
      }
      if (k == 0) {
        t = ts.front();
      } else if (kb + 1 == k_max) {
        t = ts.back();
      } else {
        t = ts[k_min];
        if ((g[k - 1] < 0.0) != (g[kb + 1] < 0.0)) t = bisect_track(path, point, ts[k - 1], g[k - 1], ts[kb + 1], g[kb + 1]);
      }
      // A slow tangential approach stays within angle_tol for a few samples; a genuine
      // persistent intersection sits at the point to integration accuracy.
      const bool persistent = kb >= k + 2 && run_max <= 1e-8;
      const int dir = contribution > 0 ? 1 : contribution < 0 ? -1 : 0;
      int motion = dir;
      if (motion == 0) {
        // Endpoint departures and arrivals carry their direction in the neighbouring sample.
        if (k == 0 && kb + 1 < k_max) motion = g[kb + 1] > 0 ? 1 : g[kb + 1] < 0 ? -1 : 0;
        if (kb + 1 == k_max && k > 0) motion = g[k - 1] < 0 ? 1 : g[k - 1] > 0 ? -1 : 0;
      }
      const bool touch = contribution == 0 && k > 0 && kb + 1 < k_max && !persistent;
      events.push_back({j, t, contribution, motion, touch, persistent});
      k = kb + 1;
      continue;
    }
    if (k + 1 < k_max && !snapped[k + 1] && f[k + 1] != f[k]) {
      // Transversal passage strictly inside (t_k, t_{k+1}); measure from the crossed multiple.
      const long crossed = std::max(f[k], f[k + 1]);
      const double ga = path.lifts()[k](j) - beta - 2 * pi * double(crossed);
      const double gb = path.lifts()[k + 1](j) - beta - 2 * pi * double(crossed);
      const double t = bisect_track(path, point, ts[k], ga, ts[k + 1], gb);
      const int contribution = static_cast<int>(f[k + 1] - f[k]);
      events.push_back({j, t, contribution, contribution > 0 ? 1 : -1, false, false});
    } else if (k > 0 && k + 1 < k_max && !snapped[k - 1] && !snapped[k + 1] && f[k - 1] == f[k] &&
               f[k] == f[k + 1] && std::abs(g[k]) < 0.2 && std::abs(g[k]) < std::abs(g[k - 1]) &&
               std::abs(g[k]) <= std::abs(g[k + 1]) && (g[k - 1] > 0) == (g[k + 1] > 0) &&
               (g[k] > 0) == (g[k + 1] > 0)) {
      // A track approaching the point and turning back between samples.
      const auto [tm, gm] = graze_minimum(path, point, ts[k - 1], ts[k + 1], g[k]);
      if (gm <= tol) events.push_back({j, tm, 0, 0, true, false});
    }
    ++k;
  }
  return events;
}

}  // namespace detail

/// Signed count of eigenvalue passages through `point`: +1 for counterclockwise arrivals,
/// -1 for clockwise departures, endpoint samples included; computed from the lifted phases
/// as sum_j [floor(phi_j(b) / 2 pi) - floor(phi_j(a) / 2 pi)] with phases within angle_tol of
/// a multiple of 2 pi snapped onto it.
inline MaslovResult maslov_index(const EigenphasePath& path, Complex point = Complex(-1.0, 0.0),
                                 const DirectionContext* ctx = nullptr) {
  std::vector<detail::TrackEvent> events;
  for (Eigen::Index j = 0; j < path.n(); ++j) {
    auto e = detail::track_events(path, point, j);
    events.insert(events.end(), e.begin(), e.end());
  }
  std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) { return a.t < b.t; });

  const double span = std::abs(path.end() - path.start());
  const double group_tol = 1e-7 * std::max(1.0, span);
  const double end_tol = 1e-12 * std::max(1.0, span);
  MaslovResult result;
  std::size_t i = 0;
  while (i < events.size()) {
    std::size_t e = i;
    while (e + 1 < events.size() && events[e + 1].t - events[i].t <= group_tol) ++e;
    for (int dir : {1, -1, 0}) {
      CrossingRecord rec;
      for (std::size_t q = i; q <= e; ++q) {
        if (events[q].direction != dir) continue;
        ++rec.multiplicity;
        rec.contribution += events[q].contribution;
        rec.graze = rec.graze || events[q].graze;
        rec.persistent = rec.persistent || events[q].persistent;
        rec.location = events[q].t;
      }
      if (rec.multiplicity == 0) continue;
      rec.direction = dir;
      rec.side = std::abs(rec.location - path.start()) <= end_tol ? CrossingSide::left_endpoint
                 : std::abs(rec.location - path.end()) <= end_tol ? CrossingSide::right_endpoint
                                                                    : CrossingSide::interior;
      result.index += rec.contribution;
      result.crossings.push_back(rec);
    }
    i = e + 1;
  }
  if (ctx) {
    const auto domain = std::pair{std::min(path.start(), path.end()), std::max(path.start(), path.end())};
    for (auto& rec : result.crossings) {
      const LagrangianFrame f1 = ctx->f1(rec.location);
      const LagrangianFrame f2 = ctx->f2(rec.location);
      rec.audit = point == Complex(-1.0, 0.0)
                      ? crossing_direction(ctx->b1, ctx->b2, f1, f2, rec.location, domain, ctx->options)
                      : rotated_direction(ctx->b1, ctx->b2, f1, f2, rec.location, point, domain, ctx->options);
    }
  }
  return result;
}

}  // namespace maslov
