#pragma once
// Adaptive Dormand–Prince 5(4) integrator for matrix-valued linear ODEs with
// dense output and optional column re-orthonormalization after every step.

#include "maslov/errors.hpp"
#include "maslov/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace maslov {

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  /// Relative floor on |h|; crossing it raises StepSizeUnderflow.
  double min_step = 1e-14;
  long max_steps = 2'000'000;
};

enum class Normalization { none, orthonormal };

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
  long evaluations = 0;
};

namespace detail {

struct DopriTableau {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                          d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                          d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;
};

inline double error_norm(const Matrix& err, const Matrix& y0, const Matrix& y1, double atol, double rtol) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < err.cols(); ++j)
    for (Eigen::Index i = 0; i < err.rows(); ++i) {
      const double sc = atol + rtol * std::max(std::abs(y0(i, j)), std::abs(y1(i, j)));
      const double r = std::abs(err(i, j)) / sc;
      acc += r * r;
    }
  return std::sqrt(acc / double(std::max<Eigen::Index>(err.size(), 1)));
}

/// One segment without interior coefficient jumps. Outputs must be ordered along the direction of travel.
template <class Rhs>
void integrate_segment(Rhs& f, Matrix& y, double x0, double x_end, const std::vector<double>& outputs,
                       std::size_t& next_out, std::vector<Matrix>& out, const OdeOptions& opt, Normalization norm,
                       OdeStats& stats) {
  using T = DopriTableau;
  const double span = x_end - x0;
  const double dir = span >= 0 ? 1.0 : -1.0;
  double x = x0;
  auto emit_here = [&]() {
    while (next_out < outputs.size() && std::abs(outputs[next_out] - x) <= 1e-15 * std::max(1.0, std::abs(x)))
      out[next_out++] = y;
  };
  emit_here();
  if (span == 0.0) return;

  Matrix k1 = f(x, y);
  ++stats.evaluations;
  // Initial step from the scaled norms of y and y'.
  double h;
  {
    const double d0 = error_norm(y, y, y, opt.atol, opt.rtol);
    const double d1 = error_norm(k1, y, y, opt.atol, opt.rtol);
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min(h, std::abs(span)) * dir;
  }

  Matrix k2, k3, k4, k5, k6, k7, y1, ytmp;
  while (dir * (x_end - x) > 0.0) {
    if (stats.accepted + stats.rejected >= opt.max_steps)
      throw ToleranceNotMet("integrator exceeded " + std::to_string(opt.max_steps) + " steps");
    bool last = false;
    if (dir * (x + h - x_end) >= 0.0) {
      h = x_end - x;
      last = true;
    }
    if (std::abs(h) < opt.min_step * std::max(1.0, std::abs(x)))
      throw StepSizeUnderflow("step size underflow at x = " + std::to_string(x));

    ytmp = y + h * T::a21 * k1;
    k2 = f(x + T::c2 * h, ytmp);
    ytmp = y + h * (T::a31 * k1 + T::a32 * k2);
    k3 = f(x + T::c3 * h, ytmp);
    ytmp = y + h * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3);
    k4 = f(x + T::c4 * h, ytmp);
    ytmp = y + h * (T::a51 * k1 + T::a52 * k2 + T::a53 * k3 + T::a54 * k4);
    k5 = f(x + T::c5 * h, ytmp);
    ytmp = y + h * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 + T::a64 * k4 + T::a65 * k5);
    k6 = f(x + h, ytmp);
    y1 = y + h * (T::b1 * k1 + T::b3 * k3 + T::b4 * k4 + T::b5 * k5 + T::b6 * k6);
    const double x1 = last ? x_end : x + h;
    k7 = f(x1, y1);
    stats.evaluations += 6;

    const Matrix err = h * (T::e1 * k1 + T::e3 * k3 + T::e4 * k4 + T::e5 * k5 + T::e6 * k6 + T::e7 * k7);
    const double en = error_norm(err, y, y1, opt.atol, opt.rtol);
    if (!std::isfinite(en)) {
      ++stats.rejected;
      h *= 0.2;
      continue;
    }
    if (en > 1.0) {
      ++stats.rejected;
      h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
      continue;
    }
    ++stats.accepted;

    // Dense output on (x, x1].
    while (next_out < outputs.size() && dir * (outputs[next_out] - x1) <= 1e-15 * std::max(1.0, std::abs(x1))) {
      const double theta = (outputs[next_out] - x) / h;
      const double theta1 = 1.0 - theta;
      const Matrix rc2 = y1 - y;
      const Matrix rc3 = h * k1 - rc2;
      const Matrix rc4 = rc2 - h * k7 - rc3;
      const Matrix rc5 = h * (T::d1 * k1 + T::d3 * k3 + T::d4 * k4 + T::d5 * k5 + T::d6 * k6 + T::d7 * k7);
      out[next_out++] = y + theta * (rc2 + theta1 * (rc3 + theta * (rc4 + theta1 * rc5)));
    }

    y = y1;
    k1 = k7;
    x = x1;
    if (norm == Normalization::orthonormal) {
      const ThinQr qr = thin_qr(y);
      y = qr.q;
      qr.r.triangularView<Eigen::Upper>().template solveInPlace<Eigen::OnTheRight>(k1);
    }
    const double fac = en == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(en, -0.2)));
    h *= fac;
  }
}

}  // namespace detail

/// Integrates y' = f(x, y) from x0 through every point of `outputs` (ordered along the
/// direction of travel) and returns the state at each. Interior breakpoints restart the step
/// sequence so that piecewise coefficients are never straddled.
template <class Rhs>
std::vector<Matrix> integrate_dense(Rhs f, Matrix y0, double x0, const std::vector<double>& outputs,
                                    const OdeOptions& opt = {}, Normalization norm = Normalization::none,
                                    const std::vector<double>& breakpoints = {}, OdeStats* stats_out = nullptr) {
  std::vector<Matrix> out(outputs.size());
  if (outputs.empty()) return out;
  const double x_end = outputs.back();
  const double dir = x_end >= x0 ? 1.0 : -1.0;
  for (std::size_t k = 1; k < outputs.size(); ++k)
    if (dir * (outputs[k] - outputs[k - 1]) < 0.0) throw Error("integrate_dense: outputs not ordered");
  if (dir * (outputs.front() - x0) < 0.0) throw Error("integrate_dense: first output precedes x0");

  std::vector<double> stops;
  for (double b : breakpoints)
    if (dir * (b - x0) > 0.0 && dir * (x_end - b) > 0.0) stops.push_back(b);
  std::sort(stops.begin(), stops.end(), [dir](double a, double b) { return dir * a < dir * b; });
  stops.push_back(x_end);

  OdeStats stats;
  std::size_t next_out = 0;
  Matrix y = std::move(y0);
  double x = x0;
  for (double stop : stops) {
    detail::integrate_segment(f, y, x, stop, outputs, next_out, out, opt, norm, stats);
    x = stop;
  }
  while (next_out < outputs.size()) out[next_out++] = y;
  if (stats_out) *stats_out = stats;
  return out;
}

/// -J Z: (Z_top; Z_bottom) -> (Z_bottom; -Z_top).
inline Matrix apply_j_inverse(const Matrix& z) {
  const Eigen::Index n = z.rows() / 2;
  Matrix out(z.rows(), z.cols());
  out.topRows(n) = z.bottomRows(n);
  out.bottomRows(n) = -z.topRows(n);
  return out;
}

}  // namespace maslov
