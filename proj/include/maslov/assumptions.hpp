#pragma once
// Sampled checks of the hypotheses under which eigenvalue counts equal
// conjugate-point counts.

#include "maslov/errors.hpp"
#include "maslov/hamiltonian.hpp"
#include "maslov/propagation.hpp"

#include <limits>
#include <string>
#include <vector>

namespace maslov {

struct AssumptionOptions {
  std::size_t x_samples = 401;
  std::size_t lambda_samples = 101;
  /// Self-adjointness bound on ||B - B^*|| / max(1, ||B||).
  double adjoint_tol = 1e-10;
  /// B(x; lambda2) - B(x; lambda1) may dip to -b1_tol * max(1, ||B||).
  double b1_tol = 1e-12;
  /// Integral matrices count as positive definite when the smallest eigenvalue exceeds this fraction of the largest.
  double definiteness_tol = 1e-12;
  PropagationOptions propagation;
};

enum class AssumptionStatus { pass, fail, assumed };

inline const char* to_string(AssumptionStatus s) {
  switch (s) {
    case AssumptionStatus::pass: return "pass";
    case AssumptionStatus::fail: return "fail";
    default: return "assumed";
  }
}

struct AssumptionItem {
  std::string name;
  AssumptionStatus status = AssumptionStatus::pass;
  /// Smallest sampled value of the quantity that must be non-negative / positive.
  double margin = std::numeric_limits<double>::quiet_NaN();
  double worst_x = std::numeric_limits<double>::quiet_NaN();
  double worst_lambda = std::numeric_limits<double>::quiet_NaN();
  std::string note;
};

struct AssumptionReport {
  std::vector<AssumptionItem> items;

  bool passed() const {
    for (const auto& i : items)
      if (i.status == AssumptionStatus::fail) return false;
    return true;
  }
  const AssumptionItem* find(const std::string& name) const {
    for (const auto& i : items)
      if (i.name == name) return &i;
    return nullptr;
  }
  std::string failures() const {
    std::string s;
    for (const auto& i : items)
      if (i.status == AssumptionStatus::fail) s += (s.empty() ? "" : "; ") + i.name + ": " + i.note;
    return s;
  }
};

namespace detail {

/// Smallest eigenvalue over x > 0 of the cumulative trapezoid integral of S^* B_lambda S,
/// relative to the largest eigenvalue of the full integral.
inline std::pair<double, double> weighted_gram_minimum(const HamiltonianSystem& sys, double lambda,
                                                       const std::vector<Matrix>& s, const std::vector<double>& grid) {
  Matrix acc = Matrix::Zero(s[0].cols(), s[0].cols());
  Matrix prev = s[0].adjoint() * sys.eval_B_lambda(grid[0], lambda) * s[0];
  std::vector<Matrix> integrals;
  integrals.reserve(grid.size());
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const Matrix cur = s[k].adjoint() * sys.eval_B_lambda(grid[k], lambda) * s[k];
    acc += 0.5 * (grid[k] - grid[k - 1]) * (prev + cur);
    prev = cur;
    integrals.push_back(acc);
  }
  double worst = std::numeric_limits<double>::infinity();
  double worst_x = grid[1];
  for (std::size_t k = 0; k < integrals.size(); ++k) {
    const RealVector ev = hermitian_eigenvalues(integrals[k]);
    const double rel = ev(0) / std::max(std::abs(ev(ev.size() - 1)), 1e-300);
    if (rel < worst) {
      worst = rel;
      worst_x = grid[k + 1];
    }
  }
  return {worst, worst_x};
}

}  // namespace detail

/// (A) self-adjointness, (B1) monotonicity of B in lambda, (B2) reported as assumed, and the
/// positivity condition on the integrated frame weight: (C1) for separated conditions,
/// (C2) with the full fundamental solution for general ones.
inline AssumptionReport check_assumptions(const HamiltonianSystem& sys, const BoundaryConditions& bc, double lambda1,
                                          double lambda2, const AssumptionOptions& opt = {}) {
  AssumptionReport rep;
  const auto xs = uniform_grid(opt.x_samples);
  const auto ls = uniform_grid(opt.lambda_samples, lambda1, lambda2);

  {
    AssumptionItem w;
    w.name = "window";
    w.margin = std::min(lambda1 - sys.interval().lo, sys.interval().hi - lambda2);
    if (!(lambda1 < lambda2) || !sys.interval().contains(lambda1) || !sys.interval().contains(lambda2)) {
      w.status = AssumptionStatus::fail;
      w.note = "window must satisfy lambda1 < lambda2 inside the admissible interval";
    }
    rep.items.push_back(w);
  }

  {
    AssumptionItem a;
    a.name = "A";
    double worst = 0.0;
    a.margin = 0.0;
    try {
      for (double x : uniform_grid(std::min<std::size_t>(opt.x_samples, 101)))
        for (double l : uniform_grid(std::min<std::size_t>(opt.lambda_samples, 11), lambda1, lambda2)) {
          const Matrix b = sys.eval_B(x, l);
          const Matrix bl = sys.eval_B_lambda(x, l);
          const double r = std::max(operator_norm(b - b.adjoint()) / std::max(1.0, operator_norm(b)),
                                    operator_norm(bl - bl.adjoint()) / std::max(1.0, operator_norm(bl)));
          if (r > worst) {
            worst = r;
            a.worst_x = x;
            a.worst_lambda = l;
          }
        }
      a.margin = -worst;
      if (worst > opt.adjoint_tol) {
        a.status = AssumptionStatus::fail;
        a.note = "B is not self-adjoint (residual " + std::to_string(worst) + ")";
      }
    } catch (const Error& e) {
      a.status = AssumptionStatus::fail;
      a.note = e.what();
    }
    rep.items.push_back(a);
  }

  {
    AssumptionItem b1;
    b1.name = "B1";
    try {
      double worst = std::numeric_limits<double>::infinity();
      for (double x : xs) {
        const Matrix lo = sys.eval_B(x, lambda1);
        const Matrix hi = sys.eval_B(x, lambda2);
        const double scale = std::max({1.0, operator_norm(lo), operator_norm(hi)});
        const double m = min_hermitian_eigenvalue(hi - lo) / scale;
        if (m < worst) {
          worst = m;
          b1.worst_x = x;
        }
      }
      b1.margin = worst;
      b1.worst_lambda = lambda2;
      if (worst < -opt.b1_tol) {
        b1.status = AssumptionStatus::fail;
        b1.note = "B(x; lambda2) - B(x; lambda1) has a negative eigenvalue at x = " + std::to_string(b1.worst_x);
      }
    } catch (const Error& e) {
      b1.status = AssumptionStatus::fail;
      b1.note = e.what();
    }
    rep.items.push_back(b1);
  }

  rep.items.push_back({"B2", AssumptionStatus::assumed, std::numeric_limits<double>::quiet_NaN(),
                       std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                       "uniqueness on subintervals is not decidable from samples"});

  {
    const bool separated = std::holds_alternative<SeparatedBC>(bc);
    AssumptionItem c;
    c.name = separated ? "C1" : "C2";
    try {
      validate_bc(bc, sys.n());
      const Matrix init = separated ? Matrix(apply_j(std::get<SeparatedBC>(bc).alpha.adjoint()))
                                    : Matrix(Matrix::Identity(2 * sys.n(), 2 * sys.n()));
      double worst = std::numeric_limits<double>::infinity();
      for (double l : ls) {
        const auto s = solution_matrices(sys, l, init, xs, opt.propagation);
        const auto [m, x] = detail::weighted_gram_minimum(sys, l, s, xs);
        if (m < worst) {
          worst = m;
          c.worst_x = x;
          c.worst_lambda = l;
        }
      }
      c.margin = worst;
      if (!(worst > opt.definiteness_tol)) {
        c.status = AssumptionStatus::fail;
        c.note = "integrated weight is not positive definite at x = " + std::to_string(c.worst_x) +
                 ", lambda = " + std::to_string(c.worst_lambda);
      } else {
        c.note = "sampled; also serves as the sampled definiteness check";
      }
    } catch (const Error& e) {
      c.status = AssumptionStatus::fail;
      c.note = e.what();
    }
    rep.items.push_back(c);
  }
  return rep;
}

}  // namespace maslov
