// gaugekit: gauge and perspective duality toolkit
// Licensed under the Apache License, Version 2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "gaugekit/duality.hpp"
#include "gaugekit/nnls.hpp"

namespace gaugekit {

// ---------------------------------------------------------------------------
// Primal recovery from dual solutions. A dual witness pins down the support
// and signs of a one-norm primal solution through the alignment conditions;
// the on-support values then come from small least-squares systems.
// ---------------------------------------------------------------------------

struct SupportSet {
  std::vector<int> indices;  ///< sorted, unique
  std::vector<int> signs;    ///< +1 or -1 per index

  bool empty() const { return indices.empty(); }
  int size() const { return static_cast<int>(indices.size()); }
};

/// Indices where |z_i| reaches the max norm of z up to a relative tolerance.
/// A zero z yields an empty support, which signals a degenerate dual witness
/// to callers.
inline SupportSet active_support(const Vec& z, double tol = 1e-5) {
  require_param(tol >= 0.0, "active_support: tolerance must be nonnegative");
  SupportSet s;
  const double top = z.lpNorm<Eigen::Infinity>();
  if (top == 0.0) return s;
  const double cut = top * (1.0 - tol);
  for (int i = 0; i < z.size(); ++i) {
    if (std::abs(z[i]) >= cut) {
      s.indices.push_back(i);
      s.signs.push_back(z[i] > 0 ? 1 : -1);
    }
  }
  return s;
}

struct RecoveryResult {
  Vec x;
  OptimalityReport report;
  std::string diagnostic;  ///< empty when the pipeline ran clean

  bool certified() const { return diagnostic.empty() && report.certified; }
};

/// Recovery for the one-norm / two-norm pair: the residual of an optimal x
/// is sigma y*/||y*||, so x solves min ||b - sigma y*/||y*|| - Ax|| restricted
/// to the support. A sign-pattern violation on the support triggers one
/// support-shrink retry.
inline RecoveryResult recover_bpdn_least_squares(const ProblemSpec& p,
                                                 const Vec& y_star,
                                                 const SupportSet& support,
                                                 const ToleranceConfig& tol =
                                                     {}) {
  p.check_shapes();
  require_param(p.objective.is_gauge() && p.constraint.is_gauge() &&
                    p.objective.gauge.kind == GaugeKind::L1 &&
                    p.constraint.gauge.kind == GaugeKind::L2,
                "recover_bpdn_least_squares: needs a one-norm objective and "
                "a two-norm constraint");
  require_param(y_star.lpNorm<Eigen::Infinity>() > 0.0,
                "recover_bpdn_least_squares: a zero dual witness signals an "
                "infeasible primal");

  RecoveryResult out;
  const GaugeDualSpec dual = build_gauge_dual(p);
  if (support.empty()) {
    out.x = Vec::Zero(p.a.cols());
    out.report = check_gauge_optimality(dual, out.x, y_star, tol);
    out.diagnostic = "empty support: the dual witness carries no alignment "
                     "information";
    return out;
  }

  const Vec rhs = p.b - (p.sigma / y_star.norm()) * y_star;
  std::vector<int> idx = support.indices;
  std::vector<int> sgn = support.signs;
  Vec x = restricted_least_squares(p.a.matrix(), idx, rhs, 1e-10);

  auto violations = [&]() {
    std::vector<std::size_t> bad;
    for (std::size_t j = 0; j < idx.size(); ++j)
      if (x[idx[j]] * sgn[j] < 0.0) bad.push_back(j);
    return bad;
  };
  auto bad = violations();
  if (!bad.empty()) {
    std::vector<int> idx2, sgn2;
    for (std::size_t j = 0; j < idx.size(); ++j) {
      if (std::find(bad.begin(), bad.end(), j) == bad.end()) {
        idx2.push_back(idx[j]);
        sgn2.push_back(sgn[j]);
      }
    }
    if (idx2.empty()) {
      out.x = Vec::Zero(p.a.cols());
      out.report = check_gauge_optimality(dual, out.x, y_star, tol);
      out.diagnostic = "all support entries violated the dual sign pattern";
      return out;
    }
    idx.swap(idx2);
    sgn.swap(sgn2);
    x = restricted_least_squares(p.a.matrix(), idx, rhs, 1e-10);
    if (!violations().empty())
      out.diagnostic = "sign pattern still violated after one support shrink";
  }

  out.x = std::move(x);
  out.report = check_gauge_optimality(dual, out.x, y_star, tol);
  return out;
}

/// Gauge-problem recovery dispatch keyed on the constraint gauge.
inline RecoveryResult recover_primal_gauge(const ProblemSpec& p,
                                           const Vec& y_star,
                                           const ToleranceConfig& tol = {},
                                           double support_tol = 1e-5) {
  p.check_shapes();
  require_param(p.objective.is_gauge() && p.constraint.is_gauge(),
                "recover_primal_gauge: gauge problems only");
  if (p.constraint.gauge.kind != GaugeKind::L2)
    throw CapabilityError(
        "recover_primal_gauge: only the two-norm constraint has a direct "
        "route; Huber and other piecewise quadratic constraints recover "
        "through recover_primal_perspective");
  const SupportSet support =
      active_support(p.a.apply_adjoint(y_star), support_tol);
  return recover_bpdn_least_squares(p, y_star, support, tol);
}

/// Recovery for the one-norm objective with a Huber-sum constraint. At a dual
/// solution (y, alpha, mu) with mu < 0, (b - Ax, 1) must be sigma times a
/// convex combination of the active gradients of the constraint's perspective
/// polar: the quadratic branch (-(eta/mu) y, eta ||y||^2 / (2 mu^2)) and the
/// max-coordinate branches (sign(y_i) e_i / eta, 0). The second component
/// pins the quadratic weight; the rest is a small nonnegative least-squares
/// over hull weights coupled with the support-restricted x entries.
inline RecoveryResult recover_primal_perspective(const ProblemSpec& p,
                                                 const Vec& y, double alpha,
                                                 double mu,
                                                 const ToleranceConfig& tol =
                                                     {},
                                                 double support_tol = 1e-5) {
  p.check_shapes();
  require_param(p.objective.is_gauge() &&
                    p.objective.gauge.kind == GaugeKind::L1,
                "recover_primal_perspective: one-norm objective required");
  require_param(!p.constraint.is_gauge() &&
                    p.constraint.fn.kind == PerspectiveFn::Kind::HuberSum,
                "recover_primal_perspective: Huber-sum constraint required");
  require_param(p.sigma > 0.0,
                "recover_primal_perspective: sigma must be positive");
  if (mu == 0.0)
    throw CapabilityError(
        "recover_primal_perspective: mu = 0 puts the subdifferential in its "
        "degenerate branch, which this route does not cover");
  require_param(mu < 0.0, "recover_primal_perspective: mu must be <= 0");
  require_param(y.lpNorm<Eigen::Infinity>() > 0.0,
                "recover_primal_perspective: zero dual witness");

  const double eta = p.constraint.fn.eta;
  const double quad_branch = -eta * y.squaredNorm() / (2.0 * mu);
  const double gauge_branch = y.lpNorm<Eigen::Infinity>() / eta;
  const double sharp = std::max(quad_branch, gauge_branch);
  const PerspectiveDualSpec dual = build_perspective_dual(p);

  RecoveryResult out;
  out.x = Vec::Zero(p.a.cols());
  if (quad_branch < gauge_branch * (1.0 - support_tol)) {
    out.report = check_perspective_optimality(dual, out.x, y, alpha, mu, tol);
    out.diagnostic =
        "the quadratic branch of the constraint polar is inactive, so "
        "(b - Ax, 1) cannot lie in its scaled subdifferential: the dual "
        "point is not optimal";
    return out;
  }

  // Weight on the quadratic gradient, forced by the second component of
  // (b - Ax, 1) = sigma * conv{...}. Solver witnesses carry noise well above
  // machine precision, so the consistency band matches the branch-activity
  // tolerance and a small overshoot clamps to the boundary weight.
  double theta_q =
      2.0 * mu * mu / (p.sigma * eta * y.squaredNorm());
  if (theta_q > 1.0 + support_tol) {
    out.report = check_perspective_optimality(dual, out.x, y, alpha, mu, tol);
    out.diagnostic = "quadratic hull weight exceeds 1: no convex combination "
                     "can reach (b - Ax, 1)";
    return out;
  }
  theta_q = std::min(theta_q, 1.0);

  std::vector<int> hull;  // coordinates whose max branch is active
  if (gauge_branch >= sharp * (1.0 - support_tol)) {
    const double cut = (1.0 - support_tol) * sharp * eta;
    for (int i = 0; i < y.size(); ++i)
      if (std::abs(y[i]) >= cut) hull.push_back(i);
  }

  const SupportSet support =
      active_support(p.a.apply_adjoint(y), support_tol);
  if (support.empty()) {
    out.report = check_perspective_optimality(dual, out.x, y, alpha, mu, tol);
    out.diagnostic = "empty support: the dual witness carries no alignment "
                     "information";
    return out;
  }
  const Mat& a = p.a.matrix();
  const int m = static_cast<int>(p.b.size());
  const Vec rhs_top = p.b + p.sigma * theta_q * (eta / mu) * y;

  if (hull.empty()) {
    if (1.0 - theta_q > support_tol) {
      out.report =
          check_perspective_optimality(dual, out.x, y, alpha, mu, tol);
      out.diagnostic = "no max-coordinate branch is active but the quadratic "
                       "weight is not 1: hull system infeasible";
      return out;
    }
    out.x = restricted_least_squares(a, support.indices, rhs_top, 1e-10);
    out.report = check_perspective_optimality(dual, out.x, y, alpha, mu, tol);
    return out;
  }

  // Stack the m alignment equations with the weight-sum equation; split the
  // free x entries into positive and negative parts for the NNLS solver.
  const int ns = support.size();
  const int nh = static_cast<int>(hull.size());
  Mat v = Mat::Zero(m + 1, 2 * ns + nh);
  Vec target(m + 1);
  target.head(m) = rhs_top;
  target[m] = 1.0 - theta_q;
  for (int j = 0; j < ns; ++j) {
    v.block(0, j, m, 1) = a.col(support.indices[j]);
    v.block(0, ns + j, m, 1) = -a.col(support.indices[j]);
  }
  for (int j = 0; j < nh; ++j) {
    const int i = hull[j];
    v(i, 2 * ns + j) = (p.sigma / eta) * (y[i] > 0 ? 1.0 : -1.0);
    v(m, 2 * ns + j) = 1.0;
  }
  const Vec weights = nonnegative_least_squares(v, target);
  const double resid = (v * weights - target).norm();
  if (resid > tol.feas_tol * (1.0 + target.norm()))
    out.diagnostic = "hull system infeasible beyond feas_tol";
  for (int j = 0; j < ns; ++j)
    out.x[support.indices[j]] = weights[j] - weights[ns + j];
  out.report = check_perspective_optimality(dual, out.x, y, alpha, mu, tol);
  return out;
}

/// Rescales the multiplier-block limit of a dual-side solve into a primal
/// solution; nu_l is the dual optimal value.
inline Vec recover_from_lagrange_dual(const Vec& z_star, double nu_l) {
  require_param(nu_l > 0.0 && std::isfinite(nu_l),
                "recover_from_lagrange_dual: a nonpositive optimal value "
                "signals dual degeneracy");
  return z_star / nu_l;
}

}  // namespace gaugekit
