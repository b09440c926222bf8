// gaugekit: gauge and perspective duality toolkit
// Licensed under the Apache License, Version 2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gaugekit/model.hpp"
#include "gaugekit/perspective.hpp"
#include "gaugekit/solvers.hpp"

namespace gaugekit {

namespace detail {

/// Product of nonnegative values where any infinite (or empty 0 * inf)
/// factor makes the result infinite, so downstream residuals refuse to
/// certify instead of silently treating inf as matched.
inline double safe_mul(double a, double b) {
  if (std::isinf(a) || std::isinf(b) || std::isnan(a) || std::isnan(b))
    return kInf;
  return a * b;
}

/// |x - y| with infinite inputs mapped to an infinite residual.
inline double resid_abs_diff(double x, double y) {
  if (!std::isfinite(x) || !std::isfinite(y)) return kInf;
  return std::abs(x - y);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Degenerate constraint level: when sigma = 0 the constraint set
// {r : rho(r) <= 0} is the cone where rho vanishes, and the pair
// (rho, 0) is replaced by (indicator of that cone, 1) before dualizing.
// ---------------------------------------------------------------------------

/// Indicator gauge of the cone {x : g(x) = 0}.
inline GaugeSpec zero_set_gauge(const GaugeSpec& g) {
  switch (g.kind) {
    case GaugeKind::L1:
    case GaugeKind::L2:
    case GaugeKind::LInf:
      return GaugeSpec::cone_indicator(ConeSpec::zero(g.dim));
    case GaugeKind::Cone:
      return g;
    case GaugeKind::Scaled:
      return zero_set_gauge(*g.base);
    case GaugeKind::Sum:
    case GaugeKind::Max: {
      std::vector<GaugeSpec> blocks;
      blocks.reserve(g.parts.size());
      for (const auto& part : g.parts) blocks.push_back(zero_set_gauge(part));
      return GaugeSpec::separable_sum(std::move(blocks));
    }
  }
  throw ParameterError("zero_set_gauge: unknown gauge kind");
}

// ---------------------------------------------------------------------------
// Gauge dual: for minimize kappa(x) s.t. rho(b - Ax) <= sigma the dual is
//   minimize kappa°(A^T y) s.t. <b, y> - sigma rho°(y) >= 1.
// ---------------------------------------------------------------------------

struct GaugeDualSpec {
  DenseMap a;
  Vec b;
  double sigma = 1.0;  ///< effective level; 1 after the sigma = 0 replacement
  bool homogenized = false;
  GaugeSpec kappa;        ///< primal objective
  GaugeSpec rho;          ///< effective primal constraint gauge
  GaugeSpec kappa_polar;  ///< dual objective, evaluated at A^T y
  GaugeSpec rho_polar;

  double objective_value(const Vec& y) const {
    return gauge_eval(kappa_polar, a.apply_adjoint(y));
  }

  /// <b, y> - sigma rho°(y); -inf when rho°(y) is infinite.
  double constraint_value(const Vec& y) const {
    const double rp = gauge_eval(rho_polar, y);
    if (!std::isfinite(rp)) return -kInf;
    return b.dot(y) - sigma * rp;
  }

  bool is_feasible(const Vec& y, double tol) const {
    return constraint_value(y) >= 1.0 - tol * (1.0 + std::abs(b.dot(y)));
  }
};

inline GaugeDualSpec build_gauge_dual(const ProblemSpec& p) {
  p.check_shapes();
  require_param(p.objective.is_gauge() && p.constraint.is_gauge(),
                "build_gauge_dual: both functions must be gauges; "
                "build_perspective_dual handles the general case");
  require_param(p.is_valid(), "build_gauge_dual: " + p.invalid_reason());

  GaugeDualSpec d;
  d.a = p.a;
  d.b = p.b;
  d.kappa = p.objective.gauge;
  if (p.sigma == 0.0) {
    d.rho = zero_set_gauge(p.constraint.gauge);
    d.sigma = 1.0;
    d.homogenized = true;
  } else {
    d.rho = p.constraint.gauge;
    d.sigma = p.sigma;
  }
  d.kappa_polar = polar_of(d.kappa);
  d.rho_polar = polar_of(d.rho);
  return d;
}

// ---------------------------------------------------------------------------
// Specialized dual constraint for exponential-family misfits. With data b,
// natural parameter theta_i at b_i, and cumulant Phi, dual feasibility of y
// is equivalent to
//   exists xi >= 0 :  Phi^pi(y + xi b, xi) <= xi (Phi(b) - sigma) - 1 .
// The y here follows the sign convention of that inequality; relative to the
// dual variable produced by the generic machinery it is negated.
// ---------------------------------------------------------------------------

struct BregmanDualConstraint {
  BregmanFamily family = BregmanFamily::Gaussian;
  Vec anchor;
  double sigma = 1.0;
  double constant = 0.0;  ///< Phi(anchor) - sigma

  /// Perspective of the cumulant sum at (y + xi * anchor, xi).
  double lhs(const Vec& y, double xi) const {
    if (xi < 0.0) return kInf;
    const Vec v = y + xi * anchor;
    if (xi == 0.0)
      return v.lpNorm<Eigen::Infinity>() == 0.0 ? 0.0 : kInf;
    double acc = 0.0;
    for (int i = 0; i < v.size(); ++i) {
      const double term = xi * bregman_phi(family, v[i] / xi);
      if (!std::isfinite(term)) return kInf;
      acc += term;
    }
    return acc;
  }

  double rhs(double xi) const { return xi * constant - 1.0; }

  double violation(const Vec& y, double xi) const {
    if (xi < 0.0) return kInf;
    const double l = lhs(y, xi);
    if (!std::isfinite(l)) return kInf;
    return l - rhs(xi);
  }

  bool feasible(const Vec& y, double xi, double tol) const {
    return violation(y, xi) <= tol;
  }

  /// Minimizes the violation over xi in [0, xi_max]. The violation is convex
  /// in xi with an infinite prefix at most, so a ternary search applies.
  std::pair<double, double> min_violation(const Vec& y, double xi_max,
                                          int iters = 200) const {
    require_param(xi_max > 0.0, "min_violation: xi_max must be positive");
    double lo = 0.0, hi = xi_max;
    for (int k = 0; k < iters; ++k) {
      const double m1 = lo + (hi - lo) / 3.0;
      const double m2 = hi - (hi - lo) / 3.0;
      const double v1 = violation(y, m1);
      if (!std::isfinite(v1)) {
        lo = m1;
        continue;
      }
      if (v1 < violation(y, m2))
        hi = m2;
      else
        lo = m1;
    }
    const double xi = 0.5 * (lo + hi);
    double best_xi = xi, best = violation(y, xi);
    for (const double cand : {0.0, xi_max}) {
      const double v = violation(y, cand);
      if (v < best) {
        best = v;
        best_xi = cand;
      }
    }
    return {best_xi, best};
  }
};

inline BregmanDualConstraint build_bregman_dual_constraint(
    BregmanFamily family, const Vec& anchor, double sigma) {
  require_param(sigma > 0.0,
                "bregman dual constraint: sigma must be positive");
  BregmanDualConstraint c;
  c.family = family;
  c.anchor = anchor;
  c.sigma = sigma;
  double phi_b = 0.0;
  for (int i = 0; i < anchor.size(); ++i) {
    bregman_theta(family, anchor[i]);  // validates the anchor entry
    phi_b += bregman_phi(family, anchor[i]);
  }
  c.constant = phi_b - sigma;
  return c;
}

// ---------------------------------------------------------------------------
// Perspective dual: for minimize f(x) s.t. g(b - Ax) <= sigma with f, g
// nonnegative convex, the dual over (y, alpha, mu) is
//   minimize f#(A^T y, alpha) s.t. <b, y> - sigma g#(y, mu) >= 1 - (alpha + mu)
// with # the perspective polar. When f is a gauge the objective collapses to
// f°(A^T y) and alpha can be pinned to 0.
// ---------------------------------------------------------------------------

struct PerspectiveDualSpec {
  DenseMap a;
  Vec b;
  double sigma = 1.0;  ///< effective level
  bool homogenized = false;
  bool gauge_objective = false;
  PerspectiveFn objective_fn;   ///< f
  PerspectiveFn constraint_fn;  ///< effective g
  /// Explicit second-order cone description of the feasible set, available
  /// when the constraint is piecewise linear-quadratic.
  std::optional<PerspectiveDualFeasibleSet> socp_set;
  /// Specialized constraint for exponential-family misfits.
  std::optional<BregmanDualConstraint> bregman_constraint;

  double objective_value(const Vec& y, double alpha,
                         double bisect_tol = 1e-10) const {
    return perspective_polar_eval(objective_fn, a.apply_adjoint(y), alpha,
                                  bisect_tol);
  }

  /// Objective with alpha pinned to 0; for gauge objectives this is the
  /// polar gauge of A^T y.
  double reduced_objective_value(const Vec& y,
                                 double bisect_tol = 1e-10) const {
    return objective_value(y, 0.0, bisect_tol);
  }

  /// <b,y> - sigma g#(y,mu) - (1 - alpha - mu); -inf when g# is infinite.
  double constraint_slack(const Vec& y, double alpha, double mu,
                          double bisect_tol = 1e-10) const {
    const double gs = perspective_polar_eval(constraint_fn, y, mu, bisect_tol);
    if (!std::isfinite(gs)) return -kInf;
    return b.dot(y) - sigma * gs - (1.0 - alpha - mu);
  }

  bool is_feasible(const Vec& y, double alpha, double mu,
                   const ToleranceConfig& tol = {}) const {
    const double slack =
        constraint_slack(y, alpha, mu, tol.bisect_tol);
    if (slack < -tol.feas_tol * (1.0 + std::abs(b.dot(y)))) return false;
    return std::isfinite(objective_value(y, alpha, tol.bisect_tol));
  }
};

inline PerspectiveDualSpec build_perspective_dual(const ProblemSpec& p) {
  p.check_shapes();
  require_param(p.is_valid(), "build_perspective_dual: " + p.invalid_reason());

  PerspectiveDualSpec d;
  d.a = p.a;
  d.b = p.b;
  d.objective_fn = p.objective.as_perspective();
  d.gauge_objective = p.objective.is_gauge();
  if (p.sigma == 0.0) {
    require_param(p.constraint.is_gauge(),
                  "build_perspective_dual: sigma = 0 requires a gauge "
                  "constraint, whose zero level set is a cone");
    d.constraint_fn =
        PerspectiveFn::gauge_wrap(zero_set_gauge(p.constraint.gauge));
    d.sigma = 1.0;
    d.homogenized = true;
  } else {
    d.constraint_fn = p.constraint.as_perspective();
    d.sigma = p.sigma;
  }

  std::optional<PlqSpec> plq;
  if (d.constraint_fn.kind == PerspectiveFn::Kind::HuberSum)
    plq = PlqSpec::huber_sum(d.constraint_fn.eta, d.constraint_fn.dim);
  else if (d.constraint_fn.kind == PerspectiveFn::Kind::Plq)
    plq = d.constraint_fn.plq;
  if (plq)
    d.socp_set = build_perspective_dual_feasible_set(d.b, d.sigma, *plq);

  if (d.constraint_fn.kind == PerspectiveFn::Kind::Bregman)
    d.bregman_constraint = build_bregman_dual_constraint(
        d.constraint_fn.family, d.constraint_fn.anchor, d.sigma);
  return d;
}

// ---------------------------------------------------------------------------
// Optimality certification. A primal-dual pair is optimal exactly when it is
// feasible on both sides and four scalar conditions hold: the constraint is
// active (or the dual witness lies in the lineality part), the dual
// constraint is active, and the two Cauchy-Schwarz-like alignments between
// primal and polar values are tight. Each condition is reported as a
// nonnegative residual.
// ---------------------------------------------------------------------------

struct OptimalityReport {
  double primal_activity = kInf;
  double dual_activity = kInf;
  double objective_alignment = kInf;
  double constraint_alignment = kInf;
  bool primal_feasible = false;
  bool dual_feasible = false;
  double nu_primal = kInf;    ///< objective value at x
  double nu_dual = kInf;      ///< dual objective value at the witness
  double duality_product = kInf;
  bool certified = false;

  double max_residual() const {
    return std::max({primal_activity, dual_activity, objective_alignment,
                     constraint_alignment});
  }
};

inline OptimalityReport check_gauge_optimality(const GaugeDualSpec& d,
                                               const Vec& x, const Vec& y,
                                               const ToleranceConfig& tol = {}) {
  tol.validate();
  require_dim(x.size() == d.a.cols() && y.size() == d.a.rows(),
              "check_gauge_optimality: dimensions");
  const Vec r = d.b - d.a.apply(x);
  const Vec aty = d.a.apply_adjoint(y);
  const double rho_r = gauge_eval(d.rho, r);
  const double rho_pol = gauge_eval(d.rho_polar, y);
  const double kap_x = gauge_eval(d.kappa, x);
  const double kap_pol = gauge_eval(d.kappa_polar, aty);
  const double by = d.b.dot(y);

  OptimalityReport rep;
  rep.primal_activity =
      std::min(detail::resid_abs_diff(rho_r, d.sigma), rho_pol);
  rep.dual_activity =
      detail::resid_abs_diff(by - detail::safe_mul(d.sigma, rho_pol), 1.0);
  rep.objective_alignment =
      detail::resid_abs_diff(x.dot(aty), detail::safe_mul(kap_x, kap_pol));
  rep.constraint_alignment =
      detail::resid_abs_diff(r.dot(y), detail::safe_mul(d.sigma, rho_pol));

  rep.primal_feasible = rho_r <= d.sigma + tol.feas_tol * (1.0 + d.sigma);
  const double slack = std::isfinite(rho_pol) ? by - d.sigma * rho_pol : -kInf;
  rep.dual_feasible = slack >= 1.0 - tol.feas_tol * (1.0 + std::abs(by));

  rep.nu_primal = kap_x;
  rep.nu_dual = kap_pol;
  rep.duality_product = detail::safe_mul(kap_x, kap_pol);
  const double scale =
      1.0 + (std::isfinite(rep.duality_product) ? rep.duality_product : 0.0);
  rep.certified = rep.primal_feasible && rep.dual_feasible &&
                  rep.max_residual() <= tol.opt_tol * scale;
  return rep;
}

inline OptimalityReport check_perspective_optimality(
    const PerspectiveDualSpec& d, const Vec& x, const Vec& y, double alpha,
    double mu, const ToleranceConfig& tol = {}) {
  tol.validate();
  require_dim(x.size() == d.a.cols() && y.size() == d.a.rows(),
              "check_perspective_optimality: dimensions");
  const Vec r = d.b - d.a.apply(x);
  const Vec aty = d.a.apply_adjoint(y);
  const double g_r = fn_eval(d.constraint_fn, r);
  const double g_sharp =
      perspective_polar_eval(d.constraint_fn, y, mu, tol.bisect_tol);
  const double f_x = fn_eval(d.objective_fn, x);
  const double f_sharp =
      perspective_polar_eval(d.objective_fn, aty, alpha, tol.bisect_tol);
  const double by = d.b.dot(y);

  OptimalityReport rep;
  rep.primal_activity =
      std::min(detail::resid_abs_diff(g_r, d.sigma), g_sharp);
  rep.dual_activity = detail::resid_abs_diff(
      by - detail::safe_mul(d.sigma, g_sharp), 1.0 - alpha - mu);
  rep.objective_alignment = detail::resid_abs_diff(
      x.dot(aty) + alpha, detail::safe_mul(f_x, f_sharp));
  rep.constraint_alignment = detail::resid_abs_diff(
      r.dot(y) + mu, detail::safe_mul(g_r, g_sharp));

  rep.primal_feasible = g_r <= d.sigma + tol.feas_tol * (1.0 + d.sigma);
  const double slack =
      std::isfinite(g_sharp) ? by - d.sigma * g_sharp - (1.0 - alpha - mu)
                             : -kInf;
  rep.dual_feasible = std::isfinite(f_sharp) &&
                      slack >= -tol.feas_tol * (1.0 + std::abs(by));

  rep.nu_primal = f_x;
  rep.nu_dual = f_sharp;
  rep.duality_product = detail::safe_mul(f_x, f_sharp);
  const double scale =
      1.0 + (std::isfinite(rep.duality_product) ? rep.duality_product : 0.0);
  rep.certified = rep.primal_feasible && rep.dual_feasible &&
                  rep.max_residual() <= tol.opt_tol * scale;
  return rep;
}

// ---------------------------------------------------------------------------
// Gap bookkeeping. Optimal values multiply to 1 under strong duality; the
// degenerate combinations encode infeasibility of the opposite side.
// ---------------------------------------------------------------------------

inline double duality_gap_product(double nu_primal, double nu_dual) {
  require_param(std::isfinite(nu_primal) && std::isfinite(nu_dual) &&
                    nu_primal > 0.0 && nu_dual > 0.0,
                "duality_gap_product: both values must be finite and "
                "positive; use classify_duality_gap for degenerate pairs");
  return nu_primal * nu_dual;
}

enum class ValueStatus { Zero, Finite, Infinite };

inline ValueStatus classify_value(double v) {
  require_param(v >= 0.0 && !std::isnan(v),
                "optimal values must be nonnegative");
  if (v == 0.0) return ValueStatus::Zero;
  if (std::isinf(v)) return ValueStatus::Infinite;
  return ValueStatus::Finite;
}

struct GapReport {
  ValueStatus primal_status = ValueStatus::Finite;
  ValueStatus dual_status = ValueStatus::Finite;
  double product = kInf;  ///< meaningful only when both values are finite
  std::string note;
};

inline GapReport classify_duality_gap(double nu_primal, double nu_dual) {
  GapReport g;
  g.primal_status = classify_value(nu_primal);
  g.dual_status = classify_value(nu_dual);
  if (g.primal_status == ValueStatus::Finite &&
      g.dual_status == ValueStatus::Finite) {
    g.product = nu_primal * nu_dual;
    g.note = g.product >= 1.0
                 ? "weak duality holds; product 1 certifies optimality"
                 : "product below 1 violates weak duality; check inputs";
    return g;
  }
  if (g.primal_status == ValueStatus::Infinite ||
      g.dual_status == ValueStatus::Zero) {
    g.note = "primal infeasible";
    return g;
  }
  g.note = "dual infeasible";
  return g;
}

// ---------------------------------------------------------------------------
// Sensitivity: value v_p(t u) of the primal whose constraint is perturbed in
// proportion to the objective level, i.e. inf over (mu, x) of mu subject to
// rho(b - Ax + mu t u) <= sigma and kappa(x) <= mu. Substituting x = w / lambda
// with ||w||_1 <= 1 and lambda = 1/mu gives 1 / lambda* where lambda* is the
// largest lambda with
//   phi(lambda) = min_{||w||_1 <= 1} ||lambda b + t u - A w|| - sigma lambda
// nonpositive. phi is convex, so the feasible lambdas form an interval; the
// upper endpoint is found by scanning for a feasible point, then bracketing
// and bisecting, with the inner minimization solved to high accuracy. The
// point of this value is its derivative: the gradient of -1/v_p at u = 0 is
// the optimal dual witness y*.
// ---------------------------------------------------------------------------

inline double perturbed_primal_value(const ProblemSpec& p, const Vec& u,
                                     double t,
                                     const ToleranceConfig& tol = {}) {
  p.check_shapes();
  require_dim(u.size() == p.b.size(), "perturbed_primal_value: u size");
  require_param(p.objective.is_gauge() && p.constraint.is_gauge() &&
                    p.objective.gauge.kind == GaugeKind::L1 &&
                    p.constraint.gauge.kind == GaugeKind::L2,
                "perturbed_primal_value: implemented for a one-norm objective "
                "with a two-norm constraint");
  require_param(p.is_valid(), "perturbed_primal_value: " + p.invalid_reason());
  const Vec offset = t * u;
  const Mat& a = p.a.matrix();

  const auto phi = [&](double lambda) -> double {
    const Vec target = lambda * p.b + offset;
    const Vec w =
        l1_ball_least_squares(a, target, 1.0, tol.max_inner_iters, 1e-13);
    return (target - a * w).norm() - p.sigma * lambda;
  };

  // The interval need not contain lambda = 0, so scan for a feasible point.
  double feasible = -1.0;
  double probe = 1.0;
  for (int k = 0; k < 60 && feasible < 0.0; ++k, probe *= 2.0)
    if (phi(probe) <= 0.0) feasible = probe;
  probe = 0.5;
  for (int k = 0; k < 60 && feasible < 0.0; ++k, probe *= 0.5)
    if (phi(probe) <= 0.0) feasible = probe;
  if (feasible < 0.0) return kInf;

  double lo = feasible, hi = 2.0 * feasible;
  int doublings = 0;
  while (phi(hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    require_param(++doublings < 200,
                  "perturbed_primal_value: the bracket did not close");
  }
  while (hi - lo > tol.bisect_tol * (1.0 + hi)) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) <= 0.0 ? lo : hi) = mid;
  }
  return 1.0 / lo;
}

/// Witness-based strict feasibility check: fits x by least squares and
/// requires visible slack in the constraint. A false answer is not a proof
/// of marginality for constraint gauges far from Euclidean.
inline bool has_strictly_feasible_point(const ProblemSpec& p,
                                        const ToleranceConfig& tol = {}) {
  p.check_shapes();
  const Vec x = p.a.matrix().colPivHouseholderQr().solve(p.b);
  const double level = p.constraint.value(p.b - p.a.apply(x));
  return level <= p.sigma - 10.0 * tol.feas_tol;
}

}  // namespace gaugekit
