// gaugekit: gauge and perspective duality toolkit
// Licensed under the Apache License, Version 2.0

#pragma once

#include <functional>
#include <memory>
#include <utility>

#include "gaugekit/duality.hpp"
#include "gaugekit/solvers.hpp"

namespace gaugekit {

// ---------------------------------------------------------------------------
// End-to-end solve drivers. Both sides of a problem reduce to the two-prox
// iteration: the primal splits the objective gauge from the constraint level
// set, the dual splits the polar objective from the dual feasible set.
// ---------------------------------------------------------------------------

/// Euclidean projector onto {w : constraint(b - w) <= sigma}.
inline std::function<Vec(const Vec&)> primal_level_set_projector(
    const ProblemSpec& p) {
  if (p.constraint.is_gauge()) {
    if (p.constraint.gauge.kind == GaugeKind::L2) {
      const Vec b = p.b;
      const double sigma = p.sigma;
      return [b, sigma](const Vec& w) {
        return project_ball_around(b, sigma, w);
      };
    }
    throw CapabilityError(
        "primal solve: no level-set projector for this constraint gauge "
        "(two-norm only)");
  }
  if (p.constraint.fn.kind == PerspectiveFn::Kind::HuberSum) {
    const Vec b = p.b;
    const double sigma = p.sigma;
    const double eta = p.constraint.fn.eta;
    return [b, sigma, eta](const Vec& w) {
      return project_huber_level_set(b, sigma, eta, w);
    };
  }
  throw CapabilityError("primal solve: unsupported constraint kind");
}

struct PrimalSolveResult {
  CpResult cp;
  Vec x;
  Vec multiplier;  ///< the method's m-dimensional companion sequence
  double nu = 0.0;
};

inline PrimalSolveResult solve_primal_cp(const ProblemSpec& p,
                                         const CpConfig& cfg,
                                         const IterCallback& cb = {}) {
  p.check_shapes();
  require_param(p.objective.is_gauge(),
                "primal CP solve: gauge objective required");
  const GaugeSpec kappa = p.objective.gauge;
  const GaugeSpec kappa_polar = polar_of(kappa);
  const auto project_level = primal_level_set_projector(p);
  const LinOp k = LinOp::from_matrix(p.a);

  const ProxOp prox_f_star = [&project_level](const Vec& v, double alpha) {
    return prox_via_moreau(project_level, alpha, v);
  };
  const ProxOp prox_g = [&kappa_polar](const Vec& v, double alpha) {
    return Vec(v - project_unit_ball(kappa_polar, v, alpha));
  };

  PrimalSolveResult r;
  r.cp = cp_solve(k, prox_f_star, prox_g, Vec::Zero(p.a.cols()),
                  Vec::Zero(p.a.rows()), cfg, cb);
  r.x = r.cp.x;
  r.multiplier = r.cp.y;
  r.nu = gauge_eval(kappa, r.x);
  return r;
}

struct DualSolveResult {
  CpResult cp;
  Vec y;           ///< dual witness
  double mu = 0.0;  ///< second-order-cone form components; 0 otherwise
  double xi = 0.0;
  Vec multiplier;  ///< n-vector block; multiplier / nu recovers the primal
  double nu = 0.0;
  bool socp_form = false;
};

/// Solves the dual with the same two-prox iteration. Gauge constraints use
/// the two-norm dual set (or the homogenized halfspace <b,y> >= 1);
/// Huber/PLQ constraints use the second-order-cone form over (y, mu, xi).
inline DualSolveResult solve_dual_cp(const ProblemSpec& p, const CpConfig& cfg,
                                     const IterCallback& cb = {}) {
  p.check_shapes();
  require_param(p.objective.is_gauge(),
                "dual CP solve: gauge objective required");
  require_param(p.is_valid(), "dual CP solve: " + p.invalid_reason());
  const GaugeSpec kappa = p.objective.gauge;
  const int m = static_cast<int>(p.a.rows());
  const int n = static_cast<int>(p.a.cols());

  const ProxOp prox_f_star = [&kappa](const Vec& z, double) {
    return project_unit_ball(kappa, z, 1.0);
  };

  DualSolveResult r;
  if (!p.constraint.is_gauge()) {
    PlqSpec plq;
    if (p.constraint.fn.kind == PerspectiveFn::Kind::HuberSum)
      plq = PlqSpec::huber_sum(p.constraint.fn.eta, m);
    else if (p.constraint.fn.kind == PerspectiveFn::Kind::Plq)
      plq = p.constraint.fn.plq;
    else
      throw CapabilityError(
          "dual CP solve: only Huber and PLQ constraints have the cone form");
    require_param(p.sigma > 0.0, "dual CP solve: cone form needs sigma > 0");
    const auto set = build_perspective_dual_feasible_set(p.b, p.sigma, plq);
    auto projector = std::make_shared<SocpSetProjector>(set);

    LinOp k;
    k.rows = n;
    k.cols = m + 2;
    k.forward = [&p, m](const Vec& v) {
      return p.a.apply_adjoint(v.head(m));
    };
    k.adjoint = [&p, m](const Vec& z) {
      Vec out = Vec::Zero(m + 2);
      out.head(m) = p.a.apply(z);
      return out;
    };
    k.norm = p.a.operator_norm();

    const ProxOp prox_g = [projector](const Vec& v, double) {
      return projector->project(v);
    };
    r.cp = cp_solve(k, prox_f_star, prox_g, Vec::Zero(m + 2), Vec::Zero(n),
                    cfg, cb);
    r.y = r.cp.x.head(m);
    r.mu = r.cp.x[m];
    r.xi = r.cp.x[m + 1];
    r.socp_form = true;
  } else {
    const GaugeDualSpec d = build_gauge_dual(p);
    ProxOp prox_g;
    if (d.homogenized) {
      require_param(d.rho_polar.kind == GaugeKind::Cone &&
                        d.rho_polar.cone.kind == ConeKind::Full,
                    "dual CP solve: sigma = 0 is supported when the "
                    "constraint polar has full domain");
      const Vec b = d.b;
      prox_g = [b](const Vec& y, double) {
        const double s = b.dot(y);
        if (s >= 1.0) return y;
        return Vec(y + ((1.0 - s) / b.squaredNorm()) * b);
      };
    } else if (d.rho.kind == GaugeKind::L2) {
      const Vec b = d.b;
      const double sigma = d.sigma;
      prox_g = [b, sigma](const Vec& y, double) {
        return project_gauge_dual_l2_set(b, sigma, y);
      };
    } else {
      throw CapabilityError(
          "dual CP solve: no feasible-set projector for this constraint "
          "gauge (two-norm or homogenized only)");
    }
    const LinOp k = LinOp::from_adjoint_of(p.a);
    r.cp = cp_solve(k, prox_f_star, prox_g, Vec::Zero(m), Vec::Zero(n), cfg,
                    cb);
    r.y = r.cp.x;
  }
  r.multiplier = r.cp.y;
  r.nu = polar_eval(kappa, p.a.apply_adjoint(r.y));
  return r;
}

}  // namespace gaugekit
