// gaugekit: gauge and perspective duality toolkit
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cmath>
#include <vector>

#include "gaugekit/errors.hpp"
#include "gaugekit/gauges.hpp"
#include "gaugekit/plq.hpp"

namespace gaugekit {

// ---------------------------------------------------------------------------
// Scalar pieces of the exponential-family divergences. phi is the cumulant
// dual (negative entropy), phi* the cumulant, theta = phi'(b) the natural
// parameter matching mean b.
// ---------------------------------------------------------------------------

enum class BregmanFamily { Gaussian, Poisson, Bernoulli };

inline double softplus(double u) {
  return std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u)));
}

inline double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

inline double bregman_phi(BregmanFamily fam, double t) {
  switch (fam) {
    case BregmanFamily::Gaussian:
      return 0.5 * t * t;
    case BregmanFamily::Poisson:
      if (t < 0.0) return kInf;
      return t == 0.0 ? 0.0 : t * std::log(t) - t;
    case BregmanFamily::Bernoulli: {
      if (t < 0.0 || t > 1.0) return kInf;
      const double a = t == 0.0 ? 0.0 : t * std::log(t);
      const double c = t == 1.0 ? 0.0 : (1.0 - t) * std::log(1.0 - t);
      return a + c;
    }
  }
  return kInf;
}

inline double bregman_phi_conjugate(BregmanFamily fam, double s) {
  switch (fam) {
    case BregmanFamily::Gaussian:
      return 0.5 * s * s;
    case BregmanFamily::Poisson:
      return std::exp(s);
    case BregmanFamily::Bernoulli:
      return softplus(s);
  }
  return kInf;
}

/// Natural parameter theta with mean b; requires b interior to the mean range.
inline double bregman_theta(BregmanFamily fam, double b) {
  switch (fam) {
    case BregmanFamily::Gaussian:
      return b;
    case BregmanFamily::Poisson:
      require_param(b > 0.0, "poisson divergence needs a positive anchor");
      return std::log(b);
    case BregmanFamily::Bernoulli:
      require_param(b > 0.0 && b < 1.0,
                    "bernoulli divergence needs an anchor in (0,1)");
      return std::log(b / (1.0 - b));
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// PerspectiveFn: a closed convex nonnegative function given structurally, so
// that its perspective, recession function, conjugate, and the polar of its
// perspective are all computable. Composite kinds recurse over blocks.
// ---------------------------------------------------------------------------

struct PerspectiveFn {
  enum class Kind { HuberSum, Plq, GaugeWrap, Quadratic, SeparableSum, Bregman };

  Kind kind = Kind::Quadratic;
  int dim = 0;
  double eta = 1.0;                   // HuberSum
  PlqSpec plq;                        // Plq
  GaugeSpec gauge;                    // GaugeWrap
  std::vector<PerspectiveFn> parts;   // SeparableSum
  BregmanFamily family = BregmanFamily::Gaussian;  // Bregman
  Vec anchor;                         // Bregman

  static PerspectiveFn huber_sum(double eta, int m) {
    require_param(eta > 0.0 && m >= 1, "huber_sum: need eta > 0 and m >= 1");
    PerspectiveFn f;
    f.kind = Kind::HuberSum;
    f.dim = m;
    f.eta = eta;
    return f;
  }

  static PerspectiveFn plq_fn(PlqSpec p) {
    p.validate();
    PerspectiveFn f;
    f.kind = Kind::Plq;
    f.dim = p.arg_dim();
    f.plq = std::move(p);
    return f;
  }

  static PerspectiveFn gauge_wrap(GaugeSpec g) {
    PerspectiveFn f;
    f.kind = Kind::GaugeWrap;
    f.dim = g.dim;
    f.gauge = std::move(g);
    return f;
  }

  static PerspectiveFn quadratic(int m) {
    require_param(m >= 1, "quadratic: need m >= 1");
    PerspectiveFn f;
    f.kind = Kind::Quadratic;
    f.dim = m;
    return f;
  }

  static PerspectiveFn separable_sum(std::vector<PerspectiveFn> blocks) {
    require_param(!blocks.empty(), "separable_sum: needs at least one block");
    PerspectiveFn f;
    f.kind = Kind::SeparableSum;
    f.dim = 0;
    for (const auto& b : blocks) f.dim += b.dim;
    f.parts = std::move(blocks);
    return f;
  }

  static PerspectiveFn bregman(BregmanFamily fam, Vec anchor) {
    require_param(anchor.size() >= 1, "bregman: anchor must be nonempty");
    for (int i = 0; i < anchor.size(); ++i) bregman_theta(fam, anchor[i]);
    PerspectiveFn f;
    f.kind = Kind::Bregman;
    f.dim = static_cast<int>(anchor.size());
    f.family = fam;
    f.anchor = std::move(anchor);
    return f;
  }
};

namespace detail {

// Data-misfit divergence in residual form,
//   r -> phi*(b - r) - phi*(theta) - <b, (b - r) - theta>,  theta = phi'(b),
// so that evaluating it at b - Ax measures the divergence of the linear
// model Ax from the anchor's natural parameter. Nonnegative, convex, full
// domain in r; its minimum 0 sits at r = b - theta (not at the origin).
inline double bregman_value_scalar(BregmanFamily fam, double b, double r) {
  const double s = b - r;
  switch (fam) {
    case BregmanFamily::Gaussian:
      return 0.5 * r * r;
    case BregmanFamily::Poisson:
      return std::exp(s) - b - b * (s - std::log(b));
    case BregmanFamily::Bernoulli: {
      const double theta = std::log(b / (1.0 - b));
      return softplus(s) - softplus(theta) - b * (s - theta);
    }
  }
  return kInf;
}

inline double bregman_derivative_scalar(BregmanFamily fam, double b, double r) {
  const double s = b - r;
  switch (fam) {
    case BregmanFamily::Gaussian:
      return r;
    case BregmanFamily::Poisson:
      return b - std::exp(s);
    case BregmanFamily::Bernoulli:
      return b - sigmoid(s);
  }
  return 0.0;
}

// Conjugate <b,y> + phi*(theta) - b theta + phi(b - y); its domain is the
// anchor-shifted domain of phi.
inline double bregman_conjugate_scalar(BregmanFamily fam, double b, double y) {
  const double dtol = kMembershipTol * (1.0 + std::abs(b));
  switch (fam) {
    case BregmanFamily::Gaussian:
      return 0.5 * y * y;
    case BregmanFamily::Poisson: {
      if (y > b + dtol) return kInf;
      const double t = std::max(b - y, 0.0);
      const double ent = t == 0.0 ? 0.0 : t * std::log(t) - t;
      return b * y + b - b * std::log(b) + ent;
    }
    case BregmanFamily::Bernoulli: {
      if (y > b + dtol || y < b - 1.0 - dtol) return kInf;
      const double t = std::clamp(b - y, 0.0, 1.0);
      const double theta = std::log(b / (1.0 - b));
      return b * y + softplus(theta) - b * theta + bregman_phi(fam, t);
    }
  }
  return kInf;
}

}  // namespace detail

inline double fn_eval(const PerspectiveFn& f, const Vec& x) {
  require_dim(x.size() == f.dim, "fn_eval: dimension mismatch");
  switch (f.kind) {
    case PerspectiveFn::Kind::HuberSum: {
      double acc = 0.0;
      for (int i = 0; i < x.size(); ++i) acc += huber_value(f.eta, x[i]);
      return acc;
    }
    case PerspectiveFn::Kind::Plq:
      return plq_eval(f.plq, x);
    case PerspectiveFn::Kind::GaugeWrap:
      return gauge_eval(f.gauge, x);
    case PerspectiveFn::Kind::Quadratic:
      return 0.5 * x.squaredNorm();
    case PerspectiveFn::Kind::SeparableSum: {
      double acc = 0.0;
      int off = 0;
      for (const auto& p : f.parts) {
        acc += fn_eval(p, x.segment(off, p.dim));
        off += p.dim;
      }
      return acc;
    }
    case PerspectiveFn::Kind::Bregman: {
      double acc = 0.0;
      for (int i = 0; i < x.size(); ++i)
        acc += detail::bregman_value_scalar(f.family, f.anchor[i], x[i]);
      return acc;
    }
  }
  return kInf;
}

/// Recession function: the horizon behaviour lim f(x0 + t d)/t.
inline double recession_eval(const PerspectiveFn& f, const Vec& d) {
  require_dim(d.size() == f.dim, "recession_eval: dimension mismatch");
  const double ztol = kMembershipTol * (1.0 + d.lpNorm<Eigen::Infinity>());
  switch (f.kind) {
    case PerspectiveFn::Kind::HuberSum:
      return f.eta * d.lpNorm<1>();
    case PerspectiveFn::Kind::Plq:
      return plq_recession(f.plq, d);
    case PerspectiveFn::Kind::GaugeWrap:
      return gauge_eval(f.gauge, d);
    case PerspectiveFn::Kind::Quadratic:
      return d.lpNorm<Eigen::Infinity>() <= ztol ? 0.0 : kInf;
    case PerspectiveFn::Kind::SeparableSum: {
      double acc = 0.0;
      int off = 0;
      for (const auto& p : f.parts) {
        acc += recession_eval(p, d.segment(off, p.dim));
        off += p.dim;
      }
      return acc;
    }
    case PerspectiveFn::Kind::Bregman:
      switch (f.family) {
        case BregmanFamily::Gaussian:
          return d.lpNorm<Eigen::Infinity>() <= ztol ? 0.0 : kInf;
        case BregmanFamily::Poisson:
          return d.minCoeff() < -ztol ? kInf : f.anchor.dot(d);
        case BregmanFamily::Bernoulli:
          return f.anchor.dot(d) + (-d.array()).max(0.0).sum();
      }
  }
  return kInf;
}

/// Three-case perspective: lambda f(x/lambda) for lambda > 0, the recession
/// function at lambda = 0, +inf for lambda < 0.
inline double perspective_eval(const PerspectiveFn& f, const Vec& x,
                               double lambda) {
  if (lambda < 0.0) return kInf;
  if (lambda == 0.0) return recession_eval(f, x);
  const double inner = fn_eval(f, x / lambda);
  return inner == kInf ? kInf : lambda * inner;
}

inline bool has_closed_conjugate(const PerspectiveFn& f) {
  if (f.kind == PerspectiveFn::Kind::SeparableSum) {
    for (const auto& p : f.parts)
      if (!has_closed_conjugate(p)) return false;
  }
  return true;
}

inline double conjugate_eval(const PerspectiveFn& f, const Vec& z) {
  require_dim(z.size() == f.dim, "conjugate_eval: dimension mismatch");
  switch (f.kind) {
    case PerspectiveFn::Kind::HuberSum: {
      double acc = 0.0;
      for (int i = 0; i < z.size(); ++i) {
        const double v = huber_conjugate(f.eta, z[i]);
        if (v == kInf) return kInf;
        acc += v;
      }
      return acc;
    }
    case PerspectiveFn::Kind::Plq:
      return plq_conjugate(f.plq, z);
    case PerspectiveFn::Kind::GaugeWrap: {
      // Conjugate of a gauge: indicator of the polar unit ball.
      const double tol = kMembershipTol * (1.0 + z.lpNorm<Eigen::Infinity>());
      return polar_eval(f.gauge, z) <= 1.0 + tol ? 0.0 : kInf;
    }
    case PerspectiveFn::Kind::Quadratic:
      return 0.5 * z.squaredNorm();
    case PerspectiveFn::Kind::SeparableSum: {
      double acc = 0.0;
      int off = 0;
      for (const auto& p : f.parts) {
        const double v = conjugate_eval(p, z.segment(off, p.dim));
        if (v == kInf) return kInf;
        acc += v;
        off += p.dim;
      }
      return acc;
    }
    case PerspectiveFn::Kind::Bregman: {
      double acc = 0.0;
      for (int i = 0; i < z.size(); ++i) {
        const double v =
            detail::bregman_conjugate_scalar(f.family, f.anchor[i], z[i]);
        if (v == kInf) return kInf;
        acc += v;
      }
      return acc;
    }
  }
  return kInf;
}

namespace detail {

// Support function of the domain of a gauge: zero-indicator on norm blocks,
// polar-cone indicator on cone blocks, summed across composite blocks.
inline double gauge_domain_support(const GaugeSpec& g, const Vec& z) {
  const double ztol = kMembershipTol * (1.0 + z.lpNorm<Eigen::Infinity>());
  switch (g.kind) {
    case GaugeKind::L1:
    case GaugeKind::L2:
    case GaugeKind::LInf:
      return z.lpNorm<Eigen::Infinity>() <= ztol ? 0.0 : kInf;
    case GaugeKind::Scaled:
      return gauge_domain_support(*g.base, z);
    case GaugeKind::Cone:
      return in_cone(polar_cone(g.cone), z) ? 0.0 : kInf;
    case GaugeKind::Sum:
    case GaugeKind::Max: {
      double acc = 0.0;
      int off = 0;
      for (const auto& p : g.parts) {
        const double v = gauge_domain_support(p, z.segment(off, p.dim));
        if (v == kInf) return kInf;
        acc += v;
        off += p.dim;
      }
      return acc;
    }
  }
  return kInf;
}

}  // namespace detail

/// Recession function of the conjugate, equal to the support function of
/// dom f; the indicator of {0} whenever f is finite everywhere.
inline double conjugate_recession_eval(const PerspectiveFn& f, const Vec& z) {
  require_dim(z.size() == f.dim, "conjugate_recession_eval: dimension mismatch");
  const double ztol = kMembershipTol * (1.0 + z.lpNorm<Eigen::Infinity>());
  switch (f.kind) {
    case PerspectiveFn::Kind::HuberSum:
    case PerspectiveFn::Kind::Quadratic:
    case PerspectiveFn::Kind::Bregman:
      return z.lpNorm<Eigen::Infinity>() <= ztol ? 0.0 : kInf;
    case PerspectiveFn::Kind::Plq:
      if (!plq_full_domain(f.plq))
        throw CapabilityError(
            "conjugate_recession_eval: cannot certify the penalty domain");
      return z.lpNorm<Eigen::Infinity>() <= ztol ? 0.0 : kInf;
    case PerspectiveFn::Kind::GaugeWrap:
      return detail::gauge_domain_support(f.gauge, z);
    case PerspectiveFn::Kind::SeparableSum: {
      double acc = 0.0;
      int off = 0;
      for (const auto& p : f.parts) {
        const double v = conjugate_recession_eval(p, z.segment(off, p.dim));
        if (v == kInf) return kInf;
        acc += v;
        off += p.dim;
      }
      return acc;
    }
  }
  return kInf;
}

/// Perspective of the conjugate: mu f*(z/mu) for mu > 0, the conjugate's
/// recession at mu = 0, +inf below.
inline double conjugate_perspective_eval(const PerspectiveFn& f, const Vec& z,
                                         double mu) {
  if (mu < 0.0) return kInf;
  if (mu == 0.0) return conjugate_recession_eval(f, z);
  const double inner = conjugate_eval(f, z / mu);
  return inner == kInf ? kInf : mu * inner;
}

namespace detail {

// Polar of the perspective through its level-set characterization:
//   value = inf{ mu >= 0 : (f*)^pi(z, mu) <= -xi },
// the map mu -> (f*)^pi(z, mu) being nonincreasing because f >= 0. Grows the
// bracket geometrically, then bisects.
inline double perspective_polar_numeric(const PerspectiveFn& f, const Vec& z,
                                        double xi, double tol) {
  const auto feasible = [&](double mu) {
    return conjugate_perspective_eval(f, z, mu) <= -xi;
  };
  if (feasible(0.0)) return 0.0;
  double hi = 1.0;
  int doublings = 0;
  while (!feasible(hi)) {
    hi *= 2.0;
    if (++doublings > 60) return kInf;
  }
  double lo = hi > 1.0 ? hi / 2.0 : 0.0;
  while (hi - lo > tol * (1.0 + hi)) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace detail

/// Polar of the perspective function, i.e. the gauge dual object whose unit
/// ball is the polar of epi f^pi. Closed forms where available, otherwise
/// the monotone level-set bisection.
inline double perspective_polar_eval(const PerspectiveFn& f, const Vec& z,
                                     double xi, double bisect_tol = 1e-10) {
  require_dim(z.size() == f.dim, "perspective_polar_eval: dimension mismatch");
  const double ztol = kMembershipTol * (1.0 + z.lpNorm<Eigen::Infinity>());
  switch (f.kind) {
    case PerspectiveFn::Kind::GaugeWrap:
      if (xi > 0.0) return kInf;
      return polar_eval(f.gauge, z);
    case PerspectiveFn::Kind::HuberSum: {
      if (xi > 0.0) return kInf;
      const double gauge = z.lpNorm<Eigen::Infinity>() / f.eta;
      double quad;
      if (xi == 0.0)
        quad = z.lpNorm<Eigen::Infinity>() <= ztol ? 0.0 : kInf;
      else
        quad = -f.eta * z.squaredNorm() / (2.0 * xi);
      return std::max(gauge, quad);
    }
    case PerspectiveFn::Kind::Plq:
      return plq_perspective_polar(f.plq, z, xi);
    case PerspectiveFn::Kind::Quadratic: {
      if (xi > 0.0) return kInf;
      if (xi == 0.0) return z.lpNorm<Eigen::Infinity>() <= ztol ? 0.0 : kInf;
      return -z.squaredNorm() / (2.0 * xi);
    }
    case PerspectiveFn::Kind::SeparableSum:
    case PerspectiveFn::Kind::Bregman:
      return detail::perspective_polar_numeric(f, z, xi, bisect_tol);
  }
  return kInf;
}

/// Level-set test for the perspective polar without forming its value:
/// f_polar(z, xi) <= mu iff mu >= 0 and (f*)^pi(z, mu) <= -xi.
inline bool level_set_membership(const PerspectiveFn& f, const Vec& z,
                                 double xi, double mu, double feas_tol = 1e-8) {
  if (mu < 0.0) return false;
  return conjugate_perspective_eval(f, z, mu) <= -xi + feas_tol;
}

/// A subgradient of f itself (not its perspective); maximizer selections
/// match the gauge module's minimum-norm conventions.
inline Vec fn_subgradient(const PerspectiveFn& f, const Vec& x) {
  require_dim(x.size() == f.dim, "fn_subgradient: dimension mismatch");
  switch (f.kind) {
    case PerspectiveFn::Kind::HuberSum: {
      Vec z(x.size());
      for (int i = 0; i < x.size(); ++i) z[i] = huber_gradient(f.eta, x[i]);
      return z;
    }
    case PerspectiveFn::Kind::Plq:
      return plq_gradient(f.plq, x);
    case PerspectiveFn::Kind::GaugeWrap:
      return gauge_subgradient(f.gauge, x);
    case PerspectiveFn::Kind::Quadratic:
      return x;
    case PerspectiveFn::Kind::SeparableSum: {
      Vec z(x.size());
      int off = 0;
      for (const auto& p : f.parts) {
        z.segment(off, p.dim) = fn_subgradient(p, x.segment(off, p.dim));
        off += p.dim;
      }
      return z;
    }
    case PerspectiveFn::Kind::Bregman: {
      Vec z(x.size());
      for (int i = 0; i < x.size(); ++i)
        z[i] = detail::bregman_derivative_scalar(f.family, f.anchor[i], x[i]);
      return z;
    }
  }
  return Vec::Zero(f.dim);
}

struct PerspectiveSubgradient {
  Vec z;
  double gamma = 0.0;
};

/// Element of the subdifferential of the perspective at (x, mu). For mu > 0
/// this is (z, -f*(z)) with z a subgradient of f at x/mu; at mu = 0 it pairs
/// a recession subgradient with the extreme admissible slope -f*(z). The
/// support identity <z, x> + mu gamma = f^pi(x, mu) holds in both branches.
inline PerspectiveSubgradient perspective_subdifferential(
    const PerspectiveFn& f, const Vec& x, double mu) {
  require_dim(x.size() == f.dim,
              "perspective_subdifferential: dimension mismatch");
  if (mu < 0.0)
    throw ParameterError(
        "perspective_subdifferential: (x, mu) lies outside the domain");
  if (mu > 0.0) {
    const Vec w = x / mu;
    if (fn_eval(f, w) == kInf)
      throw ParameterError(
          "perspective_subdifferential: (x, mu) lies outside the domain");
    Vec z = fn_subgradient(f, w);
    const double gamma = -conjugate_eval(f, z);
    return {std::move(z), gamma};
  }
  switch (f.kind) {
    case PerspectiveFn::Kind::HuberSum: {
      Vec z(x.size());
      for (int i = 0; i < x.size(); ++i)
        z[i] = x[i] > 0 ? f.eta : (x[i] < 0 ? -f.eta : 0.0);
      const double gamma = -conjugate_eval(f, z);
      return {std::move(z), gamma};
    }
    case PerspectiveFn::Kind::GaugeWrap: {
      if (gauge_eval(f.gauge, x) == kInf)
        throw ParameterError(
            "perspective_subdifferential: (x, 0) lies outside the domain");
      Vec z = gauge_subgradient(f.gauge, x);
      const double gamma = -conjugate_eval(f, z);
      return {std::move(z), gamma};
    }
    default:
      throw CapabilityError(
          "perspective_subdifferential: the mu = 0 boundary is only exposed "
          "for kinds with closed-form recession subgradients");
  }
}

}  // namespace gaugekit
