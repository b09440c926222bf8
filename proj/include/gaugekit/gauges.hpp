// gaugekit: gauge and perspective duality toolkit
// Licensed under the Apache License, Version 2.0

#pragma once

#include <algorithm>
#include <limits>
#include <memory>
#include <numeric>
#include <vector>

#include "gaugekit/dense_map.hpp"
#include "gaugekit/errors.hpp"
#include "gaugekit/nnls.hpp"

namespace gaugekit {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Relative tolerance used for set-membership decisions inside indicator
/// evaluations (cone membership, polar unit balls). Kept separate from
/// ToleranceConfig because these are definitional, not algorithmic, knobs.
inline constexpr double kMembershipTol = 1e-10;

enum class ConeKind { Zero, Full, Orthant, Polyhedral, Generated, Soc };

/// Closed convex cone description.
///
/// Polyhedral cones are stored in inequality form K = {x : Wx <= 0} and
/// finitely generated cones in generator form K = {V lambda : lambda >= 0};
/// the two representations are exchanged by polarity. The second-order cone
/// treats the last coordinate as the axis, with `soc_sign = -1` selecting
/// the reflected cone {(u,t) : ||u||_2 <= -t}.
struct ConeSpec {
  ConeKind kind = ConeKind::Zero;
  int dim = 0;
  Mat mat;  // Polyhedral: W (rows); Generated: V (columns)
  int soc_sign = 1;

  static ConeSpec zero(int n) { return {ConeKind::Zero, n, {}, 1}; }
  static ConeSpec full(int n) { return {ConeKind::Full, n, {}, 1}; }
  static ConeSpec orthant(int n) { return {ConeKind::Orthant, n, {}, 1}; }
  static ConeSpec polyhedral(Mat w) {
    ConeSpec c{ConeKind::Polyhedral, static_cast<int>(w.cols()), std::move(w), 1};
    return c;
  }
  static ConeSpec generated(Mat v) {
    ConeSpec c{ConeKind::Generated, static_cast<int>(v.rows()), std::move(v), 1};
    return c;
  }
  static ConeSpec second_order(int n, int sign = 1) {
    require_param(n >= 1 && (sign == 1 || sign == -1), "bad second-order cone");
    return {ConeKind::Soc, n, {}, sign};
  }
};

inline bool in_cone(const ConeSpec& c, const Vec& x) {
  require_dim(x.size() == c.dim, "in_cone: dimension mismatch");
  const double tol = kMembershipTol * (1.0 + x.lpNorm<Eigen::Infinity>());
  switch (c.kind) {
    case ConeKind::Zero:
      return x.lpNorm<Eigen::Infinity>() <= tol;
    case ConeKind::Full:
      return true;
    case ConeKind::Orthant:
      return x.minCoeff() >= -tol;
    case ConeKind::Polyhedral:
      return c.mat.rows() == 0 || (c.mat * x).maxCoeff() <= tol;
    case ConeKind::Generated: {
      const Vec lambda = nonnegative_least_squares(c.mat, x);
      return (c.mat * lambda - x).lpNorm<Eigen::Infinity>() <= tol;
    }
    case ConeKind::Soc: {
      const int n = c.dim;
      const double head = n > 1 ? x.head(n - 1).norm() : 0.0;
      return head <= c.soc_sign * x[n - 1] + tol;
    }
  }
  return false;
}

inline ConeSpec polar_cone(const ConeSpec& c) {
  switch (c.kind) {
    case ConeKind::Zero:
      return ConeSpec::full(c.dim);
    case ConeKind::Full:
      return ConeSpec::zero(c.dim);
    case ConeKind::Orthant:
      // {x >= 0}^polar = {y <= 0}, i.e. rows of the identity as inequalities.
      return ConeSpec::polyhedral(Mat::Identity(c.dim, c.dim));
    case ConeKind::Polyhedral:
      // Farkas: {x : Wx <= 0}^polar = {W^T lambda : lambda >= 0}.
      return ConeSpec::generated(c.mat.transpose());
    case ConeKind::Generated:
      return ConeSpec::polyhedral(c.mat.transpose());
    case ConeKind::Soc:
      return ConeSpec::second_order(c.dim, -c.soc_sign);
  }
  return c;
}

/// Euclidean projection onto the cone.
inline Vec project_cone(const ConeSpec& c, const Vec& x) {
  require_dim(x.size() == c.dim, "project_cone: dimension mismatch");
  switch (c.kind) {
    case ConeKind::Zero:
      return Vec::Zero(c.dim);
    case ConeKind::Full:
      return x;
    case ConeKind::Orthant:
      return x.cwiseMax(0.0);
    case ConeKind::Generated: {
      const Vec lambda = nonnegative_least_squares(c.mat, x);
      return c.mat * lambda;
    }
    case ConeKind::Polyhedral: {
      // Moreau: x = P_K(x) + P_{K polar}(x), and the polar is generated.
      const ConeSpec polar = polar_cone(c);
      const Vec lambda = nonnegative_least_squares(polar.mat, x);
      return x - polar.mat * lambda;
    }
    case ConeKind::Soc: {
      const int n = c.dim;
      Vec z = c.soc_sign < 0 ? Vec(-x) : x;
      const double t = z[n - 1];
      const double h = n > 1 ? z.head(n - 1).norm() : 0.0;
      Vec out = Vec::Zero(n);
      if (h <= t) {
        out = z;
      } else if (h <= -t) {
        // stays zero
      } else {
        const double alpha = 0.5 * (h + t);
        if (h > 0.0) out.head(n - 1) = (alpha / h) * z.head(n - 1);
        out[n - 1] = alpha;
      }
      return c.soc_sign < 0 ? Vec(-out) : out;
    }
  }
  return x;
}

enum class GaugeKind { L1, L2, LInf, Cone, Scaled, Sum, Max };

/// A closed gauge (nonnegative, positively homogeneous, convex, zero at the
/// origin) described structurally so that polars can be formed symbolically.
///
/// Supported atoms are the three polyhedral/Euclidean norms and cone
/// indicators; composites are positive scalings and blockwise separable
/// sums/maxima over disjoint coordinate blocks.
struct GaugeSpec {
  GaugeKind kind = GaugeKind::L1;
  int dim = 0;
  double scale = 1.0;                      // Scaled
  std::shared_ptr<const GaugeSpec> base;   // Scaled
  ConeSpec cone;                           // Cone
  std::vector<GaugeSpec> parts;            // Sum / Max blocks

  static GaugeSpec l1(int n) { return atom(GaugeKind::L1, n); }
  static GaugeSpec l2(int n) { return atom(GaugeKind::L2, n); }
  static GaugeSpec linf(int n) { return atom(GaugeKind::LInf, n); }

  static GaugeSpec cone_indicator(ConeSpec c) {
    GaugeSpec g;
    g.kind = GaugeKind::Cone;
    g.dim = c.dim;
    g.cone = std::move(c);
    return g;
  }

  static GaugeSpec scaled(double c, GaugeSpec inner) {
    require_param(c > 0.0, "gauge scaling must be positive");
    GaugeSpec g;
    g.kind = GaugeKind::Scaled;
    g.dim = inner.dim;
    g.scale = c;
    g.base = std::make_shared<const GaugeSpec>(std::move(inner));
    return g;
  }

  static GaugeSpec separable_sum(std::vector<GaugeSpec> blocks) {
    return composite(GaugeKind::Sum, std::move(blocks));
  }
  static GaugeSpec separable_max(std::vector<GaugeSpec> blocks) {
    return composite(GaugeKind::Max, std::move(blocks));
  }

 private:
  static GaugeSpec atom(GaugeKind k, int n) {
    require_param(n > 0, "gauge dimension must be positive");
    GaugeSpec g;
    g.kind = k;
    g.dim = n;
    return g;
  }
  static GaugeSpec composite(GaugeKind k, std::vector<GaugeSpec> blocks) {
    require_param(!blocks.empty(), "composite gauge needs at least one block");
    GaugeSpec g;
    g.kind = k;
    g.dim = 0;
    for (const auto& b : blocks) g.dim += b.dim;
    g.parts = std::move(blocks);
    return g;
  }
};

inline double gauge_eval(const GaugeSpec& g, const Vec& x) {
  require_dim(x.size() == g.dim, "gauge_eval: dimension mismatch");
  switch (g.kind) {
    case GaugeKind::L1:
      return x.lpNorm<1>();
    case GaugeKind::L2:
      return x.norm();
    case GaugeKind::LInf:
      return x.lpNorm<Eigen::Infinity>();
    case GaugeKind::Cone:
      return in_cone(g.cone, x) ? 0.0 : kInf;
    case GaugeKind::Scaled:
      return g.scale * gauge_eval(*g.base, x);
    case GaugeKind::Sum:
    case GaugeKind::Max: {
      double acc = 0.0;
      int off = 0;
      for (const auto& p : g.parts) {
        const double v = gauge_eval(p, x.segment(off, p.dim));
        acc = g.kind == GaugeKind::Sum ? acc + v : std::max(acc, v);
        off += p.dim;
      }
      return acc;
    }
  }
  return 0.0;
}

/// Structural polar transform. Norm atoms swap with their dual norms, cone
/// indicators become indicators of the polar cone, positive scalings invert,
/// and blockwise sums exchange with blockwise maxima.
inline GaugeSpec polar_of(const GaugeSpec& g) {
  switch (g.kind) {
    case GaugeKind::L1:
      return GaugeSpec::linf(g.dim);
    case GaugeKind::L2:
      return GaugeSpec::l2(g.dim);
    case GaugeKind::LInf:
      return GaugeSpec::l1(g.dim);
    case GaugeKind::Cone:
      return GaugeSpec::cone_indicator(polar_cone(g.cone));
    case GaugeKind::Scaled:
      return GaugeSpec::scaled(1.0 / g.scale, polar_of(*g.base));
    case GaugeKind::Sum:
    case GaugeKind::Max: {
      std::vector<GaugeSpec> polars;
      polars.reserve(g.parts.size());
      for (const auto& p : g.parts) polars.push_back(polar_of(p));
      return g.kind == GaugeKind::Sum ? GaugeSpec::separable_max(std::move(polars))
                                      : GaugeSpec::separable_sum(std::move(polars));
    }
  }
  return g;
}

inline double polar_eval(const GaugeSpec& g, const Vec& y) {
  return gauge_eval(polar_of(g), y);
}

/// A subgradient of the gauge at x, using the minimum-norm selection at
/// points of nondifferentiability (zeros of the argument, ties in maxima).
/// The result v always satisfies the support identity <v,x> = kappa(x) and
/// the polar bound kappa_polar(v) <= 1 when kappa(x) > 0.
inline Vec gauge_subgradient(const GaugeSpec& g, const Vec& x) {
  require_dim(x.size() == g.dim, "gauge_subgradient: dimension mismatch");
  switch (g.kind) {
    case GaugeKind::L1: {
      Vec v(g.dim);
      for (int i = 0; i < g.dim; ++i)
        v[i] = x[i] > 0 ? 1.0 : (x[i] < 0 ? -1.0 : 0.0);
      return v;
    }
    case GaugeKind::L2: {
      const double n = x.norm();
      return n > 0 ? Vec(x / n) : Vec(Vec::Zero(g.dim));
    }
    case GaugeKind::LInf: {
      const double m = x.lpNorm<Eigen::Infinity>();
      Vec v = Vec::Zero(g.dim);
      if (m == 0.0) return v;
      int ties = 0;
      for (int i = 0; i < g.dim; ++i)
        if (std::abs(x[i]) >= m * (1.0 - 1e-12)) ++ties;
      for (int i = 0; i < g.dim; ++i)
        if (std::abs(x[i]) >= m * (1.0 - 1e-12))
          v[i] = (x[i] > 0 ? 1.0 : -1.0) / ties;
      return v;
    }
    case GaugeKind::Cone:
      require_param(in_cone(g.cone, x),
                    "gauge_subgradient: point outside the cone");
      return Vec::Zero(g.dim);
    case GaugeKind::Scaled:
      return g.scale * gauge_subgradient(*g.base, x);
    case GaugeKind::Sum: {
      Vec v(g.dim);
      int off = 0;
      for (const auto& p : g.parts) {
        v.segment(off, p.dim) = gauge_subgradient(p, x.segment(off, p.dim));
        off += p.dim;
      }
      return v;
    }
    case GaugeKind::Max: {
      // One active block carries the subgradient; among ties, take the
      // block whose subgradient is shortest (deterministic selection).
      double best_val = -kInf;
      int off = 0;
      std::vector<int> offsets;
      std::vector<double> vals;
      for (const auto& p : g.parts) {
        offsets.push_back(off);
        vals.push_back(gauge_eval(p, x.segment(off, p.dim)));
        best_val = std::max(best_val, vals.back());
        off += p.dim;
      }
      Vec v = Vec::Zero(g.dim);
      if (best_val <= 0.0) return v;
      int pick = -1;
      double pick_norm = kInf;
      Vec pick_grad;
      for (std::size_t i = 0; i < g.parts.size(); ++i) {
        if (vals[i] >= best_val * (1.0 - 1e-12)) {
          Vec grad =
              gauge_subgradient(g.parts[i], x.segment(offsets[i], g.parts[i].dim));
          if (grad.norm() < pick_norm) {
            pick = static_cast<int>(i);
            pick_norm = grad.norm();
            pick_grad = std::move(grad);
          }
        }
      }
      v.segment(offsets[pick], g.parts[pick].dim) = pick_grad;
      return v;
    }
  }
  return Vec::Zero(g.dim);
}

namespace detail {

// Projection onto {u : ||u||_1 <= r} by the sorted-threshold rule.
inline Vec project_l1_ball(const Vec& x, double r) {
  if (x.lpNorm<1>() <= r) return x;
  Vec mag = x.cwiseAbs();
  std::vector<double> s(mag.data(), mag.data() + mag.size());
  std::sort(s.begin(), s.end(), std::greater<double>());
  double cumsum = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    cumsum += s[k];
    const double t = (cumsum - r) / static_cast<double>(k + 1);
    if (k + 1 == s.size() || s[k + 1] <= t) {
      theta = t;
      break;
    }
  }
  Vec out(x.size());
  for (int i = 0; i < x.size(); ++i) {
    const double m = std::max(std::abs(x[i]) - theta, 0.0);
    out[i] = x[i] > 0 ? m : -m;
  }
  return out;
}

}  // namespace detail

/// Euclidean projection onto {u : kappa(u) <= radius}.
/// Closed forms for the norm atoms (clip, radial shrink, sorted threshold)
/// and cone projections for indicator gauges; composite blocks would need a
/// multiplier search and are reported as a capability gap.
inline Vec project_unit_ball(const GaugeSpec& g, const Vec& x,
                             double radius = 1.0) {
  require_dim(x.size() == g.dim, "project_unit_ball: dimension mismatch");
  require_param(radius >= 0.0, "ball radius must be nonnegative");
  switch (g.kind) {
    case GaugeKind::L1:
      return radius == 0.0 ? Vec(Vec::Zero(g.dim))
                           : detail::project_l1_ball(x, radius);
    case GaugeKind::L2: {
      const double n = x.norm();
      return n <= radius ? x : Vec(x * (radius / n));
    }
    case GaugeKind::LInf:
      return x.cwiseMin(radius).cwiseMax(-radius);
    case GaugeKind::Cone:
      return project_cone(g.cone, x);
    case GaugeKind::Scaled:
      return project_unit_ball(*g.base, x, radius / g.scale);
    case GaugeKind::Sum:
    case GaugeKind::Max:
      throw CapabilityError(
          "project_unit_ball: composite gauge balls are not supported");
  }
  return x;
}

}  // namespace gaugekit
