// gaugekit: gauge and perspective duality toolkit
// Licensed under the Apache License, Version 2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "gaugekit/dense_map.hpp"
#include "gaugekit/errors.hpp"
#include "gaugekit/gauges.hpp"

namespace gaugekit {

// ---------------------------------------------------------------------------
// Scalar Huber helpers. Convention: the penalty at level eta > 0 is
//   h(t) = t^2 / (2 eta)          for |t| <= eta^2,
//   h(t) = eta |t| - eta^3 / 2    otherwise,
// i.e. the supremum of u t - (eta/2) u^2 over |u| <= eta. Its conjugate is
// (eta/2) s^2 on [-eta, eta] and +inf outside.
// ---------------------------------------------------------------------------

inline double huber_value(double eta, double t) {
  const double a = std::abs(t);
  return a <= eta * eta ? t * t / (2.0 * eta) : eta * a - eta * eta * eta / 2.0;
}

inline double huber_conjugate(double eta, double s) {
  return std::abs(s) <= eta ? 0.5 * eta * s * s : kInf;
}

inline double huber_gradient(double eta, double t) {
  return std::clamp(t / eta, -eta, eta);
}

/// Proximal map of lambda * h at t.
inline double huber_prox(double lambda, double eta, double t) {
  if (std::abs(t) <= eta * eta + eta * lambda) return eta * t / (eta + lambda);
  return t - lambda * eta * (t > 0 ? 1.0 : -1.0);
}

// ---------------------------------------------------------------------------
// Piecewise linear-quadratic penalties
//   g(y) = sup { <u, y> - 0.5 ||L u||^2 : W u <= w },
// with w >= 0 so that the origin is feasible and g is a nonnegative convex
// function vanishing at zero. The conjugate is g*(v) = delta_U(v)
// + 0.5 ||L v||^2 with U = {u : W u <= w}.
// ---------------------------------------------------------------------------

struct PlqSpec {
  Mat w_mat;  // k x l
  Vec w_vec;  // k, nonnegative
  Mat l_mat;  // l x l

  int arg_dim() const { return static_cast<int>(w_mat.cols()); }
  int n_rows() const { return static_cast<int>(w_mat.rows()); }

  void validate() const {
    require_param(w_mat.cols() >= 1, "plq: argument dimension must be positive");
    require_dim(w_vec.size() == w_mat.rows(), "plq: W and w row counts differ");
    require_dim(l_mat.rows() == w_mat.cols() && l_mat.cols() == w_mat.cols(),
                "plq: L must be square of the argument dimension");
    require_param(w_vec.size() == 0 || w_vec.minCoeff() >= 0.0,
                  "plq: w must be nonnegative so the origin is feasible");
  }

  /// Sum of m Huber penalties at level eta: W = [I; -I], w = eta 1, L = sqrt(eta) I.
  static PlqSpec huber_sum(double eta, int m) {
    require_param(eta > 0.0 && m >= 1, "huber_sum: need eta > 0 and m >= 1");
    PlqSpec p;
    p.w_mat.resize(2 * m, m);
    p.w_mat.topRows(m) = Mat::Identity(m, m);
    p.w_mat.bottomRows(m) = -Mat::Identity(m, m);
    p.w_vec = Vec::Constant(2 * m, eta);
    p.l_mat = std::sqrt(eta) * Mat::Identity(m, m);
    return p;
  }

  /// Pure quadratic 0.5 ||y||^2 (no polyhedral constraint rows).
  static PlqSpec quadratic(int m) {
    require_param(m >= 1, "quadratic: need m >= 1");
    PlqSpec p;
    p.w_mat.resize(0, m);
    p.w_vec.resize(0);
    p.l_mat = Mat::Identity(m, m);
    return p;
  }

  /// Support function of the box [0,1]^2 (L = 0). Evaluated at the shifted
  /// pair (r - eps, -r - eps) this yields the Vapnik deadzone loss
  /// max(|r| - eps, 0); see vapnik_loss below.
  static PlqSpec vapnik_pair() {
    PlqSpec p;
    p.w_mat.resize(4, 2);
    p.w_mat.topRows(2) = Mat::Identity(2, 2);
    p.w_mat.bottomRows(2) = -Mat::Identity(2, 2);
    p.w_vec.resize(4);
    p.w_vec << 1.0, 1.0, 0.0, 0.0;
    p.l_mat = Mat::Zero(2, 2);
    return p;
  }
};

/// Detects the huber_sum(eta, m) structure and returns eta if present.
inline std::optional<double> huber_structure(const PlqSpec& p) {
  const int m = p.arg_dim();
  if (p.n_rows() != 2 * m || m == 0) return std::nullopt;
  if (p.w_vec.size() == 0) return std::nullopt;
  const double eta = p.w_vec[0];
  if (eta <= 0.0) return std::nullopt;
  if ((p.w_vec.array() - eta).abs().maxCoeff() > 1e-14 * eta) return std::nullopt;
  if ((p.w_mat.topRows(m) - Mat::Identity(m, m)).lpNorm<Eigen::Infinity>() > 0)
    return std::nullopt;
  if ((p.w_mat.bottomRows(m) + Mat::Identity(m, m)).lpNorm<Eigen::Infinity>() > 0)
    return std::nullopt;
  const double root = std::sqrt(eta);
  if ((p.l_mat - root * Mat::Identity(m, m)).lpNorm<Eigen::Infinity>() >
      1e-14 * (1.0 + root))
    return std::nullopt;
  return eta;
}

namespace detail {

// Equality-constrained concave QP candidates over subsets of active rows.
// Any finite supremum of sup { <u,y> - 0.5 u^T M u : W u <= w } is attained
// at a point satisfying the stationarity system for some active subset, so
// scanning all subsets and keeping feasible candidates is exact at small k.
// Returns nullopt when no candidate exists (the supremum is unbounded).
inline std::optional<double> plq_stationary_scan(const Mat& w_mat,
                                                 const Vec& w_vec, const Mat& m,
                                                 const Vec& y,
                                                 Vec* argmax = nullptr) {
  const int l = static_cast<int>(y.size());
  const int k = static_cast<int>(w_mat.rows());
  if (l > 8 || k > 16)
    throw CapabilityError(
        "plq: general penalties are limited to 8 variables and 16 rows");
  double best = -kInf;
  bool found = false;
  std::vector<int> rows;
  for (unsigned mask = 0; mask < (1u << k); ++mask) {
    rows.clear();
    for (int i = 0; i < k; ++i)
      if (mask & (1u << i)) rows.push_back(i);
    const int s = static_cast<int>(rows.size());
    if (s > l) continue;
    Mat kkt = Mat::Zero(l + s, l + s);
    kkt.topLeftCorner(l, l) = m;
    Vec rhs(l + s);
    rhs.head(l) = y;
    for (int j = 0; j < s; ++j) {
      kkt.block(j + l, 0, 1, l) = w_mat.row(rows[j]);
      kkt.block(0, j + l, l, 1) = w_mat.row(rows[j]).transpose();
      rhs[l + j] = w_vec[rows[j]];
    }
    Eigen::FullPivLU<Mat> lu(kkt);
    const Vec sol = lu.solve(rhs);
    if ((kkt * sol - rhs).lpNorm<Eigen::Infinity>() >
        1e-9 * (1.0 + rhs.lpNorm<Eigen::Infinity>()))
      continue;
    const Vec u = sol.head(l);
    bool ok = true;
    for (int j = 0; j < s && ok; ++j)
      if (sol[l + j] < -1e-9) ok = false;
    if (!ok) continue;
    if (k > 0 && (w_mat * u - w_vec).maxCoeff() >
                     1e-9 * (1.0 + w_vec.lpNorm<Eigen::Infinity>()))
      continue;
    const double obj = y.dot(u) - 0.5 * u.dot(m * u);
    if (obj > best) {
      best = obj;
      if (argmax) *argmax = u;
    }
    found = true;
  }
  if (!found) return std::nullopt;
  return best;
}

}  // namespace detail

inline double plq_eval(const PlqSpec& p, const Vec& y) {
  require_dim(y.size() == p.arg_dim(), "plq_eval: dimension mismatch");
  if (const auto eta = huber_structure(p)) {
    double acc = 0.0;
    for (int i = 0; i < y.size(); ++i) acc += huber_value(*eta, y[i]);
    return acc;
  }
  const Mat m = p.l_mat.transpose() * p.l_mat;
  const auto val = detail::plq_stationary_scan(p.w_mat, p.w_vec, m, y);
  if (!val)
    throw CapabilityError("plq_eval: supremum is unbounded over the polyhedron");
  return *val;
}

/// Gradient (maximizing u) of the penalty at y; for the Huber structure this
/// is the clipped scaling, in general the argmax of the defining supremum.
inline Vec plq_gradient(const PlqSpec& p, const Vec& y) {
  require_dim(y.size() == p.arg_dim(), "plq_gradient: dimension mismatch");
  if (const auto eta = huber_structure(p)) {
    Vec u(y.size());
    for (int i = 0; i < y.size(); ++i) u[i] = huber_gradient(*eta, y[i]);
    return u;
  }
  const Mat m = p.l_mat.transpose() * p.l_mat;
  Vec u = Vec::Zero(y.size());
  const auto val = detail::plq_stationary_scan(p.w_mat, p.w_vec, m, y, &u);
  if (!val)
    throw CapabilityError(
        "plq_gradient: supremum is unbounded over the polyhedron");
  return u;
}

/// Recession function of the penalty: the support function of the polyhedron
/// {u : Wu <= w}, +inf in directions where that support is unbounded.
inline double plq_recession(const PlqSpec& p, const Vec& d) {
  require_dim(d.size() == p.arg_dim(), "plq_recession: dimension mismatch");
  if (const auto eta = huber_structure(p)) return *eta * d.lpNorm<1>();
  const Mat zero = Mat::Zero(d.size(), d.size());
  const auto val = detail::plq_stationary_scan(p.w_mat, p.w_vec, zero, d);
  return val ? *val : kInf;
}

/// Certifies that the penalty is finite on all of its argument space, which
/// holds when L is injective or the polyhedron is bounded. A false return
/// means the domain could not be certified full, not that it is smaller.
inline bool plq_full_domain(const PlqSpec& p) {
  if (huber_structure(p)) return true;
  Eigen::FullPivLU<Mat> lu(p.l_mat);
  if (lu.rank() == p.arg_dim()) return true;
  for (int i = 0; i < p.arg_dim(); ++i) {
    for (const double s : {1.0, -1.0}) {
      Vec d = Vec::Zero(p.arg_dim());
      d[i] = s;
      if (plq_recession(p, d) == kInf) return false;
    }
  }
  return true;
}

/// Conjugate of the penalty: delta_U(v) + 0.5 ||L v||^2. Each membership row
/// is tested against a tolerance scaled to its own terms, so rows through the
/// origin keep rejecting sign violations however small v gets.
inline double plq_conjugate(const PlqSpec& p, const Vec& v) {
  require_dim(v.size() == p.arg_dim(), "plq_conjugate: dimension mismatch");
  for (int i = 0; i < p.n_rows(); ++i) {
    const double lhs = p.w_mat.row(i).dot(v);
    const double rhs = p.w_vec[i];
    const double tol = kMembershipTol * (std::abs(lhs) + std::abs(rhs));
    if (lhs - rhs > tol) return kInf;
  }
  return 0.5 * (p.l_mat * v).squaredNorm();
}

/// Minkowski gauge of U = {u : Wu <= w}: max{0, max_i W_i^T y / w_i}, with
/// the ratio read as +inf when w_i = 0 and W_i^T y > 0 (cone-face limit).
inline double polyhedron_gauge(const PlqSpec& p, const Vec& y) {
  require_dim(y.size() == p.arg_dim(), "polyhedron_gauge: dimension mismatch");
  double best = 0.0;
  for (int i = 0; i < p.n_rows(); ++i) {
    const double num = p.w_mat.row(i).dot(y);
    const double den = p.w_vec[i];
    if (den == 0.0) {
      if (num > 0.0) return kInf;
    } else {
      best = std::max(best, num / den);
    }
  }
  return best;
}

/// Polar of the perspective of the penalty, in closed form:
///   delta_{mu <= 0} + max{ gauge_U(y), -(1/(2 mu)) ||L y||^2 },
/// where the quadratic term at mu = 0 degenerates to the indicator of Ly = 0.
inline double plq_perspective_polar(const PlqSpec& p, const Vec& y, double mu) {
  require_dim(y.size() == p.arg_dim(),
              "plq_perspective_polar: dimension mismatch");
  if (mu > 0.0) return kInf;
  const double gauge = polyhedron_gauge(p, y);
  const Vec ly = p.l_mat * y;
  double quad;
  if (mu == 0.0) {
    quad = ly.lpNorm<Eigen::Infinity>() <=
                   kMembershipTol * (1.0 + y.lpNorm<Eigen::Infinity>())
               ? 0.0
               : kInf;
  } else {
    quad = -ly.squaredNorm() / (2.0 * mu);
  }
  return std::max(gauge, quad);
}

/// Vapnik deadzone loss max(|r| - eps, 0) through the box-support spec.
inline double vapnik_loss(double eps, double r) {
  require_param(eps >= 0.0, "vapnik_loss: eps must be nonnegative");
  Vec shifted(2);
  shifted << r - eps, -r - eps;
  return plq_eval(PlqSpec::vapnik_pair(), shifted);
}

// ---------------------------------------------------------------------------
// Feasible set of the dual problem obtained from the perspective machinery:
//   <b, y> + mu - sigma xi = 1,  mu <= 0,  xi >= 0,
//   W y <= xi w,   ||(2 L y, xi + 2 mu)||_2 <= xi - 2 mu,
// the last row being the rotated-cone form of ||L y||^2 <= -2 mu xi.
// ---------------------------------------------------------------------------

struct PerspectiveDualFeasibleSet {
  Vec b;
  double sigma = 1.0;
  PlqSpec plq;

  double equality_residual(const Vec& y, double mu, double xi) const {
    return b.dot(y) + mu - sigma * xi - 1.0;
  }

  /// Largest constraint violation; zero on the feasible set.
  double max_violation(const Vec& y, double mu, double xi) const {
    require_dim(y.size() == b.size(), "feasible set: dimension mismatch");
    double v = std::abs(equality_residual(y, mu, xi));
    v = std::max(v, mu);
    v = std::max(v, -xi);
    if (plq.n_rows() > 0)
      v = std::max(v, (plq.w_mat * y - xi * plq.w_vec).maxCoeff());
    const Vec ly = plq.l_mat * y;
    const double head = std::hypot(2.0 * ly.norm(), xi + 2.0 * mu);
    v = std::max(v, head - (xi - 2.0 * mu));
    return v;
  }

  bool contains(const Vec& y, double mu, double xi, double tol) const {
    return max_violation(y, mu, xi) <= tol;
  }
};

inline PerspectiveDualFeasibleSet build_perspective_dual_feasible_set(
    Vec b, double sigma, PlqSpec p) {
  require_param(sigma > 0.0,
                "perspective dual feasible set requires sigma > 0; the zero "
                "threshold has its own reduction in the duality module");
  p.validate();
  require_dim(b.size() == p.arg_dim(),
              "perspective dual feasible set: b and penalty dimensions differ");
  return PerspectiveDualFeasibleSet{std::move(b), sigma, std::move(p)};
}

}  // namespace gaugekit
