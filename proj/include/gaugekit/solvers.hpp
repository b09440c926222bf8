// gaugekit: gauge and perspective duality toolkit
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "gaugekit/dense_map.hpp"
#include "gaugekit/errors.hpp"
#include "gaugekit/gauges.hpp"
#include "gaugekit/plq.hpp"
#include "gaugekit/tolerances.hpp"

namespace gaugekit {

// ---------------------------------------------------------------------------
// Proximal building blocks
// ---------------------------------------------------------------------------

/// prox of t * ||.||_1, i.e. shrink each coordinate toward zero by t.
inline Vec soft_threshold(const Vec& v, double t) {
  require_param(t >= 0.0, "soft_threshold: shift must be nonnegative");
  Vec out(v.size());
  for (int i = 0; i < v.size(); ++i) {
    const double m = std::max(std::abs(v[i]) - t, 0.0);
    out[i] = v[i] > 0 ? m : -m;
  }
  return out;
}

/// prox of alpha * kappa for a gauge kappa, via the support-function form
/// prox(y) = y - P(y) with P the projection onto the alpha-scaled polar ball.
inline Vec prox_gauge(const GaugeSpec& g, const Vec& y, double alpha) {
  require_param(alpha >= 0.0, "prox_gauge: step must be nonnegative");
  return y - project_unit_ball(polar_of(g), y, alpha);
}

/// prox of alpha * f* when f is the indicator of a convex set with known
/// projection: prox(v) = v - alpha * P(v / alpha) (Moreau identity).
inline Vec prox_via_moreau(const std::function<Vec(const Vec&)>& project,
                           double alpha, const Vec& v) {
  require_param(alpha > 0.0, "prox step must be positive");
  return v - alpha * project(v / alpha);
}

/// Euclidean projection onto the ball {u : ||center - u||_2 <= radius}.
inline Vec project_ball_around(const Vec& center, double radius, const Vec& v) {
  require_param(radius >= 0.0, "ball radius must be nonnegative");
  const Vec r = v - center;
  const double n = r.norm();
  return n <= radius ? v : Vec(center + (radius / n) * r);
}

/// Euclidean projection onto the Huber sublevel set {u : sum_i h(b_i - u_i)
/// <= sigma}. The multiplier equation is solved by bisection; each candidate
/// residual is the scalar Huber prox of b - z, through which the sublevel
/// value is monotone in the multiplier.
inline Vec project_huber_level_set(const Vec& b, double sigma, double eta,
                                   const Vec& z,
                                   const ToleranceConfig& tol = {}) {
  require_param(sigma >= 0.0 && eta > 0.0,
                "project_huber_level_set: need sigma >= 0 and eta > 0");
  require_dim(b.size() == z.size(),
              "project_huber_level_set: dimension mismatch");
  // At level zero the set collapses to the exact-fit point.
  if (sigma == 0.0) return b;
  const auto level = [&](double lambda, Vec* residual) -> double {
    double acc = 0.0;
    for (int i = 0; i < b.size(); ++i) {
      const double d = huber_prox(lambda, eta, b[i] - z[i]);
      if (residual) (*residual)[i] = d;
      acc += huber_value(eta, d);
    }
    return acc;
  };
  if (level(0.0, nullptr) <= sigma) return z;

  double lo = 0.0, hi = 1.0;
  int doublings = 0;
  while (level(hi, nullptr) > sigma) {
    lo = hi;
    hi *= 2.0;
    require_param(++doublings < 200,
                  "project_huber_level_set: multiplier search diverged");
  }
  while (hi - lo > tol.bisect_tol * (1.0 + hi)) {
    const double mid = 0.5 * (lo + hi);
    (level(mid, nullptr) > sigma ? lo : hi) = mid;
  }
  Vec residual(b.size());
  level(hi, &residual);
  return b - residual;
}

/// Euclidean projection onto {y : <b,y> - sigma ||y||_2 >= 1}, the feasible
/// set of the dual with a two-norm constraint gauge. Stationarity forces the
/// projection to be a positive multiple of (point + lambda b); the remaining
/// scalar condition is solved by bisection on lambda.
inline Vec project_gauge_dual_l2_set(const Vec& b, double sigma, const Vec& y,
                                     const ToleranceConfig& tol = {}) {
  require_dim(b.size() == y.size(),
              "project_gauge_dual_l2_set: dimension mismatch");
  require_param(sigma >= 0.0, "sigma must be nonnegative");
  require_param(b.norm() > sigma,
                "project_gauge_dual_l2_set: the feasible set is empty when "
                "||b|| <= sigma");
  if (b.dot(y) - sigma * y.norm() >= 1.0) return y;

  const auto candidate = [&](double lambda) -> Vec {
    const Vec w = y + lambda * b;
    const double wn = w.norm();
    const double t = wn - lambda * sigma;
    if (t <= 0.0 || wn == 0.0) return Vec::Zero(y.size());
    return Vec((t / wn) * w);
  };
  const auto slack = [&](double lambda) -> double {
    const Vec c = candidate(lambda);
    return b.dot(c) - sigma * c.norm() - 1.0;
  };

  double lo = 0.0, hi = 1.0;
  int doublings = 0;
  while (slack(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    require_param(++doublings < 200,
                  "project_gauge_dual_l2_set: multiplier search diverged");
  }
  while (hi - lo > tol.bisect_tol * (1.0 + hi)) {
    const double mid = 0.5 * (lo + hi);
    (slack(mid) < 0.0 ? lo : hi) = mid;
  }
  return candidate(hi);
}

// ---------------------------------------------------------------------------
// Small least-squares solvers
// ---------------------------------------------------------------------------

/// Least-squares fit restricted to a column support, embedded back into a
/// full-length vector (zeros off the support). Solved by conjugate gradients
/// on the normal equations; starting from zero this converges to the
/// minimum-norm solution when the restricted system is rank deficient, with
/// a tiny ridge guarding against breakdown.
inline Vec restricted_least_squares(const Mat& a,
                                    const std::vector<int>& support,
                                    const Vec& rhs, double tol = 1e-10) {
  require_dim(rhs.size() == a.rows(), "restricted_least_squares: rhs size");
  require_param(!support.empty(), "restricted_least_squares: empty support");
  Mat sub(a.rows(), static_cast<Eigen::Index>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j) {
    require_param(support[j] >= 0 && support[j] < a.cols(),
                  "restricted_least_squares: support index out of range");
    sub.col(static_cast<Eigen::Index>(j)) = a.col(support[j]);
  }
  const double ridge = 1e-12;
  const Vec g = sub.transpose() * rhs;
  Vec w = Vec::Zero(sub.cols());
  Vec r = g;
  Vec p = r;
  double rr = r.squaredNorm();
  const double stop = tol * tol * std::max(g.squaredNorm(), 1e-300);
  const int max_cg = 20 * static_cast<int>(sub.cols()) + 50;
  for (int k = 0; k < max_cg && rr > stop; ++k) {
    const Vec mp = sub.transpose() * (sub * p) + ridge * p;
    const double denom = p.dot(mp);
    if (denom <= 0.0) break;
    const double step = rr / denom;
    w += step * p;
    r -= step * mp;
    const double rr_new = r.squaredNorm();
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  Vec x = Vec::Zero(a.cols());
  for (std::size_t j = 0; j < support.size(); ++j)
    x[support[j]] = w[static_cast<Eigen::Index>(j)];
  return x;
}

/// minimize 0.5 ||A v - c||^2 over the one-norm ball of the given radius,
/// by accelerated projected gradient.
inline Vec l1_ball_least_squares(const Mat& a, const Vec& c, double radius,
                                 int max_iters = 5000, double tol = 1e-12) {
  require_dim(c.size() == a.rows(), "l1_ball_least_squares: rhs size");
  require_param(radius >= 0.0, "l1_ball_least_squares: radius >= 0");
  Vec v = Vec::Zero(a.cols());
  if (radius == 0.0 || a.size() == 0) return v;
  const double op = estimate_operator_norm(a);
  if (op == 0.0) return v;
  const double step = 1.0 / (op * op);
  Vec z = v;
  double t = 1.0;
  for (int k = 0; k < max_iters; ++k) {
    const Vec grad = a.transpose() * (a * z - c);
    Vec v_new = detail::project_l1_ball(z - step * grad, radius);
    const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    z = v_new + ((t - 1.0) / t_new) * (v_new - v);
    const double move = (v_new - v).norm();
    v = std::move(v_new);
    t = t_new;
    if (move <= tol * (1.0 + v.norm())) break;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Projection onto the SOCP-form dual feasible set
//   <b,y> + mu - sigma xi = 1, mu <= 0, xi >= 0, Wy <= xi w,
//   ||(2Ly, xi + 2mu)|| <= xi - 2mu,
// via ADMM splitting D v in S with S a product of a second-order cone, a
// nonpositive orthant, and the singleton {1}. The quadratic step reuses one
// LDLT factorization, and the scaled dual state is kept warm across calls
// because outer solvers project a slowly moving sequence of points.
// ---------------------------------------------------------------------------

class SocpSetProjector {
 public:
  explicit SocpSetProjector(PerspectiveDualFeasibleSet set,
                            ToleranceConfig tol = {})
      : set_(std::move(set)), tol_(tol) {
    tol_.validate();
    build();
  }

  int dim() const { return static_cast<int>(d_.cols()); }

  const PerspectiveDualFeasibleSet& set() const { return set_; }

  /// False when the most recent project() hit the iteration cap before the
  /// splitting residuals fell below feas_tol.
  bool last_converged() const { return last_converged_; }

  /// Projects the stacked point (y, mu, xi) onto the feasible set.
  Vec project(const Vec& v_bar) {
    require_dim(v_bar.size() == d_.cols(), "SocpSetProjector: dimension");
    const Eigen::Index rows = d_.rows();
    if (!warm_) {
      s_ = project_onto_blocks(d_ * v_bar);
      u_ = Vec::Zero(rows);
      warm_ = true;
    }
    Vec v = v_bar;
    last_converged_ = false;
    for (int it = 0; it < tol_.max_inner_iters; ++it) {
      v = ldlt_.solve(v_bar + beta_ * (d_.transpose() * (s_ - u_)));
      const Vec dv = d_ * v;
      const Vec s_prev = s_;
      s_ = project_onto_blocks(dv + u_);
      u_ += dv - s_;
      const double r_primal = (dv - s_).norm();
      const double r_dual = beta_ * (d_.transpose() * (s_ - s_prev)).norm();
      const double scale = 1.0 + dv.norm();
      if (r_primal <= tol_.feas_tol * scale &&
          r_dual <= tol_.feas_tol * scale) {
        last_converged_ = true;
        break;
      }
      if (it % 20 == 19) {
        if (r_primal > 10.0 * r_dual) {
          beta_ *= 2.0;
          u_ *= 0.5;
          factorize();
        } else if (r_dual > 10.0 * r_primal) {
          beta_ *= 0.5;
          u_ *= 2.0;
          factorize();
        }
      }
    }
    return v;
  }

 private:
  void build() {
    const int m = static_cast<int>(set_.b.size());
    const int k = set_.plq.n_rows();
    const int nv = m + 2;  // (y, mu, xi)
    soc_dim_ = m + 2;
    pol_dim_ = k + 2;
    d_ = Mat::Zero(soc_dim_ + pol_dim_ + 1, nv);
    // second-order cone block: (2Ly, xi + 2mu | xi - 2mu)
    d_.block(0, 0, m, m) = 2.0 * set_.plq.l_mat;
    d_(m, m) = 2.0;
    d_(m, m + 1) = 1.0;
    d_(m + 1, m) = -2.0;
    d_(m + 1, m + 1) = 1.0;
    // nonpositive block: Wy - xi w, mu, -xi
    if (k > 0) {
      d_.block(soc_dim_, 0, k, m) = set_.plq.w_mat;
      d_.block(soc_dim_, m + 1, k, 1) = -set_.plq.w_vec;
    }
    d_(soc_dim_ + k, m) = 1.0;
    d_(soc_dim_ + k + 1, m + 1) = -1.0;
    // equality row: <b,y> + mu - sigma xi = 1
    d_.block(soc_dim_ + pol_dim_, 0, 1, m) = set_.b.transpose();
    d_(soc_dim_ + pol_dim_, m) = 1.0;
    d_(soc_dim_ + pol_dim_, m + 1) = -set_.sigma;

    dtd_ = d_.transpose() * d_;
    factorize();
  }

  void factorize() {
    const Eigen::Index nv = d_.cols();
    ldlt_.compute(Mat::Identity(nv, nv) + beta_ * dtd_);
    require_param(ldlt_.info() == Eigen::Success,
                  "SocpSetProjector: factorization failed");
  }

  Vec project_onto_blocks(const Vec& s) const {
    Vec out(s.size());
    out.head(soc_dim_) =
        project_cone(ConeSpec::second_order(soc_dim_), s.head(soc_dim_));
    out.segment(soc_dim_, pol_dim_) =
        s.segment(soc_dim_, pol_dim_).cwiseMin(0.0);
    out[soc_dim_ + pol_dim_] = 1.0;
    return out;
  }

  PerspectiveDualFeasibleSet set_;
  ToleranceConfig tol_;
  Mat d_, dtd_;
  int soc_dim_ = 0, pol_dim_ = 0;
  double beta_ = 1.0;
  Eigen::LDLT<Mat> ldlt_;
  Vec s_, u_;
  bool warm_ = false;
  bool last_converged_ = false;
};

/// One-shot projection onto the SOCP-form feasible set; callers projecting a
/// sequence of nearby points should hold a SocpSetProjector instead.
inline Vec project_socp_set(const PerspectiveDualFeasibleSet& q, const Vec& v,
                            const ToleranceConfig& tol = {}) {
  SocpSetProjector projector(q, tol);
  return projector.project(v);
}

// ---------------------------------------------------------------------------
// Primal-dual first-order driver for min_x g(x) + f(Kx), iterating
//   y <- prox_{a_y f*}(y + a_y K (2x - x_prev))
//   x <- prox_{a_x g}(x - a_x K^T y)
// with a_x a_y ||K||^2 < 1.
// ---------------------------------------------------------------------------

struct LinOp {
  int rows = 0;
  int cols = 0;
  std::function<Vec(const Vec&)> forward;
  std::function<Vec(const Vec&)> adjoint;
  double norm = 0.0;

  static LinOp from_matrix(const DenseMap& a) {
    LinOp k;
    k.rows = static_cast<int>(a.rows());
    k.cols = static_cast<int>(a.cols());
    k.forward = [&a](const Vec& x) { return a.apply(x); };
    k.adjoint = [&a](const Vec& y) { return a.apply_adjoint(y); };
    k.norm = a.operator_norm();
    return k;
  }

  static LinOp from_adjoint_of(const DenseMap& a) {
    LinOp k;
    k.rows = static_cast<int>(a.cols());
    k.cols = static_cast<int>(a.rows());
    k.forward = [&a](const Vec& y) { return a.apply_adjoint(y); };
    k.adjoint = [&a](const Vec& x) { return a.apply(x); };
    k.norm = a.operator_norm();
    return k;
  }
};

struct CpConfig {
  double alpha_x = 0.0;  ///< 0 selects 0.99 / ||K||
  double alpha_y = 0.0;  ///< 0 selects 0.99 / ||K||
  int max_iters = 5000;
  double stop_tol = 1e-9;
  int trace_every = 1;  ///< callback cadence; the final iterate always fires

  std::pair<double, double> resolve_steps(double k_norm) const {
    double ax = alpha_x, ay = alpha_y;
    if (ax <= 0.0) ax = k_norm > 0.0 ? 0.99 / k_norm : 1.0;
    if (ay <= 0.0) ay = k_norm > 0.0 ? 0.99 / k_norm : 1.0;
    require_param(ax * ay * k_norm * k_norm < 1.0,
                  "cp_solve: step sizes violate alpha_x alpha_y ||K||^2 < 1");
    return {ax, ay};
  }
};

enum class SolveStatus { Converged, MaxIters, Diverged };

struct CpResult {
  Vec x;
  Vec y;
  int iters = 0;
  SolveStatus status = SolveStatus::MaxIters;
};

struct TraceRecord {
  int iter = 0;
  double objective = 0.0;
  double obj_dev = 0.0;
  double infeas = 0.0;
  int false_zeros = 0;
  int false_nonzeros = 0;
  double wall_ms = 0.0;
};

struct SolverTrace {
  std::vector<TraceRecord> records;
};

/// prox argument order: (point, step).
using ProxOp = std::function<Vec(const Vec&, double)>;
/// called once per iteration with (iter, x, y) after the update.
using IterCallback = std::function<void(int, const Vec&, const Vec&)>;

inline CpResult cp_solve(const LinOp& k, const ProxOp& prox_f_star,
                         const ProxOp& prox_g, Vec x0, Vec y0,
                         const CpConfig& cfg, const IterCallback& cb = {}) {
  require_dim(x0.size() == k.cols && y0.size() == k.rows,
              "cp_solve: start point dimensions");
  require_param(cfg.max_iters >= 1 && cfg.stop_tol > 0.0,
                "cp_solve: bad configuration");
  const auto [ax, ay] = cfg.resolve_steps(k.norm);

  CpResult res;
  res.x = std::move(x0);
  res.y = std::move(y0);
  Vec x_prev = res.x;
  const double blowup = 1e12;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    const Vec x_bar = 2.0 * res.x - x_prev;
    Vec y_new = prox_f_star(res.y + ay * k.forward(x_bar), ay);
    Vec x_new = prox_g(res.x - ax * k.adjoint(y_new), ax);
    if (!x_new.allFinite() || !y_new.allFinite() ||
        x_new.lpNorm<Eigen::Infinity>() > blowup ||
        y_new.lpNorm<Eigen::Infinity>() > blowup) {
      res.iters = it;
      res.status = SolveStatus::Diverged;
      return res;
    }
    const double dx = (x_new - res.x).norm();
    const double dy = (y_new - res.y).norm();
    x_prev = res.x;
    res.x = std::move(x_new);
    res.y = std::move(y_new);
    res.iters = it;
    const double scale = 1.0 + res.x.norm();
    const bool done = std::max(dx, dy) <= cfg.stop_tol * scale ||
                      it == cfg.max_iters;
    if (cb && (done || it % std::max(cfg.trace_every, 1) == 0))
      cb(it, res.x, res.y);
    if (done && std::max(dx, dy) <= cfg.stop_tol * scale) {
      res.status = SolveStatus::Converged;
      return res;
    }
  }
  res.status = SolveStatus::MaxIters;
  return res;
}

}  // namespace gaugekit
