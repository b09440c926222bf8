// gaugekit: gauge and perspective duality toolkit
// Licensed under the Apache License, Version 2.0

// Integration gate: eight numbered end-to-end checks, one PASS/FAIL line
// each, nonzero exit when any check fails. Every tolerance is pinned next to
// the check that uses it.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "gaugekit/duality.hpp"
#include "gaugekit/experiment.hpp"
#include "gaugekit/pipelines.hpp"
#include "gaugekit/recovery.hpp"
#include "gaugekit/rng.hpp"

namespace {

using namespace gaugekit;

struct Timer {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

Vec random_vec(Rng& rng, int n, double scale = 1.0) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * rng.normal();
  return v;
}

/// One-norm objective, two-norm misfit, and a planted point whose residual
/// has norm sigma/2, so the instance is strictly feasible by construction.
ProblemSpec random_l1_l2_instance(Rng& rng, int m, int n) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    Mat a(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
    const Vec x_feas = random_vec(rng, n);
    Vec r0 = random_vec(rng, m);
    r0 *= 0.5 / r0.norm();
    const Vec b = a * x_feas + r0;
    if (b.norm() < 1.5) continue;
    ProblemSpec p;
    p.a = DenseMap(a);
    p.b = b;
    p.sigma = 1.0;
    p.objective = FnSpec::of_gauge(GaugeSpec::l1(n));
    p.constraint = FnSpec::of_gauge(GaugeSpec::l2(m));
    return p;
  }
  std::fprintf(stderr, "instance sampler failed\n");
  std::exit(1);
}

ProblemSpec analytic_instance() {
  Mat a(1, 2);
  a << 1.0, 0.0;
  ProblemSpec p;
  p.a = DenseMap(a);
  p.b = Vec::Constant(1, 1.0);
  p.sigma = 0.5;
  p.objective = FnSpec::of_gauge(GaugeSpec::l1(2));
  p.constraint = FnSpec::of_gauge(GaugeSpec::l2(1));
  return p;
}

std::vector<PerspectiveFn> closed_form_kinds() {
  std::vector<PerspectiveFn> kinds;
  kinds.push_back(PerspectiveFn::huber_sum(1.0, 2));
  kinds.push_back(PerspectiveFn::huber_sum(0.7, 3));
  kinds.push_back(PerspectiveFn::quadratic(2));
  kinds.push_back(PerspectiveFn::gauge_wrap(GaugeSpec::l1(2)));
  kinds.push_back(PerspectiveFn::gauge_wrap(GaugeSpec::l2(3)));
  kinds.push_back(PerspectiveFn::gauge_wrap(GaugeSpec::linf(2)));
  kinds.push_back(PerspectiveFn::plq_fn(PlqSpec::vapnik_pair()));
  kinds.push_back(PerspectiveFn::separable_sum(
      {PerspectiveFn::huber_sum(1.0, 1), PerspectiveFn::quadratic(2)}));
  return kinds;
}

/// Independent route to the perspective polar at nonpositive scalar argument:
/// the Minkowski gauge of the conjugate's epigraph, found by doubling and
/// bisection on the scaling. Uses only conjugate evaluations.
double epigraph_gauge_oracle(const PerspectiveFn& f, const Vec& z, double t) {
  const auto feasible = [&](double lam) {
    return conjugate_eval(f, Vec(z / lam)) <= t / lam;
  };
  double hi = 1.0;
  int grow = 0;
  while (!feasible(hi) && grow++ < 80) hi *= 2.0;
  if (!feasible(hi)) return kInf;
  double lo = hi;
  int shrink = 0;
  while (feasible(lo * 0.5) && shrink++ < 80) lo *= 0.5;
  if (shrink >= 80) return 0.0;  // feasible at arbitrarily small scalings
  lo *= 0.5;                     // infeasible endpoint
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
    if (hi - lo <= 1e-12 * (1.0 + hi)) break;
  }
  return hi;
}

// ---------------------------------------------------------------------------
// 1. Strong duality product on random strictly feasible instances.
// ---------------------------------------------------------------------------

bool check_duality_product(std::string& metric) {
  Timer timer;
  Rng rng(101);
  CpConfig cfg;
  cfg.stop_tol = 1e-9;
  cfg.max_iters = 200000;

  double worst = 0.0;
  int unconverged = 0;
  for (int inst = 0; inst < 50; ++inst) {
    const int m = 3 + static_cast<int>(rng.uniform_below(8));
    const int n = 8 + static_cast<int>(rng.uniform_below(23));
    const ProblemSpec p = random_l1_l2_instance(rng, m, n);
    const PrimalSolveResult primal = solve_primal_cp(p, cfg);
    const DualSolveResult dual = solve_dual_cp(p, cfg);
    if (primal.cp.status != SolveStatus::Converged ||
        dual.cp.status != SolveStatus::Converged)
      ++unconverged;
    worst = std::max(worst, std::abs(primal.nu * dual.nu - 1.0));
  }
  const double elapsed = timer.seconds();
  metric = fmt("50 instances, worst |nu_p nu_d - 1| = %.2e, %d unconverged, "
               "%.1f s",
               worst, unconverged, elapsed);
  return worst <= 1e-4 && unconverged == 0 && elapsed < 60.0;
}

// ---------------------------------------------------------------------------
// 2. The hand-solvable instance: solved values and closed-form residuals.
// ---------------------------------------------------------------------------

bool check_analytic_instance(std::string& metric) {
  const ProblemSpec p = analytic_instance();
  CpConfig cfg;
  // Dual iterate noise sits near the feasible-set projector's bisection
  // tolerance, so the stop rule must stay above it.
  cfg.stop_tol = 1e-11;
  cfg.max_iters = 50000;

  const PrimalSolveResult primal = solve_primal_cp(p, cfg);
  const DualSolveResult dual = solve_dual_cp(p, cfg);
  const bool solved_ok =
      primal.cp.status == SolveStatus::Converged &&
      dual.cp.status == SolveStatus::Converged &&
      std::abs(primal.nu - 0.5) <= 1e-6 && std::abs(dual.nu - 2.0) <= 1e-5 &&
      std::abs(primal.x[0] - 0.5) <= 1e-6 && std::abs(primal.x[1]) <= 1e-6 &&
      std::abs(dual.y[0] - 2.0) <= 1e-5;

  Vec x_star(2);
  x_star << 0.5, 0.0;
  const OptimalityReport rep = check_gauge_optimality(
      build_gauge_dual(p), x_star, Vec::Constant(1, 2.0));
  metric = fmt("nu_p = %.6f, nu_d = %.6f, closed-form max residual = %.1e",
               primal.nu, dual.nu, rep.max_residual());
  return solved_ok && rep.certified && rep.max_residual() <= 1e-8;
}

// ---------------------------------------------------------------------------
// 3. Perspective-polar closed forms against the epigraph-gauge oracle.
// ---------------------------------------------------------------------------

bool check_polar_closed_forms(std::string& metric) {
  Timer timer;
  Rng rng(303);
  int mismatches = 0;
  int samples = 0;
  double worst = 0.0;
  for (const PerspectiveFn& f : closed_form_kinds()) {
    for (int trial = 0; trial < 500; ++trial) {
      const Vec z = random_vec(rng, f.dim, 2.0);
      const double t = trial % 10 == 0 ? 0.0 : 3.0 * rng.uniform01();
      const double oracle = epigraph_gauge_oracle(f, z, t);
      const double closed = perspective_polar_eval(f, z, -t);
      ++samples;
      if (!std::isfinite(oracle) || !std::isfinite(closed)) {
        if (oracle != closed) ++mismatches;
        continue;
      }
      const double err = std::abs(closed - oracle) / (1.0 + std::abs(closed));
      worst = std::max(worst, err);
      if (err > 1e-6) ++mismatches;
    }
  }
  const double elapsed = timer.seconds();
  metric = fmt("%d samples, %d mismatches, worst rel err = %.2e, %.1f s",
               samples, mismatches, worst, elapsed);
  return mismatches == 0 && elapsed < 30.0;
}

// ---------------------------------------------------------------------------
// 4. Level-set membership versus the direct threshold.
// ---------------------------------------------------------------------------

bool check_level_set_equivalence(std::string& metric) {
  Rng rng(404);
  const auto kinds = closed_form_kinds();
  int disagreements = 0;
  int members = 0, non_members = 0, banded = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const PerspectiveFn& f = kinds[trial % kinds.size()];
    const Vec z = random_vec(rng, f.dim, 2.0);
    const double xi = -2.0 * rng.uniform01();
    const double sharp = perspective_polar_eval(f, z, xi);
    double mu;
    if (trial % 2 == 0 && std::isfinite(sharp))
      mu = sharp * (0.7 + 0.6 * rng.uniform01());
    else
      mu = 2.0 * rng.uniform01();

    const bool direct = std::isfinite(sharp) && sharp <= mu;
    const bool member = level_set_membership(f, z, xi, mu, 1e-8);
    // Boundary band: 1e4 * bisect_tol on the threshold comparison.
    if (std::isfinite(sharp) && std::abs(sharp - mu) <= 1e-6 * (1.0 + mu)) {
      ++banded;
      continue;
    }
    if (member != direct) ++disagreements;
    direct ? ++members : ++non_members;
  }
  metric = fmt("%d member / %d non-member / %d in band, %d disagreements",
               members, non_members, banded, disagreements);
  return disagreements == 0 && members > 200 && non_members > 200;
}

// ---------------------------------------------------------------------------
// 5. Dual witness as the slope of the perturbed reciprocal value.
// ---------------------------------------------------------------------------

bool check_sensitivity(std::string& metric) {
  Timer timer;
  Rng rng(505);
  int tested = 0, skipped = 0;
  double worst = 0.0;
  bool ok = true;
  while (tested < 10 && skipped < 20) {
    const int m = 3 + static_cast<int>(rng.uniform_below(3));
    const int n = 6 + static_cast<int>(rng.uniform_below(5));
    const ProblemSpec p = random_l1_l2_instance(rng, m, n);

    CpConfig cfg;
    cfg.stop_tol = 1e-10;
    cfg.max_iters = 300000;
    const DualSolveResult dual = solve_dual_cp(p, cfg);
    ToleranceConfig tol;
    tol.opt_tol = 1e-5;
    const RecoveryResult rec = recover_primal_gauge(p, dual.y, tol);
    if (dual.cp.status != SolveStatus::Converged || !rec.certified()) {
      ++skipped;  // only certified witnesses are trustworthy references
      continue;
    }
    ++tested;

    for (int k = 0; k < 5; ++k) {
      Vec u = random_vec(rng, m);
      u /= u.norm();
      const double h = 1e-4;
      const double vp = perturbed_primal_value(p, u, h);
      const double vm = perturbed_primal_value(p, u, -h);
      if (!std::isfinite(vp) || !std::isfinite(vm)) {
        ok = false;
        continue;
      }
      const double slope = (-1.0 / vp + 1.0 / vm) / (2.0 * h);
      const double expected = dual.y.dot(u);
      const double err =
          std::abs(slope - expected) / (1.0 + std::abs(expected));
      worst = std::max(worst, err);
      if (err > 1e-3) ok = false;
    }
  }
  metric = fmt("%d instances (%d draws skipped), worst rel err = %.2e, %.1f s",
               tested, skipped, worst, timer.seconds());
  return ok && tested == 10;
}

// ---------------------------------------------------------------------------
// 6. Rescaled multiplier block certifies as primal optimal.
// ---------------------------------------------------------------------------

bool check_lagrange_rescaling(std::string& metric) {
  Rng rng(606);
  double worst = 0.0;
  int failures = 0;
  for (int inst = 0; inst < 10; ++inst) {
    const int m = 3 + static_cast<int>(rng.uniform_below(4));
    const int n = 6 + static_cast<int>(rng.uniform_below(9));
    const ProblemSpec p = random_l1_l2_instance(rng, m, n);

    CpConfig cfg;
    cfg.stop_tol = 1e-10;
    cfg.max_iters = 400000;
    const DualSolveResult dual = solve_dual_cp(p, cfg);
    if (dual.cp.status != SolveStatus::Converged || dual.nu <= 0.0) {
      ++failures;
      continue;
    }
    const Vec x_hat = recover_from_lagrange_dual(dual.multiplier, dual.nu);
    ToleranceConfig tol;
    tol.opt_tol = 1e-5;
    tol.feas_tol = 1e-6;
    const OptimalityReport rep =
        check_gauge_optimality(build_gauge_dual(p), x_hat, dual.y, tol);
    worst = std::max(worst, rep.max_residual());
    if (!rep.certified || rep.max_residual() > 1e-5) ++failures;
  }
  metric = fmt("10 instances, %d failures, worst residual = %.2e", failures,
               worst);
  return failures == 0;
}

// ---------------------------------------------------------------------------
// 7. Large two-sided benchmark: terminal support recovery on the dual side
//    and larger objective oscillation on the primal side.
// ---------------------------------------------------------------------------

double tail_oscillation(const std::vector<TraceRecord>& recs) {
  const std::size_t n = recs.size();
  if (n < 3) return 0.0;
  const std::size_t start = n - std::max<std::size_t>(n / 5, 2);
  double acc = 0.0;
  int cnt = 0;
  for (std::size_t i = start + 1; i < n; ++i) {
    acc += std::abs(recs[i].obj_dev - recs[i - 1].obj_dev);
    ++cnt;
  }
  return cnt > 0 ? acc / cnt : 0.0;
}

bool check_benchmark(std::string& metric) {
  Timer timer;
  ExperimentConfig cfg;
  cfg.instance.m = 120;
  cfg.instance.n = 512;
  cfg.instance.nnz = 20;
  cfg.instance.n_outliers = 5;
  cfg.instance.sigma = 0.2;
  cfg.instance.eta = 1.0;
  cfg.instance.rng_seed = 1;
  cfg.primal_cp.max_iters = 6000;
  cfg.dual_cp.max_iters = 6000;
  cfg.primal_cp.stop_tol = cfg.dual_cp.stop_tol = 1e-9;
  cfg.primal_csv.clear();
  cfg.dual_csv.clear();

  const ExperimentResult res = run_sparse_robust_experiment_once(cfg);
  const double elapsed = timer.seconds();
  if (res.dual.trace.records.empty() || res.primal.trace.records.empty()) {
    metric = "empty traces";
    return false;
  }
  const TraceRecord& last = res.dual.trace.records.back();
  const double primal_osc = tail_oscillation(res.primal.trace.records);
  const double dual_osc = tail_oscillation(res.dual.trace.records);

  // "Converged" here means the stop rule fired or the tail is flat.
  const auto& drecs = res.dual.trace.records;
  double tail_range = 0.0;
  {
    const std::size_t start = drecs.size() - std::max<std::size_t>(
                                                 drecs.size() / 5, 2);
    double lo = kInf, hi = -kInf;
    for (std::size_t i = start; i < drecs.size(); ++i) {
      lo = std::min(lo, drecs[i].obj_dev);
      hi = std::max(hi, drecs[i].obj_dev);
    }
    tail_range = hi - lo;
  }
  const bool dual_settled =
      res.dual.solve.status == SolveStatus::Converged || tail_range <= 1e-3;

  metric = fmt("dual: fz=%d fnz=%d infeas=%.1e status=%d; osc primal=%.2e "
               "dual=%.2e; %.0f s",
               last.false_zeros, last.false_nonzeros, last.infeas,
               static_cast<int>(res.dual.solve.status), primal_osc, dual_osc,
               elapsed);
  return last.false_zeros == 0 && last.false_nonzeros == 0 &&
         last.infeas <= 1e-4 && dual_settled && primal_osc > dual_osc &&
         elapsed <= 600.0;
}

// ---------------------------------------------------------------------------
// 8. Property suites.
// ---------------------------------------------------------------------------

std::vector<GaugeSpec> norm_like_kinds() {
  std::vector<GaugeSpec> kinds;
  kinds.push_back(GaugeSpec::l1(4));
  kinds.push_back(GaugeSpec::l2(4));
  kinds.push_back(GaugeSpec::linf(4));
  kinds.push_back(GaugeSpec::scaled(2.0, GaugeSpec::l1(4)));
  kinds.push_back(GaugeSpec::separable_sum({GaugeSpec::l1(2), GaugeSpec::l2(2)}));
  kinds.push_back(GaugeSpec::separable_max({GaugeSpec::l2(2), GaugeSpec::linf(2)}));
  return kinds;
}

bool suite_polar_inequality(Rng& rng) {
  for (const GaugeSpec& g : norm_like_kinds()) {
    const GaugeSpec polar = polar_of(g);
    for (int trial = 0; trial < 170; ++trial) {
      const Vec x = random_vec(rng, g.dim, 2.0);
      const Vec y = random_vec(rng, g.dim, 2.0);
      const double lhs = x.dot(y);
      const double rhs = gauge_eval(g, x) * gauge_eval(polar, y);
      if (lhs > rhs * (1.0 + 1e-9) + 1e-12) return false;
    }
  }
  return true;
}

bool suite_biconjugacy(Rng& rng) {
  for (const GaugeSpec& g : norm_like_kinds()) {
    const GaugeSpec gpp = polar_of(polar_of(g));
    for (int trial = 0; trial < 200; ++trial) {
      const Vec x = random_vec(rng, g.dim, 2.0);
      const double a = gauge_eval(g, x);
      const double b = gauge_eval(gpp, x);
      if (std::abs(a - b) > 1e-9 * (1.0 + a)) return false;
    }
  }
  return true;
}

bool suite_membership(Rng& rng) {
  for (const GaugeSpec& g : norm_like_kinds()) {
    for (int trial = 0; trial < 100; ++trial) {
      const Vec x = random_vec(rng, g.dim, 2.0);
      const double v = gauge_eval(g, x);
      if (v <= 0.0) continue;
      if (std::abs(gauge_eval(g, Vec(x / v)) - 1.0) > 1e-9) return false;
      const bool projectable = g.kind != GaugeKind::Sum && g.kind != GaugeKind::Max;
      if (projectable) {
        const Vec p = project_unit_ball(g, x, 1.0);
        if (gauge_eval(g, p) > 1.0 + 1e-8) return false;
        if (v <= 1.0 && (p - x).norm() > 1e-12) return false;
      }
    }
  }
  const std::vector<ConeSpec> cones = {ConeSpec::orthant(3),
                                       ConeSpec::second_order(3),
                                       ConeSpec::zero(3)};
  for (const ConeSpec& c : cones) {
    const ConeSpec polar = polar_cone(c);
    for (int trial = 0; trial < 100; ++trial) {
      const Vec x = random_vec(rng, 3, 2.0);
      const Vec p = project_cone(c, x);
      const Vec q = project_cone(polar, x);
      if (!in_cone(c, p)) return false;
      if ((project_cone(c, p) - p).norm() > 1e-10) return false;
      if (std::abs(p.dot(x - p)) > 1e-9) return false;
      if (p.dot(q) > 1e-9) return false;  // cone and polar pair nonpositively
    }
  }
  return true;
}

bool suite_moreau(Rng& rng) {
  const std::vector<GaugeSpec> kinds = {GaugeSpec::l1(5), GaugeSpec::l2(5),
                                        GaugeSpec::linf(4)};
  for (const GaugeSpec& g : kinds) {
    const GaugeSpec polar = polar_of(g);
    for (int trial = 0; trial < 100; ++trial) {
      const Vec x = random_vec(rng, g.dim, 2.0);
      const double alpha = 0.2 + 2.0 * rng.uniform01();
      const Vec p = prox_gauge(g, x, alpha);
      const Vec q = project_unit_ball(polar, Vec(x / alpha), 1.0);
      if ((p + alpha * q - x).lpNorm<Eigen::Infinity>() > 1e-10) return false;
    }
  }
  return true;
}

bool suite_projections(Rng& rng) {
  Vec b = random_vec(rng, 4);
  b *= 3.0 / b.norm();
  const double sigma = 0.5;
  for (int trial = 0; trial < 40; ++trial) {
    // Unit balls: idempotent and variationally optimal.
    for (const GaugeSpec& g :
         {GaugeSpec::l1(4), GaugeSpec::l2(4), GaugeSpec::linf(4)}) {
      const Vec x = random_vec(rng, 4, 3.0);
      const Vec p = project_unit_ball(g, x, 1.0);
      if ((project_unit_ball(g, p, 1.0) - p).norm() > 1e-9) return false;
      for (int k = 0; k < 10; ++k) {
        Vec u = random_vec(rng, 4);
        const double gu = gauge_eval(g, u);
        if (gu > 1.0) u /= gu;
        if ((x - p).dot(u - p) > 1e-7) return false;
      }
    }
    // Misfit sublevel set.
    const Vec target = random_vec(rng, 4, 2.0);
    const Vec z = random_vec(rng, 4, 3.0);
    const Vec hp = project_huber_level_set(target, 0.4, 1.0, z);
    if ((project_huber_level_set(target, 0.4, 1.0, hp) - hp).norm() > 1e-7)
      return false;
    // Dual halfspace-like set.
    const Vec y = random_vec(rng, 4, 2.0);
    const Vec dp = project_gauge_dual_l2_set(b, sigma, y);
    if ((project_gauge_dual_l2_set(b, sigma, dp) - dp).norm() > 1e-7)
      return false;
  }
  return true;
}

bool suite_huber_kkt(Rng& rng) {
  for (int trial = 0; trial < 60; ++trial) {
    const double eta = trial % 2 == 0 ? 1.0 : 0.5;
    const Vec b = random_vec(rng, 6, 2.0);
    const Vec z = random_vec(rng, 6, 3.0);
    const double sigma = 0.4;
    double level0 = 0.0;
    for (int i = 0; i < 6; ++i) level0 += huber_value(eta, b[i] - z[i]);
    if (level0 <= sigma) continue;
    const Vec p = project_huber_level_set(b, sigma, eta, z);
    double level = 0.0;
    for (int i = 0; i < 6; ++i) level += huber_value(eta, b[i] - p[i]);
    if (level > sigma + 1e-9 || level < sigma - 1e-6) return false;
    Vec grad(6);
    for (int i = 0; i < 6; ++i) grad[i] = huber_gradient(eta, b[i] - p[i]);
    double lambda = 0.0;
    for (int i = 0; i < 6; ++i)
      if (std::abs(grad[i]) > 1e-9) {
        lambda = (p[i] - z[i]) / grad[i];
        break;
      }
    if (lambda <= 0.0) return false;
    if (((p - z) - lambda * grad).lpNorm<Eigen::Infinity>() >
        1e-6 * (1.0 + lambda))
      return false;
  }
  return true;
}

bool suite_cone_form_equivalence(Rng& rng) {
  const int m = 3;
  Vec b = random_vec(rng, m, 2.0);
  b[0] += 3.0;
  const double sigma = 0.4;
  const PlqSpec plq = PlqSpec::huber_sum(1.0, m);
  const auto set = build_perspective_dual_feasible_set(b, sigma, plq);

  int evaluated = 0;
  for (int trial = 0; trial < 40000 && evaluated < 1000; ++trial) {
    Vec y = random_vec(rng, m, 1.5);
    const double xi = 4.0 * rng.uniform01();
    const double mu = 1.0 - b.dot(y) + sigma * xi;
    if (mu > 0.0 || xi <= 1e-9) continue;

    const Vec ly = plq.l_mat * y;
    double cone_margin = std::max(mu, -xi);
    cone_margin =
        std::max(cone_margin, (plq.w_mat * y - xi * plq.w_vec).maxCoeff());
    cone_margin = std::max(
        cone_margin,
        std::hypot(2.0 * ly.norm(), xi + 2.0 * mu) - (xi - 2.0 * mu));
    const bool cone_ok = cone_margin <= 0.0;

    const double persp = xi * plq_conjugate(plq, Vec(y / xi));
    const double slack = -mu - persp;
    const bool persp_ok = persp < kInf && slack >= 0.0;

    const double scale = 1.0 + std::abs(mu) + xi + y.lpNorm<Eigen::Infinity>();
    if ((persp < kInf && std::abs(slack) <= 1e-7 * scale) ||
        std::abs(cone_margin) <= 1e-7 * scale)
      continue;
    if (cone_ok != persp_ok) return false;
    if (set.contains(y, mu, xi, 1e-9) != cone_ok) return false;
    ++evaluated;
  }
  return evaluated >= 1000;
}

bool check_property_suites(std::string& metric) {
  Rng rng(808);
  struct Named {
    const char* name;
    bool ok;
  };
  const Named suites[] = {
      {"polar-inequality", suite_polar_inequality(rng)},
      {"biconjugacy", suite_biconjugacy(rng)},
      {"membership", suite_membership(rng)},
      {"moreau", suite_moreau(rng)},
      {"projections", suite_projections(rng)},
      {"huber-kkt", suite_huber_kkt(rng)},
      {"cone-form", suite_cone_form_equivalence(rng)},
  };
  std::string failed;
  for (const Named& s : suites)
    if (!s.ok) failed += std::string(" ") + s.name;
  metric = failed.empty() ? "7 suites clean" : "failing:" + failed;
  return failed.empty();
}

}  // namespace

int main() {
  struct Check {
    const char* label;
    bool (*fn)(std::string&);
  };
  const Check checks[] = {
      {"strong duality product", check_duality_product},
      {"analytic instance", check_analytic_instance},
      {"perspective-polar closed forms", check_polar_closed_forms},
      {"level-set equivalence", check_level_set_equivalence},
      {"sensitivity gradient", check_sensitivity},
      {"multiplier rescaling", check_lagrange_rescaling},
      {"large benchmark", check_benchmark},
      {"property suites", check_property_suites},
  };

  int passed = 0;
  int index = 0;
  for (const Check& c : checks) {
    ++index;
    std::string metric;
    bool ok = false;
    try {
      ok = c.fn(metric);
    } catch (const std::exception& e) {
      metric = std::string("exception: ") + e.what();
    }
    std::printf("criterion %d (%s): %s (%s)\n", index, c.label,
                ok ? "PASS" : "FAIL", metric.c_str());
    std::fflush(stdout);
    if (ok) ++passed;
  }
  std::printf("%d/8 criteria passed\n", passed);
  return passed == 8 ? 0 : 1;
}
