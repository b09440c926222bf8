// gaugekit: gauge and perspective duality toolkit
// Licensed under the Apache License, Version 2.0

#pragma once

#include <string>
#include <utility>

#include "gaugekit/dense_map.hpp"
#include "gaugekit/errors.hpp"
#include "gaugekit/gauges.hpp"
#include "gaugekit/perspective.hpp"
#include "gaugekit/rng.hpp"
#include "gaugekit/tolerances.hpp"

namespace gaugekit {

/// Either a gauge or a general nonnegative convex function; problems carry
/// one of these for the objective and one for the constraint so that the
/// gauge-only and general dualization paths share one problem type.
struct FnSpec {
  enum class Which { Gauge, Perspective };

  Which which = Which::Gauge;
  GaugeSpec gauge;
  PerspectiveFn fn;

  static FnSpec of_gauge(GaugeSpec g) {
    FnSpec s;
    s.which = Which::Gauge;
    s.gauge = std::move(g);
    return s;
  }

  static FnSpec of_perspective(PerspectiveFn f) {
    FnSpec s;
    s.which = Which::Perspective;
    s.fn = std::move(f);
    return s;
  }

  bool is_gauge() const { return which == Which::Gauge; }

  int dim() const { return is_gauge() ? gauge.dim : fn.dim; }

  double value(const Vec& x) const {
    return is_gauge() ? gauge_eval(gauge, x) : fn_eval(fn, x);
  }

  /// The function viewed as a PerspectiveFn (gauges wrap losslessly).
  PerspectiveFn as_perspective() const {
    return is_gauge() ? PerspectiveFn::gauge_wrap(gauge) : fn;
  }
};

/// Primal problem data: minimize objective(x) subject to
/// constraint(b - A x) <= sigma.
struct ProblemSpec {
  DenseMap a;
  Vec b;
  double sigma = 0.0;
  FnSpec objective;
  FnSpec constraint;

  void check_shapes() const {
    require_param(sigma >= 0.0, "problem: sigma must be nonnegative");
    require_dim(b.size() == a.rows(), "problem: b must have m entries");
    require_dim(objective.dim() == a.cols(),
                "problem: objective dimension must match columns of A");
    require_dim(constraint.dim() == a.rows(),
                "problem: constraint dimension must match rows of A");
  }

  double constraint_at_b() const { return constraint.value(b); }

  /// The standing assumption for dualization: the zero solution must be
  /// infeasible, i.e. constraint(b) > sigma.
  bool is_valid() const { return constraint_at_b() > sigma; }

  std::string invalid_reason() const {
    if (is_valid()) return {};
    return "constraint(b) <= sigma: the origin is already feasible, so the "
           "problem has trivial value 0 and no meaningful dual";
  }
};

/// Deterministic generator input for the sparse robust regression family.
struct InstanceSeedSpec {
  int m = 120;
  int n = 512;
  int nnz = 20;
  int n_outliers = 5;
  double sigma = 0.2;
  double eta = 1.0;
  std::uint64_t rng_seed = 0;

  void validate() const {
    require_param(m >= 1 && n >= 1, "instance: m and n must be positive");
    require_param(nnz >= 0 && nnz <= n, "instance: need 0 <= nnz <= n");
    require_param(n_outliers >= 0 && n_outliers <= m,
                  "instance: need 0 <= n_outliers <= m");
    require_param(sigma >= 0.0, "instance: sigma must be nonnegative");
    require_param(eta > 0.0, "instance: eta must be positive");
  }
};

struct GeneratedInstance {
  ProblemSpec problem;
  Vec true_signal;
};

/// Sparse spike-train recovery with gross outliers: minimize ||x||_1 subject
/// to a Huber misfit on b - Ax. The draw order is fixed (matrix entries
/// row-major, then spike support, spike signs, dense noise, outlier
/// positions, outlier signs) so instances are a pure function of the seed.
inline GeneratedInstance generate_sparse_robust_instance(
    const InstanceSeedSpec& spec) {
  spec.validate();
  Rng rng(spec.rng_seed);

  Mat a(spec.m, spec.n);
  const double col_scale = 1.0 / std::sqrt(static_cast<double>(spec.m));
  for (int i = 0; i < spec.m; ++i)
    for (int j = 0; j < spec.n; ++j) a(i, j) = rng.normal() * col_scale;

  Vec x_true = Vec::Zero(spec.n);
  const auto support = rng.distinct_indices(spec.nnz, spec.n);
  for (const int j : support) x_true[j] = rng.sign();

  Vec noise(spec.m);
  const double noise_std = 0.1 * spec.sigma;
  for (int i = 0; i < spec.m; ++i) noise[i] = rng.normal() * noise_std;
  const auto outliers = rng.distinct_indices(spec.n_outliers, spec.m);
  for (const int i : outliers) noise[i] = 5.0 * rng.sign();

  ProblemSpec problem;
  problem.a = DenseMap(std::move(a));
  problem.b = problem.a.apply(x_true) + noise;
  problem.sigma = spec.sigma;
  problem.objective = FnSpec::of_gauge(GaugeSpec::l1(spec.n));
  problem.constraint =
      FnSpec::of_perspective(PerspectiveFn::huber_sum(spec.eta, spec.m));
  problem.check_shapes();

  return {std::move(problem), std::move(x_true)};
}

}  // namespace gaugekit
