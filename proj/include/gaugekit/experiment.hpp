// gaugekit: gauge and perspective duality toolkit
// Licensed under the Apache License, Version 2.0

#pragma once

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "gaugekit/duality.hpp"
#include "gaugekit/model.hpp"
#include "gaugekit/pipelines.hpp"
#include "gaugekit/recovery.hpp"
#include "gaugekit/solvers.hpp"
#include "gaugekit/version.hpp"

namespace gaugekit {

// ---------------------------------------------------------------------------
// Sparse robust regression benchmark: one-norm objective, Huber misfit.
// The same instance is attacked from both sides: a direct primal-dual run,
// and a run on the dual whose multiplier block is rescaled into a primal
// point at every iterate. Traces record objective deviation, infeasibility,
// and support errors against the planted signal.
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  InstanceSeedSpec instance;
  CpConfig primal_cp{.max_iters = 3000, .stop_tol = 1e-9, .trace_every = 1};
  CpConfig dual_cp{.max_iters = 3000, .stop_tol = 1e-9, .trace_every = 1};
  std::string primal_csv;  ///< empty disables the file
  std::string dual_csv;
  int repeat = 1;
  double support_tol = 1e-4;  ///< spike detection threshold, relative

  void validate() const {
    instance.validate();
    require_param(repeat >= 1, "experiment: repeat must be >= 1");
    require_param(support_tol > 0.0, "experiment: support_tol must be > 0");
  }
};

struct ExperimentSideResult {
  CpResult solve;
  SolverTrace trace;
  Vec x_final;         ///< primal-comparable point
  double nu_estimate = 0.0;
};

struct ExperimentResult {
  GeneratedInstance instance;
  ExperimentSideResult primal;
  ExperimentSideResult dual;
  double duality_product = 0.0;
};

/// Ordered key=value pairs emitted as `# key=value` comment lines ahead of
/// the CSV header.
using TraceMeta = std::vector<std::pair<std::string, std::string>>;

inline std::string meta_num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

/// Writes one solver trace. Columns are fixed; wall_ms is the only field
/// that may differ between runs of the same seed.
inline void write_trace_csv(const std::string& path, const SolverTrace& trace,
                            const TraceMeta& meta) {
  std::ofstream out(path);
  require_param(static_cast<bool>(out), "trace: cannot write " + path);
  out << std::setprecision(17);
  out << "# tool=gaugekit\n";
  out << "# version=" << kVersion << "\n";
  for (const auto& [key, value] : meta) out << "# " << key << '=' << value << '\n';
  out << "iter,objective,obj_dev,infeas,false_zeros,false_nonzeros,wall_ms\n";
  for (const auto& r : trace.records) {
    out << r.iter << ',' << r.objective << ',' << r.obj_dev << ','
        << r.infeas << ',' << r.false_zeros << ',' << r.false_nonzeros << ','
        << r.wall_ms << '\n';
  }
}

namespace detail {

inline TraceMeta experiment_meta(const ExperimentConfig& cfg, const char* side,
                                 double alpha_x, double alpha_y) {
  const CpConfig& cp =
      std::string(side) == "primal" ? cfg.primal_cp : cfg.dual_cp;
  return TraceMeta{
      {"side", side},
      {"algorithm", "chambolle-pock"},
      {"rng", kRngAlgorithm},
      {"seed", std::to_string(cfg.instance.rng_seed)},
      {"m", std::to_string(cfg.instance.m)},
      {"n", std::to_string(cfg.instance.n)},
      {"nnz", std::to_string(cfg.instance.nnz)},
      {"n_outliers", std::to_string(cfg.instance.n_outliers)},
      {"sigma", meta_num(cfg.instance.sigma)},
      {"eta", meta_num(cfg.instance.eta)},
      {"alpha_x", meta_num(alpha_x)},
      {"alpha_y", meta_num(alpha_y)},
      {"max_iters", std::to_string(cp.max_iters)},
      {"stop_tol", meta_num(cp.stop_tol)},
      {"trace_every", std::to_string(cp.trace_every)},
      {"support_tol", meta_num(cfg.support_tol)},
  };
}

inline TraceRecord make_trace_record(int iter, const Vec& x,
                                     const ProblemSpec& p, const Vec& x_true,
                                     double eta, double support_tol,
                                     double wall_ms) {
  TraceRecord rec;
  rec.iter = iter;
  rec.objective = x.lpNorm<1>();
  const double true_obj = x_true.lpNorm<1>();
  rec.obj_dev = true_obj > 0.0
                    ? std::abs(rec.objective - true_obj) / true_obj
                    : rec.objective;
  const Vec r = p.b - p.a.apply(x);
  double misfit = 0.0;
  for (int i = 0; i < r.size(); ++i) misfit += huber_value(eta, r[i]);
  rec.infeas = std::max(misfit - p.sigma, 0.0);
  const double tau = support_tol * x_true.lpNorm<Eigen::Infinity>();
  for (int i = 0; i < x.size(); ++i) {
    const bool planted = x_true[i] != 0.0;
    const bool detected = std::abs(x[i]) > tau;
    if (planted && !detected) ++rec.false_zeros;
    if (!planted && detected) ++rec.false_nonzeros;
  }
  rec.wall_ms = wall_ms;
  return rec;
}

inline double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace detail

/// Direct run: x-updates are one-norm shrinkage, y-updates project onto the
/// Huber sublevel set through the Moreau identity.
inline ExperimentSideResult run_primal_side(const ProblemSpec& p,
                                            const Vec& x_true,
                                            const ExperimentConfig& cfg) {
  const double eta = cfg.instance.eta;
  ExperimentSideResult side;
  const auto start = std::chrono::steady_clock::now();
  const IterCallback cb = [&](int it, const Vec& x, const Vec&) {
    side.trace.records.push_back(detail::make_trace_record(
        it, x, p, x_true, eta, cfg.support_tol, detail::elapsed_ms(start)));
  };
  const PrimalSolveResult r = solve_primal_cp(p, cfg.primal_cp, cb);
  side.solve = r.cp;
  side.x_final = r.x;
  side.nu_estimate = r.nu;
  return side;
}

/// Dual-side run: the iterate lives in (y, mu, xi) and is projected onto the
/// second-order-cone form of the dual feasible set; the multiplier block is
/// rescaled by the running dual objective into a primal point at every
/// iterate.
inline ExperimentSideResult run_dual_side(const ProblemSpec& p,
                                          const Vec& x_true,
                                          const ExperimentConfig& cfg) {
  const double eta = cfg.instance.eta;
  const int m = static_cast<int>(p.b.size());

  const auto rescale = [&](const Vec& v, const Vec& z) {
    const double nu = p.a.apply_adjoint(v.head(m)).lpNorm<Eigen::Infinity>();
    return Vec(z / std::max(nu, 1e-12));
  };

  ExperimentSideResult side;
  const auto start = std::chrono::steady_clock::now();
  const IterCallback cb = [&](int it, const Vec& v, const Vec& z) {
    side.trace.records.push_back(detail::make_trace_record(
        it, rescale(v, z), p, x_true, eta, cfg.support_tol,
        detail::elapsed_ms(start)));
  };
  const DualSolveResult r = solve_dual_cp(p, cfg.dual_cp, cb);
  side.solve = r.cp;
  side.x_final = rescale(r.cp.x, r.multiplier);
  side.nu_estimate = r.nu;
  return side;
}

inline ExperimentResult run_sparse_robust_experiment_once(
    const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult res;
  res.instance = generate_sparse_robust_instance(cfg.instance);
  const ProblemSpec& p = res.instance.problem;
  res.primal = run_primal_side(p, res.instance.true_signal, cfg);
  res.dual = run_dual_side(p, res.instance.true_signal, cfg);
  res.duality_product = res.primal.nu_estimate * res.dual.nu_estimate;

  if (!cfg.primal_csv.empty()) {
    const auto [ax, ay] = cfg.primal_cp.resolve_steps(p.a.operator_norm());
    write_trace_csv(cfg.primal_csv, res.primal.trace,
                    detail::experiment_meta(cfg, "primal", ax, ay));
  }
  if (!cfg.dual_csv.empty()) {
    const auto [ax, ay] = cfg.dual_cp.resolve_steps(p.a.operator_norm());
    write_trace_csv(cfg.dual_csv, res.dual.trace,
                    detail::experiment_meta(cfg, "dual", ax, ay));
  }
  return res;
}

namespace detail {

/// Every repeat gets its own suffix so runs stay comparable side by side.
inline std::string repeat_path(const std::string& base, int rep) {
  if (base.empty()) return base;
  const auto dot = base.rfind('.');
  const std::string stem = dot == std::string::npos ? base : base.substr(0, dot);
  const std::string ext = dot == std::string::npos ? "" : base.substr(dot);
  return stem + ".rep" + std::to_string(rep) + ext;
}

inline int worker_cap() {
  if (const char* env = std::getenv("GAUGEKIT_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace detail

/// Runs the configured number of repeats (same seed, so identical traces up
/// to wall clock), in parallel workers capped by GAUGEKIT_THREADS. Returns
/// the first repeat's result.
inline ExperimentResult run_sparse_robust_experiment(
    const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.repeat == 1) return run_sparse_robust_experiment_once(cfg);

  std::vector<ExperimentConfig> configs(static_cast<std::size_t>(cfg.repeat),
                                        cfg);
  for (int r = 0; r < cfg.repeat; ++r) {
    configs[r].repeat = 1;
    configs[r].primal_csv = detail::repeat_path(cfg.primal_csv, r);
    configs[r].dual_csv = detail::repeat_path(cfg.dual_csv, r);
  }

  std::vector<ExperimentResult> results(static_cast<std::size_t>(cfg.repeat));
  std::vector<std::string> errors(static_cast<std::size_t>(cfg.repeat));
  const int cap = detail::worker_cap();
  int next = 0;
  while (next < cfg.repeat) {
    const int batch = std::min(cap, cfg.repeat - next);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(batch));
    for (int t = 0; t < batch; ++t) {
      const int r = next + t;
      pool.emplace_back([&, r] {
        try {
          results[r] = run_sparse_robust_experiment_once(configs[r]);
        } catch (const std::exception& e) {
          errors[r] = e.what();
        }
      });
    }
    for (auto& th : pool) th.join();
    next += batch;
  }
  for (const auto& e : errors)
    if (!e.empty()) throw Error("experiment repeat failed: " + e);
  return std::move(results.front());
}

}  // namespace gaugekit
