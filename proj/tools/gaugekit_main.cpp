// gaugekit: gauge and perspective duality toolkit
// Licensed under the Apache License, Version 2.0

#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "gaugekit/duality.hpp"
#include "gaugekit/experiment.hpp"
#include "gaugekit/model.hpp"
#include "gaugekit/pipelines.hpp"
#include "gaugekit/recovery.hpp"
#include "gaugekit/serialize.hpp"
#include "gaugekit/solvers.hpp"
#include "gaugekit/version.hpp"

namespace {

using namespace gaugekit;

constexpr int kExitOk = 0;
constexpr int kExitNotCertified = 2;
constexpr int kExitDiverged = 3;

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIters: return "max-iters";
    case SolveStatus::Diverged: return "diverged";
  }
  return "unknown";
}

/// Arguments that look like JSON are parsed inline; anything else is a path.
Json parse_json_arg(const std::string& arg) {
  if (!arg.empty() && (arg.front() == '{' || arg.front() == '[')) {
    try {
      return Json::parse(arg);
    } catch (const Json::exception& e) {
      throw ParameterError(std::string("inline JSON: ") + e.what());
    }
  }
  return load_json_file(arg);
}

Vec vec_from_any(const Json& j, const std::string& what) {
  if (j.is_array()) return vec_from_json(j, what);
  if (j.is_object()) {
    for (const char* key : {"values", "x", "y"})
      if (j.contains(key)) return vec_from_json(j.at(key), what);
  }
  throw ParameterError(what + ": expected an array or a \"values\" field");
}

void emit(const Json& j, const std::string& out_path) {
  if (out_path.empty())
    std::cout << j.dump(2) << '\n';
  else
    save_json_file(out_path, j);
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

struct GenerateOpts {
  InstanceSeedSpec seed;
  std::string out;
  std::string signal_out;
};

int run_generate(const GenerateOpts& o) {
  const GeneratedInstance inst = generate_sparse_robust_instance(o.seed);
  emit(problem_to_json(inst.problem), o.out);
  if (!o.signal_out.empty()) {
    Json j;
    j["x"] = vec_to_json(inst.true_signal);
    save_json_file(o.signal_out, j);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// dualize
// ---------------------------------------------------------------------------

struct DualizeOpts {
  std::string problem;
  std::string mode = "auto";
  std::string out;
};

int run_dualize(const DualizeOpts& o) {
  const ProblemSpec p = load_problem_file(o.problem);
  const bool gauge_mode =
      o.mode == "gauge" ||
      (o.mode == "auto" && p.objective.is_gauge() && p.constraint.is_gauge());
  if (gauge_mode) {
    emit(gauge_dual_to_json(build_gauge_dual(p)), o.out);
  } else {
    emit(perspective_dual_to_json(build_perspective_dual(p)), o.out);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

struct SolveOpts {
  std::string problem;
  std::string side = "primal";
  int iters = 5000;
  std::uint64_t seed = 0;
  std::string trace;
  std::string out;
  std::string signal;
  double stop_tol = 1e-9;
  int trace_every = 1;
  double support_tol = 1e-4;
  double alpha_x = 0.0;
  double alpha_y = 0.0;
};

TraceRecord make_record(int iter, const Vec& x, const ProblemSpec& p,
                        const Vec& x_true, double support_tol,
                        double wall_ms) {
  TraceRecord rec;
  rec.iter = iter;
  rec.objective = p.objective.value(x);
  const double true_obj = p.objective.value(x_true);
  rec.obj_dev = true_obj > 0.0
                    ? std::abs(rec.objective - true_obj) / true_obj
                    : rec.objective;
  const Vec r = p.b - p.a.apply(x);
  rec.infeas = std::max(p.constraint.value(r) - p.sigma, 0.0);
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

int run_solve(const SolveOpts& o) {
  const ProblemSpec p = load_problem_file(o.problem);
  const int m = static_cast<int>(p.a.rows());
  const int n = static_cast<int>(p.a.cols());
  const Vec x_true =
      o.signal.empty() ? Vec(Vec::Zero(n)) : load_vector_file(o.signal);
  require_dim(x_true.size() == n, "solve: signal length must equal n");

  CpConfig cfg;
  cfg.alpha_x = o.alpha_x;
  cfg.alpha_y = o.alpha_y;
  cfg.max_iters = o.iters;
  cfg.stop_tol = o.stop_tol;
  cfg.trace_every = o.trace_every;

  const bool primal_side = o.side == "primal";
  SolverTrace trace;
  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&start] {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start)
        .count();
  };

  Json j;
  SolveStatus status;
  double alpha_x_used = 0.0, alpha_y_used = 0.0;
  if (primal_side) {
    const IterCallback cb = [&](int it, const Vec& x, const Vec&) {
      trace.records.push_back(
          make_record(it, x, p, x_true, o.support_tol, elapsed()));
    };
    const PrimalSolveResult r = solve_primal_cp(p, cfg, cb);
    status = r.cp.status;
    j["side"] = "primal";
    j["status"] = status_name(status);
    j["iters"] = r.cp.iters;
    j["nu"] = encode_extended(r.nu);
    j["x"] = vec_to_json(r.x);
    j["multiplier"] = vec_to_json(r.multiplier);
  } else {
    const auto rescale = [&](const Vec& v, const Vec& z) {
      const double nu = p.a.apply_adjoint(v.head(m)).lpNorm<Eigen::Infinity>();
      return Vec(z / std::max(nu, 1e-12));
    };
    const IterCallback cb = [&](int it, const Vec& v, const Vec& z) {
      trace.records.push_back(make_record(it, rescale(v, z), p, x_true,
                                          o.support_tol, elapsed()));
    };
    const DualSolveResult r = solve_dual_cp(p, cfg, cb);
    status = r.cp.status;
    j["side"] = "perspective-dual";
    j["status"] = status_name(status);
    j["iters"] = r.cp.iters;
    j["nu"] = encode_extended(r.nu);
    j["y"] = vec_to_json(r.y);
    j["mu"] = r.mu;
    j["xi"] = r.xi;
    j["multiplier"] = vec_to_json(r.multiplier);
    j["socp_form"] = r.socp_form;
    if (r.nu > 1e-12 && std::isfinite(r.nu))
      j["x_hat"] = vec_to_json(recover_from_lagrange_dual(r.multiplier, r.nu));
  }

  if (!o.trace.empty()) {
    const auto [ax, ay] = cfg.resolve_steps(p.a.operator_norm());
    alpha_x_used = ax;
    alpha_y_used = ay;
    TraceMeta meta{
        {"side", primal_side ? "primal" : "perspective-dual"},
        {"algorithm", "chambolle-pock"},
        {"rng", kRngAlgorithm},
        {"seed", std::to_string(o.seed)},
        {"m", std::to_string(m)},
        {"n", std::to_string(n)},
        {"sigma", meta_num(p.sigma)},
        {"alpha_x", meta_num(alpha_x_used)},
        {"alpha_y", meta_num(alpha_y_used)},
        {"max_iters", std::to_string(cfg.max_iters)},
        {"stop_tol", meta_num(cfg.stop_tol)},
        {"trace_every", std::to_string(cfg.trace_every)},
        {"support_tol", meta_num(o.support_tol)},
    };
    write_trace_csv(o.trace, trace, meta);
  }

  emit(j, o.out);
  return status == SolveStatus::Diverged ? kExitDiverged : kExitOk;
}

// ---------------------------------------------------------------------------
// certify
// ---------------------------------------------------------------------------

struct CertifyOpts {
  std::string problem;
  std::string x_path;
  std::string y_path;
  double alpha = 0.0;
  double mu = 0.0;
  std::string mode = "auto";
  double opt_tol = 1e-6;
  double feas_tol = 1e-8;
  std::string out;
};

int run_certify(const CertifyOpts& o) {
  const ProblemSpec p = load_problem_file(o.problem);
  const Vec x = load_vector_file(o.x_path);
  const Vec y = load_vector_file(o.y_path);
  ToleranceConfig tol;
  tol.opt_tol = o.opt_tol;
  tol.feas_tol = o.feas_tol;

  const bool gauge_mode =
      o.mode == "gauge" ||
      (o.mode == "auto" && p.objective.is_gauge() && p.constraint.is_gauge());
  OptimalityReport report;
  if (gauge_mode) {
    report = check_gauge_optimality(build_gauge_dual(p), x, y, tol);
  } else {
    report = check_perspective_optimality(build_perspective_dual(p), x, y,
                                          o.alpha, o.mu, tol);
  }
  emit(report_to_json(report), o.out);
  return report.certified ? kExitOk : kExitNotCertified;
}

// ---------------------------------------------------------------------------
// recover
// ---------------------------------------------------------------------------

struct RecoverOpts {
  std::string problem;
  std::string dual_path;
  std::optional<double> alpha;
  std::optional<double> mu;
  std::string method = "auto";
  std::string z_path;
  double nu = 0.0;
  double support_tol = 1e-5;
  std::string out;
};

int run_recover(const RecoverOpts& o) {
  const ProblemSpec p = load_problem_file(o.problem);
  const Json dual_json = parse_json_arg(o.dual_path);
  const Vec y = vec_from_any(dual_json, "dual witness");
  double alpha = 0.0, mu = 0.0;
  if (dual_json.is_object()) {
    if (dual_json.contains("alpha")) alpha = dual_json.at("alpha").get<double>();
    if (dual_json.contains("mu")) mu = dual_json.at("mu").get<double>();
  }
  if (o.alpha) alpha = *o.alpha;
  if (o.mu) mu = *o.mu;

  const ToleranceConfig tol;
  RecoveryResult res;
  if (o.method == "lagrange") {
    require_param(!o.z_path.empty(),
                  "recover: --method lagrange needs --z (multiplier vector)");
    require_param(o.nu > 0.0, "recover: --method lagrange needs --nu > 0");
    const Vec z = load_vector_file(o.z_path);
    res.x = recover_from_lagrange_dual(z, o.nu);
    if (p.constraint.is_gauge())
      res.report = check_gauge_optimality(build_gauge_dual(p), res.x, y, tol);
    else
      res.report = check_perspective_optimality(build_perspective_dual(p),
                                                res.x, y, alpha, mu, tol);
  } else if (p.constraint.is_gauge() && p.objective.is_gauge()) {
    res = recover_primal_gauge(p, y, tol, o.support_tol);
  } else {
    res = recover_primal_perspective(p, y, alpha, mu, tol, o.support_tol);
  }

  emit(recovery_to_json(res), o.out);
  return res.certified() ? kExitOk : kExitNotCertified;
}

// ---------------------------------------------------------------------------
// transform
// ---------------------------------------------------------------------------

struct TransformOpts {
  std::string fn_arg;
  std::string point_arg;
  std::string which = "eval";
  double xi = 0.0;
  double lambda = 1.0;
  double bisect_tol = 1e-10;
};

int run_transform(const TransformOpts& o) {
  const FnSpec f = fn_spec_from_json(parse_json_arg(o.fn_arg));
  const Vec x = vec_from_any(parse_json_arg(o.point_arg), "transform point");

  double v = 0.0;
  if (o.which == "eval") {
    v = f.value(x);
  } else if (o.which == "conjugate") {
    v = conjugate_eval(f.as_perspective(), x);
  } else if (o.which == "perspective") {
    v = perspective_eval(f.as_perspective(), x, o.lambda);
  } else {
    v = perspective_polar_eval(f.as_perspective(), x, o.xi, o.bisect_tol);
  }
  std::cout << encode_extended(v).dump() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// experiment
// ---------------------------------------------------------------------------

struct ExperimentOpts {
  InstanceSeedSpec inst;
  int primal_iters = 3000;
  int dual_iters = 3000;
  double stop_tol = 1e-9;
  int trace_every = 1;
  std::string primal_csv = "primal.csv";
  std::string dual_csv = "dual.csv";
  int repeat = 1;
  double support_tol = 1e-4;
};

Json side_summary(const ExperimentSideResult& side) {
  Json j;
  j["status"] = status_name(side.solve.status);
  j["iters"] = side.solve.iters;
  j["nu"] = encode_extended(side.nu_estimate);
  if (!side.trace.records.empty()) {
    const TraceRecord& last = side.trace.records.back();
    j["final_obj_dev"] = last.obj_dev;
    j["final_infeas"] = last.infeas;
    j["final_false_zeros"] = last.false_zeros;
    j["final_false_nonzeros"] = last.false_nonzeros;
  }
  return j;
}

int run_experiment(const ExperimentOpts& o) {
  ExperimentConfig cfg;
  cfg.instance = o.inst;
  cfg.primal_cp.max_iters = o.primal_iters;
  cfg.dual_cp.max_iters = o.dual_iters;
  cfg.primal_cp.stop_tol = cfg.dual_cp.stop_tol = o.stop_tol;
  cfg.primal_cp.trace_every = cfg.dual_cp.trace_every = o.trace_every;
  cfg.primal_csv = o.primal_csv;
  cfg.dual_csv = o.dual_csv;
  cfg.repeat = o.repeat;
  cfg.support_tol = o.support_tol;

  const ExperimentResult res = run_sparse_robust_experiment(cfg);

  Json j;
  j["m"] = o.inst.m;
  j["n"] = o.inst.n;
  j["seed"] = o.inst.rng_seed;
  j["duality_product"] = encode_extended(res.duality_product);
  j["primal"] = side_summary(res.primal);
  j["dual"] = side_summary(res.dual);
  std::cout << j.dump(2) << '\n';

  const bool diverged = res.primal.solve.status == SolveStatus::Diverged ||
                        res.dual.solve.status == SolveStatus::Diverged;
  return diverged ? kExitDiverged : kExitOk;
}

void add_instance_options(CLI::App* cmd, InstanceSeedSpec& s) {
  cmd->add_option("--m", s.m, "measurement count");
  cmd->add_option("--n", s.n, "signal length");
  cmd->add_option("--nnz", s.nnz, "planted spike count");
  cmd->add_option("--outliers", s.n_outliers, "gross outlier count");
  cmd->add_option("--sigma", s.sigma, "misfit budget");
  cmd->add_option("--eta", s.eta, "Huber threshold");
  cmd->add_option("--seed", s.rng_seed, "RNG seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gauge and perspective duality toolkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  int rc = kExitOk;

  GenerateOpts gen;
  CLI::App* cmd_gen = app.add_subcommand(
      "generate", "emit a sparse robust regression instance as problem JSON");
  add_instance_options(cmd_gen, gen.seed);
  cmd_gen->add_option("--out", gen.out, "problem JSON path (default stdout)");
  cmd_gen->add_option("--signal-out", gen.signal_out,
                      "write the planted signal JSON here");
  cmd_gen->callback([&] { rc = run_generate(gen); });

  DualizeOpts dua;
  CLI::App* cmd_dua =
      app.add_subcommand("dualize", "emit the dual problem as JSON");
  cmd_dua->add_option("problem", dua.problem, "problem JSON path")->required();
  cmd_dua->add_option("--mode", dua.mode, "auto | gauge | perspective")
      ->check(CLI::IsMember({"auto", "gauge", "perspective"}));
  cmd_dua->add_option("--out", dua.out, "output path (default stdout)");
  cmd_dua->callback([&] { rc = run_dualize(dua); });

  SolveOpts sol;
  CLI::App* cmd_sol = app.add_subcommand(
      "solve", "run the primal-dual iteration on one side of a problem");
  cmd_sol->add_option("problem", sol.problem, "problem JSON path")->required();
  cmd_sol->add_option("--side", sol.side, "primal | perspective-dual")
      ->check(CLI::IsMember({"primal", "dual", "perspective-dual"}));
  cmd_sol->add_option("--iters", sol.iters, "iteration cap");
  cmd_sol->add_option("--seed", sol.seed, "recorded in trace metadata");
  cmd_sol->add_option("--trace", sol.trace, "per-iteration CSV path");
  cmd_sol->add_option("--out", sol.out, "solution JSON path (default stdout)");
  cmd_sol->add_option("--signal", sol.signal,
                      "planted signal JSON for trace metrics");
  cmd_sol->add_option("--stop-tol", sol.stop_tol, "iterate-change stop rule");
  cmd_sol->add_option("--trace-every", sol.trace_every, "trace cadence");
  cmd_sol->add_option("--support-tol", sol.support_tol,
                      "relative spike detection threshold");
  cmd_sol->add_option("--alpha-x", sol.alpha_x, "primal step (0 = default)");
  cmd_sol->add_option("--alpha-y", sol.alpha_y, "dual step (0 = default)");
  cmd_sol->callback([&] { rc = run_solve(sol); });

  CertifyOpts cer;
  CLI::App* cmd_cer = app.add_subcommand(
      "certify", "check a primal/dual pair against the optimality residuals");
  cmd_cer->add_option("problem", cer.problem, "problem JSON path")->required();
  cmd_cer->add_option("--x", cer.x_path, "primal point JSON")->required();
  cmd_cer->add_option("--y", cer.y_path, "dual witness JSON")->required();
  cmd_cer->add_option("--alpha", cer.alpha, "objective perspective scalar");
  cmd_cer->add_option("--mu", cer.mu, "constraint perspective scalar");
  cmd_cer->add_option("--mode", cer.mode, "auto | gauge | perspective")
      ->check(CLI::IsMember({"auto", "gauge", "perspective"}));
  cmd_cer->add_option("--opt-tol", cer.opt_tol, "residual tolerance");
  cmd_cer->add_option("--feas-tol", cer.feas_tol, "feasibility tolerance");
  cmd_cer->add_option("--out", cer.out, "report path (default stdout)");
  cmd_cer->callback([&] { rc = run_certify(cer); });

  RecoverOpts rec;
  CLI::App* cmd_rec = app.add_subcommand(
      "recover", "rebuild a primal solution from a dual witness");
  cmd_rec->add_option("problem", rec.problem, "problem JSON path")->required();
  cmd_rec->add_option("--dual", rec.dual_path, "dual witness JSON")
      ->required();
  cmd_rec->add_option("--alpha", rec.alpha, "objective perspective scalar");
  cmd_rec->add_option("--mu", rec.mu, "constraint perspective scalar");
  cmd_rec->add_option("--method", rec.method, "auto | lstsq | lagrange")
      ->check(CLI::IsMember({"auto", "lstsq", "lagrange"}));
  cmd_rec->add_option("--z", rec.z_path, "multiplier vector (lagrange)");
  cmd_rec->add_option("--nu", rec.nu, "dual optimal value (lagrange)");
  cmd_rec->add_option("--support-tol", rec.support_tol,
                      "active support threshold");
  cmd_rec->add_option("--out", rec.out, "recovery JSON path (default stdout)");
  cmd_rec->callback([&] { rc = run_recover(rec); });

  TransformOpts tra;
  CLI::App* cmd_tra = app.add_subcommand(
      "transform", "evaluate a function spec or one of its transforms");
  cmd_tra->add_option("fn", tra.fn_arg, "function spec JSON (inline or path)")
      ->required();
  cmd_tra->add_option("point", tra.point_arg, "point JSON (inline or path)")
      ->required();
  cmd_tra
      ->add_option("--which", tra.which,
                   "eval | conjugate | perspective | polar-perspective")
      ->check(CLI::IsMember(
          {"eval", "conjugate", "perspective", "polar-perspective"}));
  cmd_tra->add_option("--xi", tra.xi, "polar-perspective scalar argument");
  cmd_tra->add_option("--lambda", tra.lambda, "perspective scalar argument");
  cmd_tra->add_option("--bisect-tol", tra.bisect_tol,
                      "tolerance for numeric fallbacks");
  cmd_tra->callback([&] { rc = run_transform(tra); });

  ExperimentOpts exp;
  CLI::App* cmd_exp = app.add_subcommand(
      "experiment",
      "run the two-sided sparse robust regression benchmark with CSV traces");
  add_instance_options(cmd_exp, exp.inst);
  cmd_exp->add_option("--primal-iters", exp.primal_iters,
                      "primal-side iteration cap");
  cmd_exp->add_option("--dual-iters", exp.dual_iters,
                      "dual-side iteration cap");
  cmd_exp->add_option("--stop-tol", exp.stop_tol, "iterate-change stop rule");
  cmd_exp->add_option("--trace-every", exp.trace_every, "trace cadence");
  cmd_exp->add_option("--primal-csv", exp.primal_csv, "primal trace path");
  cmd_exp->add_option("--dual-csv", exp.dual_csv, "dual trace path");
  cmd_exp->add_option("--repeat", exp.repeat,
                      "repeat count (parallel workers, per-run CSV suffixes)");
  cmd_exp->add_option("--support-tol", exp.support_tol,
                      "relative spike detection threshold");
  cmd_exp->callback([&] { rc = run_experiment(exp); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const CapabilityError& e) {
    std::cerr << "capability error: " << e.what() << '\n';
    return 4;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return rc;
}
