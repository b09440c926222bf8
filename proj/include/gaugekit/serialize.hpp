// gaugekit: gauge and perspective duality toolkit
// Licensed under the Apache License, Version 2.0

#pragma once

#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "gaugekit/duality.hpp"
#include "gaugekit/model.hpp"
#include "gaugekit/recovery.hpp"

namespace gaugekit {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Extended reals: JSON numbers cannot carry infinities, so they round-trip
// as the strings "+inf" / "-inf".
// ---------------------------------------------------------------------------

inline Json encode_extended(double v) {
  if (v == kInf) return Json("+inf");
  if (v == -kInf) return Json("-inf");
  return Json(v);
}

inline double decode_extended(const Json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "+inf" || s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    throw ParameterError("expected a number or \"+inf\"/\"-inf\", got \"" + s +
                         "\"");
  }
  return j.get<double>();
}

// ---------------------------------------------------------------------------
// Vectors and matrices (row-major flat arrays)
// ---------------------------------------------------------------------------

inline Json vec_to_json(const Vec& v) {
  Json arr = Json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

inline Vec vec_from_json(const Json& j, const std::string& what) {
  if (!j.is_array())
    throw ParameterError(what + ": expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  Eigen::Index i = 0;
  for (const auto& e : j) v[i++] = e.get<double>();
  return v;
}

inline Json mat_to_json(const Mat& m) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) arr.push_back(m(i, j));
  return arr;
}

inline Mat mat_from_json(const Json& j, Eigen::Index rows, Eigen::Index cols,
                         const std::string& what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows * cols)
    throw ParameterError(what + ": expected " + std::to_string(rows * cols) +
                         " row-major entries");
  Mat m(rows, cols);
  Eigen::Index k = 0;
  for (const auto& e : j) {
    m(k / cols, k % cols) = e.get<double>();
    ++k;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Cones and gauges
// ---------------------------------------------------------------------------

inline Json cone_to_json(const ConeSpec& c) {
  Json j;
  j["dim"] = c.dim;
  switch (c.kind) {
    case ConeKind::Zero: j["type"] = "zero"; break;
    case ConeKind::Full: j["type"] = "full"; break;
    case ConeKind::Orthant: j["type"] = "orthant"; break;
    case ConeKind::Polyhedral:
      j["type"] = "polyhedral";
      j["rows"] = static_cast<int>(c.mat.rows());
      j["mat"] = mat_to_json(c.mat);
      break;
    case ConeKind::Generated:
      j["type"] = "generated";
      j["cols"] = static_cast<int>(c.mat.cols());
      j["mat"] = mat_to_json(c.mat);
      break;
    case ConeKind::Soc:
      j["type"] = "soc";
      j["sign"] = c.soc_sign;
      break;
  }
  return j;
}

inline ConeSpec cone_from_json(const Json& j) {
  const std::string type = j.at("type").get<std::string>();
  const int dim = j.at("dim").get<int>();
  if (type == "zero") return ConeSpec::zero(dim);
  if (type == "full") return ConeSpec::full(dim);
  if (type == "orthant") return ConeSpec::orthant(dim);
  if (type == "polyhedral")
    return ConeSpec::polyhedral(
        mat_from_json(j.at("mat"), j.at("rows").get<int>(), dim, "cone mat"));
  if (type == "generated")
    return ConeSpec::generated(
        mat_from_json(j.at("mat"), dim, j.at("cols").get<int>(), "cone mat"));
  if (type == "soc") return ConeSpec::second_order(dim, j.value("sign", 1));
  throw ParameterError("unknown cone type \"" + type + "\"");
}

inline Json gauge_to_json(const GaugeSpec& g) {
  Json j;
  j["dim"] = g.dim;
  switch (g.kind) {
    case GaugeKind::L1: j["kind"] = "l1"; break;
    case GaugeKind::L2: j["kind"] = "l2"; break;
    case GaugeKind::LInf: j["kind"] = "linf"; break;
    case GaugeKind::Cone:
      j["kind"] = "cone";
      j["cone"] = cone_to_json(g.cone);
      break;
    case GaugeKind::Scaled:
      j["kind"] = "scaled";
      j["c"] = g.scale;
      j["base"] = gauge_to_json(*g.base);
      break;
    case GaugeKind::Sum:
    case GaugeKind::Max: {
      j["kind"] = g.kind == GaugeKind::Sum ? "sum" : "max";
      Json parts = Json::array();
      for (const auto& part : g.parts) parts.push_back(gauge_to_json(part));
      j["parts"] = std::move(parts);
      break;
    }
  }
  return j;
}

inline GaugeSpec gauge_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind"))
    throw ParameterError("gauge spec: expected an object with a \"kind\" tag");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "l1") return GaugeSpec::l1(j.at("dim").get<int>());
  if (kind == "l2") return GaugeSpec::l2(j.at("dim").get<int>());
  if (kind == "linf") return GaugeSpec::linf(j.at("dim").get<int>());
  if (kind == "cone")
    return GaugeSpec::cone_indicator(cone_from_json(j.at("cone")));
  if (kind == "scaled")
    return GaugeSpec::scaled(j.at("c").get<double>(),
                             gauge_from_json(j.at("base")));
  if (kind == "sum" || kind == "max") {
    std::vector<GaugeSpec> parts;
    for (const auto& part : j.at("parts"))
      parts.push_back(gauge_from_json(part));
    return kind == "sum" ? GaugeSpec::separable_sum(std::move(parts))
                         : GaugeSpec::separable_max(std::move(parts));
  }
  throw ParameterError("unknown gauge kind \"" + kind + "\"");
}

// ---------------------------------------------------------------------------
// PLQ data and perspective functions
// ---------------------------------------------------------------------------

inline Json plq_to_json(const PlqSpec& p) {
  Json j;
  j["kind"] = "plq";
  j["k"] = p.n_rows();
  j["l"] = p.arg_dim();
  j["W"] = mat_to_json(p.w_mat);
  j["w"] = vec_to_json(p.w_vec);
  j["L"] = mat_to_json(p.l_mat);
  return j;
}

inline PlqSpec plq_from_json(const Json& j) {
  if (j.contains("kind") && j.at("kind") == "huber_sum")
    return PlqSpec::huber_sum(j.at("eta").get<double>(),
                              j.value("m", j.value("dim", 1)));
  PlqSpec p;
  const int k = j.at("k").get<int>();
  const int l = j.at("l").get<int>();
  p.w_mat = mat_from_json(j.at("W"), k, l, "plq W");
  p.w_vec = vec_from_json(j.at("w"), "plq w");
  p.l_mat = mat_from_json(j.at("L"), l, l, "plq L");
  p.validate();
  return p;
}

inline Json fn_to_json(const PerspectiveFn& f) {
  Json j;
  switch (f.kind) {
    case PerspectiveFn::Kind::HuberSum:
      j["kind"] = "huber";
      j["eta"] = f.eta;
      j["m"] = f.dim;
      break;
    case PerspectiveFn::Kind::Plq:
      j = plq_to_json(f.plq);
      break;
    case PerspectiveFn::Kind::GaugeWrap:
      j["kind"] = "gauge";
      j["base"] = gauge_to_json(f.gauge);
      break;
    case PerspectiveFn::Kind::Quadratic:
      j["kind"] = "quadratic";
      j["m"] = f.dim;
      break;
    case PerspectiveFn::Kind::SeparableSum: {
      j["kind"] = "separable_sum";
      Json parts = Json::array();
      for (const auto& part : f.parts) parts.push_back(fn_to_json(part));
      j["parts"] = std::move(parts);
      break;
    }
    case PerspectiveFn::Kind::Bregman:
      j["kind"] = "bregman";
      j["family"] = f.family == BregmanFamily::Gaussian   ? "gaussian"
                    : f.family == BregmanFamily::Poisson ? "poisson"
                                                         : "bernoulli";
      j["anchor"] = vec_to_json(f.anchor);
      break;
  }
  return j;
}

inline PerspectiveFn fn_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind"))
    throw ParameterError(
        "function spec: expected an object with a \"kind\" tag");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "huber" || kind == "huber_sum")
    return PerspectiveFn::huber_sum(j.at("eta").get<double>(),
                                    j.value("m", j.value("dim", 1)));
  if (kind == "plq") return PerspectiveFn::plq_fn(plq_from_json(j));
  if (kind == "gauge")
    return PerspectiveFn::gauge_wrap(gauge_from_json(j.at("base")));
  if (kind == "quadratic")
    return PerspectiveFn::quadratic(j.value("m", j.value("dim", 1)));
  if (kind == "separable_sum") {
    std::vector<PerspectiveFn> parts;
    for (const auto& part : j.at("parts")) parts.push_back(fn_from_json(part));
    return PerspectiveFn::separable_sum(std::move(parts));
  }
  if (kind == "bregman") {
    const std::string fam = j.at("family").get<std::string>();
    BregmanFamily family;
    if (fam == "gaussian")
      family = BregmanFamily::Gaussian;
    else if (fam == "poisson")
      family = BregmanFamily::Poisson;
    else if (fam == "bernoulli")
      family = BregmanFamily::Bernoulli;
    else
      throw ParameterError("unknown bregman family \"" + fam + "\"");
    return PerspectiveFn::bregman(family,
                                  vec_from_json(j.at("anchor"), "anchor"));
  }
  throw ParameterError("unknown function kind \"" + kind + "\"");
}

inline Json fn_spec_to_json(const FnSpec& s) {
  return s.is_gauge() ? gauge_to_json(s.gauge) : fn_to_json(s.fn);
}

/// Gauge tags parse as gauges; everything else parses as a perspective
/// function, matching how problems distinguish the two dualization paths.
inline FnSpec fn_spec_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind"))
    throw ParameterError(
        "function spec: expected an object with a \"kind\" tag");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "l1" || kind == "l2" || kind == "linf" || kind == "cone" ||
      kind == "scaled" || kind == "sum" || kind == "max")
    return FnSpec::of_gauge(gauge_from_json(j));
  return FnSpec::of_perspective(fn_from_json(j));
}

// ---------------------------------------------------------------------------
// Problems
// ---------------------------------------------------------------------------

inline Json problem_to_json(const ProblemSpec& p) {
  Json j;
  j["m"] = static_cast<int>(p.a.rows());
  j["n"] = static_cast<int>(p.a.cols());
  j["b"] = vec_to_json(p.b);
  j["A"] = mat_to_json(p.a.matrix());
  j["sigma"] = p.sigma;
  j["objective"] = fn_spec_to_json(p.objective);
  j["constraint"] = fn_spec_to_json(p.constraint);
  return j;
}

inline ProblemSpec problem_from_json(const Json& j) {
  ProblemSpec p;
  const int m = j.at("m").get<int>();
  const int n = j.at("n").get<int>();
  p.a = DenseMap(mat_from_json(j.at("A"), m, n, "problem A"));
  p.b = vec_from_json(j.at("b"), "problem b");
  p.sigma = j.at("sigma").get<double>();
  p.objective = fn_spec_from_json(j.at("objective"));
  p.constraint = fn_spec_from_json(j.at("constraint"));
  p.check_shapes();
  return p;
}

// ---------------------------------------------------------------------------
// Reports, dual specs, recovery output
// ---------------------------------------------------------------------------

inline Json report_to_json(const OptimalityReport& r) {
  Json j;
  j["primal_activity"] = encode_extended(r.primal_activity);
  j["dual_activity"] = encode_extended(r.dual_activity);
  j["objective_alignment"] = encode_extended(r.objective_alignment);
  j["constraint_alignment"] = encode_extended(r.constraint_alignment);
  j["max_residual"] = encode_extended(r.max_residual());
  j["primal_feasible"] = r.primal_feasible;
  j["dual_feasible"] = r.dual_feasible;
  j["nu_primal"] = encode_extended(r.nu_primal);
  j["nu_dual"] = encode_extended(r.nu_dual);
  j["duality_product"] = encode_extended(r.duality_product);
  j["certified"] = r.certified;
  return j;
}

inline Json gauge_dual_to_json(const GaugeDualSpec& d) {
  Json j;
  j["mode"] = "gauge";
  j["m"] = static_cast<int>(d.a.rows());
  j["n"] = static_cast<int>(d.a.cols());
  j["b"] = vec_to_json(d.b);
  j["A"] = mat_to_json(d.a.matrix());
  j["sigma"] = d.sigma;
  j["homogenized"] = d.homogenized;
  j["kappa_polar"] = gauge_to_json(d.kappa_polar);
  j["rho_polar"] = gauge_to_json(d.rho_polar);
  return j;
}

inline Json perspective_dual_to_json(const PerspectiveDualSpec& d) {
  Json j;
  j["mode"] = "perspective";
  j["m"] = static_cast<int>(d.a.rows());
  j["n"] = static_cast<int>(d.a.cols());
  j["b"] = vec_to_json(d.b);
  j["A"] = mat_to_json(d.a.matrix());
  j["sigma"] = d.sigma;
  j["homogenized"] = d.homogenized;
  j["gauge_objective"] = d.gauge_objective;
  j["objective"] = fn_to_json(d.objective_fn);
  j["constraint"] = fn_to_json(d.constraint_fn);
  if (d.socp_set) {
    Json s;
    s["b"] = vec_to_json(d.socp_set->b);
    s["sigma"] = d.socp_set->sigma;
    s["plq"] = plq_to_json(d.socp_set->plq);
    j["socp_set"] = std::move(s);
  }
  if (d.bregman_constraint) {
    Json c;
    c["family"] =
        d.bregman_constraint->family == BregmanFamily::Gaussian   ? "gaussian"
        : d.bregman_constraint->family == BregmanFamily::Poisson ? "poisson"
                                                                 : "bernoulli";
    c["anchor"] = vec_to_json(d.bregman_constraint->anchor);
    c["sigma"] = d.bregman_constraint->sigma;
    c["constant"] = d.bregman_constraint->constant;
    j["bregman_constraint"] = std::move(c);
  }
  return j;
}

inline Json recovery_to_json(const RecoveryResult& r) {
  Json j;
  j["x"] = vec_to_json(r.x);
  j["report"] = report_to_json(r.report);
  j["certified"] = r.certified();
  if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
  return j;
}

// ---------------------------------------------------------------------------
// Files: a vector file is either a bare array or {"values": [...]} with
// optional "alpha"/"mu" scalars alongside dual witnesses.
// ---------------------------------------------------------------------------

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw ParameterError(path + ": " + e.what());
  }
  return j;
}

inline void save_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ParameterError("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

inline Vec load_vector_file(const std::string& path) {
  const Json j = load_json_file(path);
  if (j.is_array()) return vec_from_json(j, path);
  if (j.is_object() && j.contains("values"))
    return vec_from_json(j.at("values"), path);
  for (const char* key : {"x", "y"})
    if (j.is_object() && j.contains(key)) return vec_from_json(j.at(key), path);
  throw ParameterError(path + ": expected an array or a \"values\" field");
}

inline ProblemSpec load_problem_file(const std::string& path) {
  try {
    return problem_from_json(load_json_file(path));
  } catch (const Json::exception& e) {
    throw ParameterError(path + ": " + e.what());
  }
}

}  // namespace gaugekit
