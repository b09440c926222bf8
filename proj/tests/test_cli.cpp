// gaugekit: gauge and perspective duality toolkit
// Licensed under the Apache License, Version 2.0

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gaugekit/model.hpp"
#include "gaugekit/serialize.hpp"

namespace {

using namespace gaugekit;

std::string bin() {
  const char* b = std::getenv("GAUGEKIT_BIN");
  REQUIRE(b != nullptr);
  return b;
}

struct CmdOut {
  int code = -1;
  std::string out;
};

/// Runs the tool through /bin/sh, capturing stdout; stderr is discarded so
/// failure-path tests stay quiet.
CmdOut run_cli(const std::string& args) {
  const std::string cmd = bin() + " " + args + " 2>/dev/null";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CmdOut r;
  char buf[4096];
  std::size_t nread = 0;
  while ((nread = std::fread(buf, 1, sizeof buf, pipe)) > 0)
    r.out.append(buf, nread);
  const int status = ::pclose(pipe);
  if (WIFEXITED(status)) r.code = WEXITSTATUS(status);
  return r;
}

std::filesystem::path scratch_dir() {
  static const std::filesystem::path dir = [] {
    auto d = std::filesystem::temp_directory_path() /
             ("gaugekit_cli_" + std::to_string(::getpid()));
    std::filesystem::create_directories(d);
    return d;
  }();
  return dir;
}

std::string path(const std::string& name) {
  return (scratch_dir() / name).string();
}

std::string read_file(const std::string& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trimmed(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == ' ')) s.pop_back();
  return s;
}

/// Drops the trailing wall-clock column from data rows; metadata and header
/// lines pass through so the comparison still covers them.
std::string without_wall_column(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') {
      const auto pos = line.rfind(',');
      if (pos != std::string::npos) line.erase(pos);
    }
    out << line << '\n';
  }
  return out.str();
}

std::string analytic_problem_path() {
  static const std::string p = [] {
    Mat a(1, 2);
    a << 1.0, 0.0;
    ProblemSpec spec;
    spec.a = DenseMap(a);
    spec.b = Vec::Constant(1, 1.0);
    spec.sigma = 0.5;
    spec.objective = FnSpec::of_gauge(GaugeSpec::l1(2));
    spec.constraint = FnSpec::of_gauge(GaugeSpec::l2(1));
    const std::string file = path("prob.json");
    save_json_file(file, problem_to_json(spec));
    return file;
  }();
  return p;
}

}  // namespace

TEST_CASE("version flag", "[cli]") {
  const CmdOut r = run_cli("--version");
  CHECK(r.code == 0);
  CHECK(r.out.find("0.1.0") != std::string::npos);
}

TEST_CASE("generate emits a deterministic, valid instance", "[cli]") {
  const std::string common =
      "generate --m 6 --n 14 --nnz 2 --outliers 1 --sigma 0.2 --eta 1 "
      "--seed 11";
  const CmdOut r1 = run_cli(common + " --out " + path("g1.json") +
                            " --signal-out " + path("g1_sig.json"));
  REQUIRE(r1.code == 0);

  const ProblemSpec p = load_problem_file(path("g1.json"));
  CHECK(p.a.rows() == 6);
  CHECK(p.a.cols() == 14);
  CHECK(p.is_valid());
  const Vec sig = load_vector_file(path("g1_sig.json"));
  REQUIRE(sig.size() == 14);
  int spikes = 0;
  for (int i = 0; i < sig.size(); ++i)
    if (sig[i] != 0.0) ++spikes;
  CHECK(spikes == 2);

  const CmdOut r2 = run_cli(common + " --out " + path("g2.json"));
  REQUIRE(r2.code == 0);
  CHECK(read_file(path("g1.json")) == read_file(path("g2.json")));

  CHECK(run_cli("generate --m 0").code == 1);
}

TEST_CASE("dualize smoke", "[cli]") {
  const CmdOut gauge = run_cli("dualize " + analytic_problem_path());
  CHECK(gauge.code == 0);
  CHECK_FALSE(gauge.out.empty());
  CHECK(gauge.out.front() == '{');
  CHECK(run_cli("dualize nonexistent.json").code == 1);
}

TEST_CASE("solve, certify, recover round trip", "[cli][slow]") {
  const std::string prob = analytic_problem_path();

  const CmdOut ps = run_cli("solve " + prob +
                            " --side primal --iters 20000 --stop-tol 1e-12 "
                            "--out " + path("psol.json"));
  REQUIRE(ps.code == 0);
  const Json pj = load_json_file(path("psol.json"));
  CHECK(pj.at("status").get<std::string>() == "converged");
  const Vec px = load_vector_file(path("psol.json"));
  REQUIRE(px.size() == 2);
  CHECK(px[0] == Catch::Approx(0.5).margin(1e-5));
  CHECK(std::abs(px[1]) <= 1e-5);

  // Dual iterates inherit the feasible-set projector's bisection noise, so
  // the deepest reliable stop sits just above that floor.
  const CmdOut ds = run_cli("solve " + prob +
                            " --side perspective-dual --iters 20000 "
                            "--stop-tol 1e-11 --out " + path("dsol.json"));
  REQUIRE(ds.code == 0);
  const Json dj = load_json_file(path("dsol.json"));
  CHECK(dj.at("status").get<std::string>() == "converged");
  const Vec dy = load_vector_file(path("dsol.json"));
  REQUIRE(dy.size() == 1);
  CHECK(dy[0] == Catch::Approx(2.0).margin(1e-4));

  save_json_file(path("xstar.json"), Json::array({0.5, 0.0}));
  save_json_file(path("ystar.json"), Json::array({2.0}));
  const CmdOut cert = run_cli("certify " + prob + " --x " + path("xstar.json") +
                              " --y " + path("ystar.json") + " --out " +
                              path("cert.json"));
  CHECK(cert.code == 0);
  CHECK(load_json_file(path("cert.json")).at("certified").get<bool>());

  save_json_file(path("ybad.json"), Json::array({1.5}));
  const CmdOut bad = run_cli("certify " + prob + " --x " + path("xstar.json") +
                             " --y " + path("ybad.json") + " --out " +
                             path("cert_bad.json"));
  CHECK(bad.code == 2);
  CHECK_FALSE(load_json_file(path("cert_bad.json")).at("certified").get<bool>());

  const CmdOut rec =
      run_cli("recover " + prob + " --dual '[2.0]' --out " + path("rec.json"));
  CHECK(rec.code == 0);
  const Vec rx = load_vector_file(path("rec.json"));
  REQUIRE(rx.size() == 2);
  CHECK(rx[0] == Catch::Approx(0.5).margin(1e-8));

  CHECK(run_cli("recover " + prob + " --dual '{\"y\":[-2.0]}' --out " +
                path("rec_bad.json"))
            .code == 2);
}

TEST_CASE("capability boundaries exit with their own code", "[cli]") {
  Mat a(1, 2);
  a << 1.0, 0.0;
  ProblemSpec spec;
  spec.a = DenseMap(a);
  spec.b = Vec::Constant(1, 1.0);
  spec.sigma = 0.5;
  spec.objective = FnSpec::of_gauge(GaugeSpec::l1(2));
  spec.constraint = FnSpec::of_gauge(GaugeSpec::l1(1));
  save_json_file(path("prob_l1.json"), problem_to_json(spec));

  CHECK(run_cli("solve " + path("prob_l1.json") +
                " --side perspective-dual --iters 50")
            .code == 4);
  CHECK(run_cli("recover " + path("prob_l1.json") + " --dual '[2.0]'").code ==
        4);
}

TEST_CASE("malformed inputs exit with code 1", "[cli]") {
  CHECK(run_cli("solve " + path("missing.json")).code == 1);
  CHECK(run_cli("transform '{\"kind\":\"nope\"}' '[1]'").code == 1);
}

TEST_CASE("transform pinned values", "[cli]") {
  save_json_file(
      path("fn_huber.json"),
      fn_spec_to_json(FnSpec::of_perspective(PerspectiveFn::huber_sum(1.0, 1))));
  save_json_file(path("fn_l1.json"),
                 fn_spec_to_json(FnSpec::of_gauge(GaugeSpec::l1(2))));

  CHECK(trimmed(run_cli("transform " + path("fn_huber.json") + " '[2]'").out) ==
        "1.5");
  CHECK(trimmed(run_cli("transform " + path("fn_huber.json") +
                        " '[0.5]' --which conjugate")
                    .out) == "0.125");
  CHECK(trimmed(run_cli("transform " + path("fn_huber.json") +
                        " '[2]' --which perspective --lambda 0.5")
                    .out) == "1.75");
  CHECK(trimmed(run_cli("transform " + path("fn_l1.json") +
                        " '[1,-2]' --which polar-perspective --xi -1")
                    .out) == "2.0");
  CHECK(trimmed(run_cli("transform " + path("fn_l1.json") +
                        " '[1,-2]' --which polar-perspective --xi 1")
                    .out) == "\"+inf\"");
}

TEST_CASE("trace CSVs are reproducible up to wall time", "[cli][slow]") {
  const std::string gen =
      "generate --m 8 --n 20 --nnz 2 --outliers 1 --sigma 0.2 --eta 1 "
      "--seed 5 --out " + path("hb.json") + " --signal-out " +
      path("hb_sig.json");
  REQUIRE(run_cli(gen).code == 0);

  const std::string solve_args =
      "solve " + path("hb.json") +
      " --side primal --iters 300 --seed 7 --signal " + path("hb_sig.json");
  const CmdOut s1 = run_cli(solve_args + " --trace " + path("t1.csv") +
                            " --out " + path("o1.json"));
  const CmdOut s2 = run_cli(solve_args + " --trace " + path("t2.csv") +
                            " --out " + path("o2.json"));
  REQUIRE(s1.code == 0);  // hitting the iteration cap is not a failure
  REQUIRE(s2.code == 0);

  const std::string t1 = read_file(path("t1.csv"));
  CHECK(without_wall_column(t1) == without_wall_column(read_file(path("t2.csv"))));
  CHECK(read_file(path("o1.json")) == read_file(path("o2.json")));

  CHECK(t1.find("iter,objective,obj_dev,infeas,false_zeros,false_nonzeros,"
                "wall_ms") != std::string::npos);
  CHECK(t1.find("# seed=7") != std::string::npos);
  CHECK(t1.find("# side=primal") != std::string::npos);
  CHECK(t1.find("# algorithm=chambolle-pock") != std::string::npos);
  CHECK(t1.find("# version=") != std::string::npos);
}

TEST_CASE("experiment closes the loop on a small instance", "[cli][slow]") {
  const CmdOut r = run_cli(
      "experiment --m 8 --n 20 --nnz 2 --outliers 1 --sigma 0.2 --eta 1 "
      "--seed 3 --primal-iters 8000 --dual-iters 8000 --stop-tol 1e-10 "
      "--trace-every 10 --primal-csv " + path("e_p.csv") + " --dual-csv " +
      path("e_d.csv"));
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  CHECK(j.at("m").get<int>() == 8);
  const double product = j.at("duality_product").get<double>();
  CHECK(product == Catch::Approx(1.0).margin(1e-3));
  CHECK(read_file(path("e_p.csv")).find("# side=primal") != std::string::npos);
  CHECK(read_file(path("e_d.csv")).find("# side=dual") != std::string::npos);

  SECTION("repeats with one worker produce identical traces") {
    const CmdOut rep = run_cli(
        "experiment --m 8 --n 20 --nnz 2 --outliers 1 --sigma 0.2 --eta 1 "
        "--seed 3 --primal-iters 400 --dual-iters 400 --repeat 2 "
        "--primal-csv " + path("r_p.csv") + " --dual-csv " + path("r_d.csv"));
    REQUIRE(rep.code == 0);
    CHECK(without_wall_column(read_file(path("r_p.rep0.csv"))) ==
          without_wall_column(read_file(path("r_p.rep1.csv"))));
    CHECK(without_wall_column(read_file(path("r_d.rep0.csv"))) ==
          without_wall_column(read_file(path("r_d.rep1.csv"))));
  }
}
