#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "zhd/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace zhd;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("zhd_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

Trace sample_trace() {
  Trace t;
  t.problem_id = "sample";
  for (int k = 0; k < 5; ++k) {
    TraceRecord r;
    r.k = k;
    r.x = Vector::Constant(3, 1.0 / (k + 1.0) + 1e-17);
    r.phi = std::exp(-k) + 0.123456789012345678;
    r.c = r.phi + 1e-3;
    r.step = k == 0 ? 0.0 : 0.5;
    r.dx_norm = k == 0 ? 0.0 : 0.25;
    if (k > 0) r.witness_norm = 1.0 / (3.0 * k);
    r.backtracks = k;
    t.records.push_back(r);
  }
  return t;
}

const std::string kLassoConfig = R"({
  "problem": {"name": "lasso", "params": {"dim": 50, "lambda": 0.1}},
  "seed": 1,
  "solver": {"kind": "pgm",
             "params": {"gamma_max": 0.4, "stop_tol": 1e-10, "max_iters": 2000}},
  "rate_check": {"regime": "linear"}
})";

}  // namespace

TEST_CASE("trace CSV round trip is exact") {
  TempDir dir;
  const Trace t = sample_trace();
  write_trace_csv(t, dir.file("t.csv"));
  const Trace back = read_trace_csv(dir.file("t.csv"));

  REQUIRE(back.records.size() == t.records.size());
  for (std::size_t k = 0; k < t.records.size(); ++k) {
    const auto& a = t.records[k];
    const auto& b = back.records[k];
    CHECK(a.k == b.k);
    CHECK(a.phi == b.phi);  // bit-exact through 17 significant digits
    CHECK(a.c == b.c);
    CHECK(a.step == b.step);
    CHECK(a.dx_norm == b.dx_norm);
    CHECK(a.backtracks == b.backtracks);
    CHECK(a.witness_norm.has_value() == b.witness_norm.has_value());
    if (a.witness_norm) CHECK(*a.witness_norm == *b.witness_norm);
    REQUIRE(a.x.size() == b.x.size());
    for (Eigen::Index i = 0; i < a.x.size(); ++i) CHECK(a.x[i] == b.x[i]);
  }

  const std::string header = slurp(dir.file("t.csv")).substr(0, 60);
  CHECK(header.rfind("k,phi,c,step,dx_norm,witness_norm,backtracks,x_0,x_1,x_2",
                     0) == 0);
}

TEST_CASE("malformed traces are rejected with located errors") {
  TempDir dir;
  spit(dir.file("bad_header.csv"), "k,phi,c,oops,dx_norm,witness_norm,backtracks\n");
  CHECK_THROWS_WITH_AS(read_trace_csv(dir.file("bad_header.csv")),
                       doctest::Contains("column 3"), std::invalid_argument);

  spit(dir.file("bad_row.csv"),
       "k,phi,c,step,dx_norm,witness_norm,backtracks,x_0\n"
       "0,1.0,1.0,0,0,,0,1.0\n"
       "1,abc,1.0,1,1,0.5,0,0.0\n");
  CHECK_THROWS_WITH_AS(read_trace_csv(dir.file("bad_row.csv")),
                       doctest::Contains("row 1"), std::invalid_argument);

  spit(dir.file("gap.csv"),
       "k,phi,c,step,dx_norm,witness_norm,backtracks,x_0\n"
       "0,1.0,1.0,0,0,,0,1.0\n"
       "2,0.5,0.9,1,1,0.5,0,0.0\n");
  CHECK_THROWS_WITH_AS(read_trace_csv(dir.file("gap.csv")),
                       doctest::Contains("consecutive"), std::invalid_argument);
}

TEST_CASE("run command: full lasso pipeline exits 0 with a linear fit") {
  TempDir dir;
  spit(dir.file("cfg.json"), kLassoConfig);
  const int code = run_command(dir.file("cfg.json"), dir.file("out"));
  CHECK(code == 0);
  CHECK(fs::exists(dir.file("out") + "/trace.csv"));
  CHECK(fs::exists(dir.file("out") + "/summary.txt"));

  const auto report =
      nlohmann::json::parse(slurp(dir.file("out") + "/report.json"));
  CHECK(report["h1"]["pass"] == true);
  CHECK(report["h2"]["pass"] == true);
  CHECK(report["eq12"]["pass"] == true);
  REQUIRE(report["rate_fits"].size() == 1);
  CHECK(report["rate_fits"][0]["regime"] == "linear");
  CHECK(report["rate_fits"][0]["fitted"].get<double>() < 1.0);
  CHECK(report["rate_fits"][0]["r_squared"].get<double>() >= 0.99);
}

TEST_CASE("run command: identical config gives byte-identical traces") {
  TempDir dir;
  spit(dir.file("cfg.json"), kLassoConfig);
  REQUIRE(run_command(dir.file("cfg.json"), dir.file("a")) == 0);
  REQUIRE(run_command(dir.file("cfg.json"), dir.file("b")) == 0);
  CHECK(slurp(dir.file("a") + "/trace.csv") == slurp(dir.file("b") + "/trace.csv"));
  CHECK(slurp(dir.file("a") + "/report.json") ==
        slurp(dir.file("b") + "/report.json"));
}

TEST_CASE("run command: quartic sublinear rate check passes") {
  TempDir dir;
  spit(dir.file("cfg.json"), R"({
    "problem": {"name": "quartic", "params": {"dim": 1}},
    "solver": {"kind": "pgm",
               "params": {"gamma_max": 0.1, "stop_tol": 1e-300,
                          "max_iters": 20000}},
    "x0": [1.0],
    "rate_check": {"regime": "sublinear", "slope": -0.5}
  })");
  CHECK(run_command(dir.file("cfg.json"), dir.file("out")) == 0);
}

TEST_CASE("run command: invalid configs exit 1 with a named cause") {
  TempDir dir;
  spit(dir.file("rho2.json"), R"({
    "problem": {"name": "rayleigh_sphere", "params": {"dim": 5}},
    "solver": {"kind": "rgm", "params": {"rho2": 1.5}}
  })");
  CHECK(run_command(dir.file("rho2.json"), dir.file("out")) == 1);
  try {
    RgmParams p;
    p.rho2 = 1.5;
    p.validate();
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("[0,1)") != std::string::npos);
  }

  spit(dir.file("unknown.json"), R"({
    "problem": {"name": "lasso"},
    "solver": {"kind": "pgm", "params": {"gamma_maximum": 0.4}}
  })");
  CHECK(run_command(dir.file("unknown.json"), dir.file("out")) == 1);

  spit(dir.file("mismatch.json"), R"({
    "problem": {"name": "lasso"},
    "solver": {"kind": "rgm"}
  })");
  CHECK(run_command(dir.file("mismatch.json"), dir.file("out")) == 1);

  spit(dir.file("nonsense.json"), "{not json");
  CHECK(run_command(dir.file("nonsense.json"), dir.file("out")) == 1);
}

TEST_CASE("check command: round trip passes, corruption fails") {
  TempDir dir;
  spit(dir.file("cfg.json"), kLassoConfig);
  REQUIRE(run_command(dir.file("cfg.json"), dir.file("out")) == 0);
  const std::string trace_path = dir.file("out") + "/trace.csv";

  CHECK(check_command(trace_path, std::nullopt, std::nullopt) == 0);

  // corrupt the C column of one row
  Trace t = read_trace_csv(trace_path);
  t.records[10].c += 5.0;
  write_trace_csv(t, dir.file("corrupt.csv"));
  CHECK(check_command(dir.file("corrupt.csv"), std::nullopt,
                      dir.file("corrupt_report.json")) == 2);
  const auto rep = nlohmann::json::parse(slurp(dir.file("corrupt_report.json")));
  CHECK(rep["h1"]["pass"] == false);

  // delete a row: schema-level failure
  std::istringstream in(slurp(trace_path));
  std::ostringstream out;
  std::string line;
  int row = -1;
  while (std::getline(in, line)) {
    if (row != 10) out << line << "\n";
    ++row;
  }
  spit(dir.file("gap.csv"), out.str());
  CHECK(check_command(dir.file("gap.csv"), std::nullopt, std::nullopt) == 1);

  CHECK(check_command(dir.file("does_not_exist.csv"), std::nullopt,
                      std::nullopt) == 1);
}

TEST_CASE("rate command: regimes verified against the trace") {
  TempDir dir;
  spit(dir.file("cfg.json"), kLassoConfig);
  REQUIRE(run_command(dir.file("cfg.json"), dir.file("out")) == 0);
  const std::string trace_path = dir.file("out") + "/trace.csv";

  CHECK(rate_command(trace_path, 0.5, 0.2) == 0);
  CHECK(rate_command(trace_path, 0.75, 0.2) == 2);  // wrong regime for lasso
  CHECK(rate_command(trace_path, 0.0, 0.2) == 1);   // unsupported exponent
}

TEST_CASE("installed binary wires the subcommands to the same logic") {
  const char* bin = std::getenv("ZHD_BIN");
  REQUIRE(bin != nullptr);
  TempDir dir;
  spit(dir.file("cfg.json"), kLassoConfig);

  const auto shell = [&](const std::string& args) {
    const std::string cmd = std::string(bin) + " " + args + " >/dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
  };

  CHECK(shell("run --config " + dir.file("cfg.json") + " --out " +
              dir.file("out")) == 0);
  CHECK(shell("check --trace " + dir.file("out") + "/trace.csv") == 0);
  CHECK(shell("rate --trace " + dir.file("out") + "/trace.csv --theta 0.5") ==
        0);
  CHECK(shell("run --config " + dir.file("missing.json") + " --out " +
              dir.file("out2")) == 1);
  CHECK(shell("bogus-subcommand") == 1);
}
