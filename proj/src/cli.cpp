#include "zhd/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

namespace zhd {

// ---------------------------------------------------------------------------
// Logging
// ---------------------------------------------------------------------------

LogLevel log_level() {
  const char* env = std::getenv("ZHD_LOG");
  if (env == nullptr) return LogLevel::kError;
  const std::string v(env);
  if (v == "debug") return LogLevel::kDebug;
  if (v == "info") return LogLevel::kInfo;
  return LogLevel::kError;
}

void log_line(LogLevel level, const std::string& msg) {
  if (static_cast<int>(level) <= static_cast<int>(log_level())) {
    std::cerr << "[zhd] " << msg << "\n";
  }
}

// ---------------------------------------------------------------------------
// Trace CSV persistence
// ---------------------------------------------------------------------------

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, std::int64_t row, const char* col) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("trace row " + std::to_string(row) +
                                ": bad value '" + s + "' in column " + col);
  }
}

constexpr const char* kFixedColumns[] = {"k",       "phi",          "c",
                                         "step",    "dx_norm",      "witness_norm",
                                         "backtracks"};
constexpr std::size_t kNumFixed = 7;

}  // namespace

void write_trace_csv(const Trace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);

  const auto dim = trace.records.empty()
                       ? 0
                       : static_cast<std::size_t>(trace.records.front().x.size());
  out << "k,phi,c,step,dx_norm,witness_norm,backtracks";
  for (std::size_t i = 0; i < dim; ++i) out << ",x_" << i;
  out << "\n";

  for (const TraceRecord& r : trace.records) {
    out << r.k << ',' << fmt17(r.phi) << ',' << fmt17(r.c) << ','
        << fmt17(r.step) << ',' << fmt17(r.dx_norm) << ',';
    if (r.witness_norm) out << fmt17(*r.witness_norm);
    out << ',' << r.backtracks;
    for (std::size_t i = 0; i < dim; ++i) {
      out << ',' << fmt17(r.x[static_cast<Eigen::Index>(i)]);
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Trace read_trace_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open trace: " + path);

  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("trace is empty: " + path);
  }
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < kNumFixed) {
    throw std::invalid_argument("trace header has too few columns");
  }
  for (std::size_t i = 0; i < kNumFixed; ++i) {
    if (header[i] != kFixedColumns[i]) {
      throw std::invalid_argument("trace header column " + std::to_string(i) +
                                  " is '" + header[i] + "', expected '" +
                                  kFixedColumns[i] + "'");
    }
  }
  const std::size_t dim = header.size() - kNumFixed;
  for (std::size_t i = 0; i < dim; ++i) {
    if (header[kNumFixed + i] != "x_" + std::to_string(i)) {
      throw std::invalid_argument("trace header column " +
                                  std::to_string(kNumFixed + i) + " is '" +
                                  header[kNumFixed + i] + "', expected 'x_" +
                                  std::to_string(i) + "'");
    }
  }

  Trace trace;
  std::int64_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw std::invalid_argument("trace row " + std::to_string(row) + " has " +
                                  std::to_string(fields.size()) +
                                  " fields, expected " +
                                  std::to_string(header.size()));
    }
    TraceRecord r;
    r.k = static_cast<std::int64_t>(parse_double(fields[0], row, "k"));
    if (r.k != row) {
      throw std::invalid_argument("trace row " + std::to_string(row) +
                                  ": index k=" + std::to_string(r.k) +
                                  " breaks the consecutive-from-0 invariant");
    }
    r.phi = parse_double(fields[1], row, "phi");
    r.c = parse_double(fields[2], row, "c");
    r.step = parse_double(fields[3], row, "step");
    r.dx_norm = parse_double(fields[4], row, "dx_norm");
    if (!fields[5].empty()) {
      r.witness_norm = parse_double(fields[5], row, "witness_norm");
    }
    r.backtracks =
        static_cast<std::int64_t>(parse_double(fields[6], row, "backtracks"));
    r.x.resize(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) {
      r.x[static_cast<Eigen::Index>(i)] =
          parse_double(fields[kNumFixed + i], row, header[kNumFixed + i].c_str());
    }
    trace.records.push_back(std::move(r));
    ++row;
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

double get_number(const json& obj, const std::string& key) {
  if (!obj.at(key).is_number()) {
    throw std::invalid_argument("config key '" + key + "' must be a number");
  }
  return obj.at(key).get<double>();
}

void apply_pgm_param(PgmParams& p, const std::string& key, const json& v) {
  const auto num = [&] { return v.get<double>(); };
  if (key == "gamma_min") p.gamma_min = num();
  else if (key == "gamma_max") p.gamma_max = num();
  else if (key == "alpha") p.alpha = num();
  else if (key == "beta") p.beta = num();
  else if (key == "p_min") p.p_min = num();
  else if (key == "p_k") p.p_k = num();
  else if (key == "max_iters") p.max_iters = v.get<std::int64_t>();
  else if (key == "stop_tol") p.stop_tol = num();
  else if (key == "gamma0_rule") {
    const std::string rule = v.get<std::string>();
    if (rule == "constant") p.gamma0_rule = Gamma0Rule::kConstant;
    else if (rule == "bb") p.gamma0_rule = Gamma0Rule::kBarzilaiBorwein;
    else throw std::invalid_argument(
        "config key 'gamma0_rule' must be 'constant' or 'bb'");
  } else {
    throw std::invalid_argument("unknown pgm parameter key '" + key + "'");
  }
}

void apply_rgm_param(RgmParams& p, const std::string& key, const json& v) {
  const auto num = [&] { return v.get<double>(); };
  if (key == "alpha_m") p.alpha_m = num();
  else if (key == "alpha_M") p.alpha_M = num();
  else if (key == "rho1") p.rho1 = num();
  else if (key == "rho2") p.rho2 = num();
  else if (key == "beta") p.beta = num();
  else if (key == "p_min") p.p_min = num();
  else if (key == "p_k") p.p_k = num();
  else if (key == "c1") p.c1 = num();
  else if (key == "c2") p.c2 = num();
  else if (key == "max_iters") p.max_iters = v.get<std::int64_t>();
  else if (key == "stop_tol") p.stop_tol = num();
  else throw std::invalid_argument("unknown rgm parameter key '" + key + "'");
}

void apply_nlsa_param(NlsaParams& p, const std::string& key, const json& v) {
  const auto num = [&] { return v.get<double>(); };
  if (key == "delta") p.delta = num();
  else if (key == "mu") p.mu = num();
  else if (key == "eta_min") p.eta_min = num();
  else if (key == "eta_max") p.eta_max = num();
  else if (key == "eta_k") p.eta_k = num();
  else if (key == "beta") p.beta = num();
  else if (key == "c1") p.c1 = num();
  else if (key == "c2") p.c2 = num();
  else if (key == "bb_step0") p.bb_step0 = v.get<bool>();
  else if (key == "max_iters") p.max_iters = v.get<std::int64_t>();
  else if (key == "stop_tol") p.stop_tol = num();
  else throw std::invalid_argument("unknown nlsa parameter key '" + key + "'");
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& doc) {
  RunConfig cfg;
  if (!doc.contains("problem") || !doc["problem"].contains("name")) {
    throw std::invalid_argument("config is missing key 'problem.name'");
  }
  cfg.problem_name = doc["problem"]["name"].get<std::string>();
  if (doc["problem"].contains("params")) {
    for (const auto& [key, v] : doc["problem"]["params"].items()) {
      cfg.problem_params[key] = get_number(doc["problem"]["params"], key);
    }
  }
  if (doc.contains("seed")) {
    cfg.problem_params["seed"] = doc["seed"].get<double>();
  }

  if (!doc.contains("solver") || !doc["solver"].contains("kind")) {
    throw std::invalid_argument("config is missing key 'solver.kind'");
  }
  const std::string kind = doc["solver"]["kind"].get<std::string>();
  if (kind == "pgm") cfg.solver = SolverKind::kPgm;
  else if (kind == "rgm") cfg.solver = SolverKind::kRgm;
  else if (kind == "nlsa") cfg.solver = SolverKind::kNlsa;
  else throw std::invalid_argument(
      "config key 'solver.kind' must be one of pgm, rgm, nlsa (got '" + kind +
      "')");

  if (doc["solver"].contains("params")) {
    for (const auto& [key, v] : doc["solver"]["params"].items()) {
      try {
        switch (cfg.solver) {
          case SolverKind::kPgm: apply_pgm_param(cfg.pgm, key, v); break;
          case SolverKind::kRgm: apply_rgm_param(cfg.rgm, key, v); break;
          case SolverKind::kNlsa: apply_nlsa_param(cfg.nlsa, key, v); break;
        }
      } catch (const nlohmann::json::exception&) {
        throw std::invalid_argument("config solver parameter key '" + key +
                                    "' has the wrong type");
      }
    }
  }
  switch (cfg.solver) {
    case SolverKind::kPgm: cfg.pgm.validate(); break;
    case SolverKind::kRgm: cfg.rgm.validate(); break;
    case SolverKind::kNlsa: cfg.nlsa.validate(); break;
  }

  if (doc.contains("x0")) {
    const auto& arr = doc["x0"];
    if (!arr.is_array() || arr.empty()) {
      throw std::invalid_argument("config key 'x0' must be a nonempty array");
    }
    Vector x0(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) {
      x0[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
    }
    cfg.x0 = std::move(x0);
  }

  if (doc.contains("conformance")) {
    const auto& conf = doc["conformance"];
    if (conf.contains("k1")) cfg.k1_override = conf["k1"].get<std::int64_t>();
    if (conf.contains("burn_in_fraction")) {
      cfg.burn_in_fraction = conf["burn_in_fraction"].get<double>();
      if (!(cfg.burn_in_fraction >= 0.0 && cfg.burn_in_fraction < 1.0)) {
        throw std::invalid_argument(
            "config key 'conformance.burn_in_fraction' must lie in [0,1)");
      }
    }
  }

  if (doc.contains("rate_check")) {
    const auto& rc = doc["rate_check"];
    RateCheck check;
    const std::string regime =
        rc.is_string() ? rc.get<std::string>() : rc.at("regime").get<std::string>();
    if (regime == "linear") {
      check.regime = RateFit::Regime::kLinear;
    } else if (regime == "sublinear") {
      check.regime = RateFit::Regime::kSublinear;
      if (rc.is_object() && rc.contains("slope")) {
        check.slope = rc["slope"].get<double>();
      }
    } else {
      throw std::invalid_argument(
          "config key 'rate_check.regime' must be 'linear' or 'sublinear'");
    }
    cfg.rate_check = check;
  }
  return cfg;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") +
                                e.what());
  }
  return from_json(doc);
}

// ---------------------------------------------------------------------------
// Analysis harness
// ---------------------------------------------------------------------------

namespace {

double param_or(const Trace& trace, const std::string& key, double fallback) {
  const auto it = trace.solver_params.find(key);
  return it == trace.solver_params.end() ? fallback : it->second;
}

bool has_param(const Trace& trace, const std::string& key) {
  return trace.solver_params.count(key) > 0;
}

// Tightest constants consistent with the trace itself, used when the trace
// was loaded from disk and carries no solver metadata. Structural breakage
// (merit increases, impossible witness bounds) still fails under these.
struct EmpiricalConstants {
  double a_lower;
  double tau;
  double h2_multiplier;
};

EmpiricalConstants empirical_constants(const Trace& trace, std::int64_t k1) {
  const double tol = merit_tol(trace.records.front().c);
  double a_lower = std::numeric_limits<double>::infinity();
  double tau = 1.0;
  for (std::size_t k = 1; k < trace.records.size(); ++k) {
    const auto& cur = trace.records[k];
    const auto& prev = trace.records[k - 1];
    if (cur.dx_norm > 0.0) {
      a_lower = std::min(a_lower, (prev.c - cur.phi) / (cur.dx_norm * cur.dx_norm));
    }
    const double denom = prev.c - cur.phi;
    if (std::abs(denom) > tol) {
      tau = std::min(tau, (prev.c - cur.c) / denom);
    }
  }
  const double a_floor = 1e-16;
  if (!std::isfinite(a_lower) || a_lower < a_floor) a_lower = a_floor;
  tau = std::clamp(tau, 1e-6, 1.0);

  double mult = 0.0;
  const auto K = static_cast<std::int64_t>(trace.records.size()) - 1;
  for (std::int64_t k = k1 + 1; k <= K - k1; ++k) {
    const auto& rec = trace.records[static_cast<std::size_t>(k)];
    if (!rec.witness_norm) continue;
    double dx_sum = 0.0;
    for (std::int64_t i = k - k1; i <= k + k1; ++i) {
      dx_sum += trace.records[static_cast<std::size_t>(i)].dx_norm;
    }
    if (dx_sum > 0.0) mult = std::max(mult, *rec.witness_norm / dx_sum);
  }
  if (!(mult > 0.0)) mult = 1.0;
  return {a_lower, tau, mult};
}

bool rate_fit_passes(const RateFit& fit, const RateCheck& check) {
  if (check.regime == RateFit::Regime::kLinear) {
    return fit.fitted < 1.0 && fit.r_squared >= 0.99;
  }
  const double expected = check.slope.value_or(fit.fitted);
  return std::abs(fit.fitted - expected) <= 0.15 && fit.r_squared >= 0.9;
}

}  // namespace

AnalysisResult analyze_trace(const Trace& trace, const AnalysisOptions& opts) {
  if (trace.records.size() < 2) {
    throw std::invalid_argument("analyze_trace: trace needs at least 2 records");
  }

  std::int64_t k1 = opts.k1_override.value_or(
      static_cast<std::int64_t>(param_or(trace, "k1", 0.0)));
  EmpiricalConstants emp = empirical_constants(trace, k1);
  const double a_lower = has_param(trace, "a_lower")
                             ? trace.solver_params.at("a_lower")
                             : emp.a_lower;
  const double tau =
      has_param(trace, "tau") ? trace.solver_params.at("tau") : emp.tau;
  const double mult = has_param(trace, "h2_multiplier")
                          ? trace.solver_params.at("h2_multiplier")
                          : emp.h2_multiplier;

  AnalysisResult result;
  ConformanceReport& rep = result.report;

  const PositiveSchedule b = h2_divisor_from_multiplier(mult);
  const ErrorSchedule eps = ErrorSchedule::zero();
  const auto a_seq = [a_lower](std::int64_t) { return a_lower; };

  rep.h1 = check_h1(trace, a_lower, tau);
  rep.h2 = check_h2(trace, k1, b, eps, a_seq);
  const auto K = static_cast<std::int64_t>(trace.records.size());
  if (K >= 4) {
    const std::int64_t window =
        std::clamp<std::int64_t>(K / 10, 2, std::min<std::int64_t>(10, K / 2));
    rep.h3 = check_h3(trace, window);
  }
  rep.eq12 = check_eq12(a_seq, b, eps, k1);

  rep.constants.a_lower_used = a_lower;
  rep.constants.tau_used = tau;
  try {
    rep.constants.m = compute_m(tau, k1);
    rep.constants.c_hat1 = c_hat1(tau, k1, rep.constants.m);
    rep.constants.c_hat = c_hat(rep.h2.b_bar_estimate, tau);
    std::tie(rep.k1_set, rep.k2_set) = split_k1_k2(trace, rep.constants.m);
  } catch (const std::exception& e) {
    // Degenerate tau (e.g. a structurally broken trace) can make the
    // horizon constant m intractable; the H1/H2 verdicts still stand.
    log_line(LogLevel::kInfo, std::string("constants skipped: ") + e.what());
    rep.constants.m = 0;
  }

  // Distance sequence for rate fits: against the known minimizer when
  // supplied, otherwise against the final iterate.
  std::vector<double> dists;
  const Vector& ref =
      opts.minimizer ? *opts.minimizer : trace.records.back().x;
  result.distance_reference = opts.minimizer ? "minimizer" : "final_iterate";
  for (const TraceRecord& r : trace.records) {
    dists.push_back((r.x - ref).norm());
  }

  result.rate_ok = true;
  if (opts.rate_check) {
    try {
      const RateFit fit =
          opts.rate_check->regime == RateFit::Regime::kLinear
              ? estimate_linear_rate(dists, opts.burn_in_fraction)
              : estimate_sublinear_exponent(dists, opts.burn_in_fraction);
      rep.rate_fits.push_back(fit);
      result.rate_ok = rate_fit_passes(fit, *opts.rate_check);
    } catch (const std::invalid_argument& e) {
      log_line(LogLevel::kInfo, std::string("rate fit failed: ") + e.what());
      result.rate_ok = false;
    }
  }

  result.conformance_ok = rep.h1.pass && rep.h2.pass && rep.eq12.pass;
  return result;
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

nlohmann::json report_to_json(const AnalysisResult& result,
                              const Trace& trace) {
  const ConformanceReport& rep = result.report;
  json doc;
  doc["problem_id"] = trace.problem_id;
  doc["iterations"] = trace.records.size() - 1;

  json h1;
  h1["pass"] = rep.h1.pass;
  if (rep.h1.fail_k) h1["fail_k"] = *rep.h1.fail_k;
  h1["worst_residual"] = rep.h1.worst_residual;
  doc["h1"] = h1;

  json h2;
  h2["pass"] = rep.h2.pass;
  if (rep.h2.fail_k) h2["fail_k"] = *rep.h2.fail_k;
  h2["worst_residual"] = rep.h2.worst_residual;
  h2["b_bar_estimate"] = rep.h2.b_bar_estimate;
  h2["b_bar_is_finite_horizon_estimate"] = true;
  h2["k1"] = rep.h2.k1_used;
  // The witness norm upper-bounds dist(0, dPhi); a failed bound does not
  // prove the condition false.
  h2["note"] = "witness norm upper-bounds the subgradient distance; "
               "a failure here is not a disproof";
  doc["h2"] = h2;

  json h3;
  h3["status"] =
      rep.h3.status == H3Verdict::Status::kPass ? "pass" : "inconclusive";
  h3["window_gap"] = rep.h3.window_gap;
  h3["surrogate"] = rep.h3.surrogate;
  doc["h3"] = h3;

  json eq12;
  eq12["pass"] = rep.eq12.pass;
  eq12["b_sum_divergent"] = rep.eq12.b_sum_divergent;
  eq12["b_bar_estimate"] = rep.eq12.b_bar_estimate;
  eq12["eps_summable"] = rep.eq12.eps_summable;
  eq12["eps_series_bound"] = rep.eq12.eps_series_bound;
  doc["eq12"] = eq12;

  json constants;
  constants["m"] = rep.constants.m;
  constants["c_hat"] = rep.constants.c_hat;
  constants["c_hat1"] = rep.constants.c_hat1;
  constants["a_lower"] = rep.constants.a_lower_used;
  constants["tau"] = rep.constants.tau_used;
  doc["constants"] = constants;

  json split;
  split["k1_count"] = rep.k1_set.size();
  split["k2_count"] = rep.k2_set.size();
  split["k2_indices"] = rep.k2_set;
  doc["k1k2"] = split;

  doc["rate_fits"] = json::array();
  for (const RateFit& fit : rep.rate_fits) {
    json f;
    f["regime"] =
        fit.regime == RateFit::Regime::kLinear ? "linear" : "sublinear";
    f["fitted"] = fit.fitted;
    f["r_squared"] = fit.r_squared;
    f["burn_in"] = fit.burn_in;
    f["window"] = {fit.window_begin, fit.window_end};
    f["distance_reference"] = result.distance_reference;
    doc["rate_fits"].push_back(f);
  }

  doc["rate_ok"] = result.rate_ok;
  doc["conformance_ok"] = result.conformance_ok;
  return doc;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

namespace {

Vector default_x0(const std::string& name, const TestProblem& problem) {
  if (problem.manifold) {
    const int n = problem.manifold->manifold.ambient_dim;
    Vector x0 = Vector::Ones(n);
    return x0 / x0.norm();
  }
  if (name == "quartic") {
    const auto dim = problem.minimizer ? problem.minimizer->size() : 1;
    return Vector::Ones(dim);
  }
  if (name == "rosenbrock") {
    Vector x0(2);
    x0 << -1.2, 1.0;
    return x0;
  }
  const auto dim = problem.minimizer ? problem.minimizer->size() : 2;
  return Vector::Zero(dim);
}

void write_summary(const std::string& path, const Trace& trace,
                   const AnalysisResult& result) {
  std::ofstream out(path);
  const ConformanceReport& rep = result.report;
  out << "problem: " << trace.problem_id << "\n";
  out << "iterations: " << trace.records.size() - 1 << "\n";
  out << "final value: " << fmt17(trace.records.back().phi) << "\n";
  if (trace.records.back().witness_norm) {
    out << "final witness norm: " << fmt17(*trace.records.back().witness_norm)
        << "\n";
  }
  out << "H1 (averaged sufficient decrease): "
      << (rep.h1.pass ? "pass" : "FAIL") << "\n";
  out << "H2 (windowed subgradient bound, k1=" << rep.h2.k1_used
      << "): " << (rep.h2.pass ? "pass" : "FAIL") << "\n";
  out << "H3 (finite-horizon surrogate): "
      << (rep.h3.status == H3Verdict::Status::kPass ? "pass" : "inconclusive")
      << "\n";
  out << "series conditions: " << (rep.eq12.pass ? "pass" : "FAIL") << "\n";
  out << "nonmonotone iterations (phi up-steps): ";
  std::int64_t ups = 0;
  for (std::size_t k = 1; k < trace.records.size(); ++k) {
    if (trace.records[k].phi > trace.records[k - 1].phi) ++ups;
  }
  out << ups << "\n";
  for (const RateFit& fit : rep.rate_fits) {
    if (fit.regime == RateFit::Regime::kLinear) {
      out << "rate fit: linear, rho=" << fit.fitted
          << ", R^2=" << fit.r_squared << "\n";
    } else {
      out << "rate fit: sublinear, slope=" << fit.fitted
          << ", R^2=" << fit.r_squared << "\n";
    }
  }
  out << "overall: "
      << (result.conformance_ok && result.rate_ok ? "PASS" : "FAIL") << "\n";
}

}  // namespace

int run_command(const std::string& config_path, const std::string& out_dir) {
  RunConfig cfg;
  TestProblem problem;
  try {
    cfg = RunConfig::from_json_file(config_path);
    if (cfg.problem_name == "rosenbrock") {
      problem.problem_id = "rosenbrock";
      problem.composite = CompositeObjective{
          rosenbrock(),
          ProxableFunction{[](const Vector&) { return 0.0; },
                           [](double, const Vector& z) { return z; }},
          std::nullopt};
      problem.kl = KlProfile{0.5, 1.0, std::nullopt, 1.0};
    } else {
      problem = make_test_problem(cfg.problem_name, cfg.problem_params);
    }

    if (cfg.solver == SolverKind::kRgm && !problem.manifold) {
      throw std::invalid_argument(
          "solver 'rgm' requires a manifold problem (rayleigh_sphere)");
    }
    if (cfg.solver != SolverKind::kRgm && !problem.composite) {
      throw std::invalid_argument("solver '" +
                                  std::string(cfg.solver == SolverKind::kPgm
                                                  ? "pgm"
                                                  : "nlsa") +
                                  "' requires a composite problem");
    }
    if (cfg.solver == SolverKind::kNlsa && cfg.problem_name != "quartic" &&
        cfg.problem_name != "rosenbrock") {
      throw std::invalid_argument(
          "solver 'nlsa' handles smooth problems only (quartic, rosenbrock)");
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    const Vector x0 = cfg.x0.value_or(default_x0(cfg.problem_name, problem));
    log_line(LogLevel::kInfo, "running " + cfg.problem_name);

    Trace trace;
    switch (cfg.solver) {
      case SolverKind::kPgm:
        trace = pgm_solve(*problem.composite, x0, cfg.pgm);
        break;
      case SolverKind::kRgm:
        trace = rgm_solve(*problem.manifold, x0 / x0.norm(), cfg.rgm);
        break;
      case SolverKind::kNlsa:
        trace = nlsa_solve(problem.composite->smooth, x0, cfg.nlsa);
        break;
    }
    trace.problem_id = problem.problem_id + trace.problem_id;
    log_line(LogLevel::kInfo,
             "finished after " + std::to_string(trace.records.size() - 1) +
                 " iterations");

    AnalysisOptions opts;
    opts.k1_override = cfg.k1_override;
    opts.burn_in_fraction = cfg.burn_in_fraction;
    opts.minimizer = problem.minimizer;
    opts.rate_check = cfg.rate_check;
    const AnalysisResult result = analyze_trace(trace, opts);

    std::filesystem::create_directories(out_dir);
    write_trace_csv(trace, out_dir + "/trace.csv");
    {
      std::ofstream out(out_dir + "/report.json");
      out << report_to_json(result, trace).dump(2) << "\n";
    }
    write_summary(out_dir + "/summary.txt", trace, result);

    if (!result.conformance_ok || !result.rate_ok) return 2;
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int check_command(const std::string& trace_path,
                  std::optional<std::int64_t> k1,
                  const std::optional<std::string>& report_path) {
  try {
    const Trace trace = read_trace_csv(trace_path);
    AnalysisOptions opts;
    opts.k1_override = k1;
    const AnalysisResult result = analyze_trace(trace, opts);
    if (report_path) {
      std::ofstream out(*report_path);
      out << report_to_json(result, trace).dump(2) << "\n";
    }
    if (!result.conformance_ok) {
      std::cerr << "conformance failure"
                << (result.report.h1.fail_k
                        ? " (H1 at k=" + std::to_string(*result.report.h1.fail_k) +
                              ")"
                        : "")
                << "\n";
      return 2;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int rate_command(const std::string& trace_path, double theta,
                 double burn_in_fraction) {
  try {
    KlProfile profile;
    profile.theta = theta;
    const RateRegime regime = rate_oracle(profile);

    const Trace trace = read_trace_csv(trace_path);
    std::vector<double> dists;
    for (const TraceRecord& r : trace.records) {
      dists.push_back((r.x - trace.records.back().x).norm());
    }

    RateCheck check{regime.regime, regime.expected_slope};
    const RateFit fit = regime.regime == RateFit::Regime::kLinear
                            ? estimate_linear_rate(dists, burn_in_fraction)
                            : estimate_sublinear_exponent(dists, burn_in_fraction);
    if (regime.regime == RateFit::Regime::kLinear) {
      std::cout << "regime: linear\nfitted rho: " << fit.fitted
                << "\nr_squared: " << fit.r_squared << "\n";
    } else {
      std::cout << "regime: sublinear\nexpected slope: "
                << *regime.expected_slope << "\nfitted slope: " << fit.fitted
                << "\nr_squared: " << fit.r_squared << "\n";
    }
    return rate_fit_passes(fit, check) ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace zhd
