#pragma once

#include "zhd/conformance.hpp"
#include "zhd/problems.hpp"
#include "zhd/solvers.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace zhd {

// ---------------------------------------------------------------------------
// Logging (ZHD_LOG in {error, info, debug}, default error)
// ---------------------------------------------------------------------------

enum class LogLevel { kError = 0, kInfo = 1, kDebug = 2 };

LogLevel log_level();
void log_line(LogLevel level, const std::string& msg);

// ---------------------------------------------------------------------------
// Trace CSV persistence
// ---------------------------------------------------------------------------
// Header: k,phi,c,step,dx_norm,witness_norm,backtracks,x_0,...,x_{n-1}.
// Floats carry 17 significant digits so the round trip is exact; a missing
// witness norm is an empty field.

void write_trace_csv(const Trace& trace, const std::string& path);
Trace read_trace_csv(const std::string& path);

// ---------------------------------------------------------------------------
// Run configuration (single JSON document)
// ---------------------------------------------------------------------------

enum class SolverKind { kPgm, kRgm, kNlsa };

struct RateCheck {
  RateFit::Regime regime = RateFit::Regime::kLinear;
  std::optional<double> slope;  // sublinear only
};

struct RunConfig {
  std::string problem_name;
  std::map<std::string, double> problem_params;
  SolverKind solver = SolverKind::kPgm;
  PgmParams pgm;
  RgmParams rgm;
  NlsaParams nlsa;
  std::optional<Vector> x0;
  std::optional<std::int64_t> k1_override;
  double burn_in_fraction = 0.2;
  std::optional<RateCheck> rate_check;

  /// Throws std::invalid_argument naming the offending key.
  static RunConfig from_json_file(const std::string& path);
  static RunConfig from_json(const nlohmann::json& doc);
};

// ---------------------------------------------------------------------------
// Trace analysis harness
// ---------------------------------------------------------------------------

struct AnalysisOptions {
  std::optional<std::int64_t> k1_override;
  double burn_in_fraction = 0.2;
  std::optional<Vector> minimizer;
  std::optional<RateCheck> rate_check;
};

struct AnalysisResult {
  ConformanceReport report;
  bool rate_ok = true;        // true when no rate check was requested
  bool conformance_ok = false;
  std::string distance_reference;  // "minimizer" or "final_iterate"
};

/// Runs the full conformance suite on a trace. Constants (a_lower, tau, k1,
/// H2 multiplier) come from trace.solver_params when the solver recorded
/// them; otherwise the tightest empirical surrogates consistent with the
/// trace are used, so structural corruption still fails.
AnalysisResult analyze_trace(const Trace& trace, const AnalysisOptions& opts);

nlohmann::json report_to_json(const AnalysisResult& result,
                              const Trace& trace);

// ---------------------------------------------------------------------------
// Commands (exit codes: 0 pass, 1 error, 2 conformance/rate failure)
// ---------------------------------------------------------------------------

int run_command(const std::string& config_path, const std::string& out_dir);
int check_command(const std::string& trace_path,
                  std::optional<std::int64_t> k1,
                  const std::optional<std::string>& report_path);
int rate_command(const std::string& trace_path, double theta,
                 double burn_in_fraction);

}  // namespace zhd
