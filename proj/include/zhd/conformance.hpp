#pragma once

#include "zhd/core.hpp"

#include <functional>
#include <vector>

namespace zhd {

// ---------------------------------------------------------------------------
// Verdicts
// ---------------------------------------------------------------------------

struct H1Verdict {
  bool pass = false;
  std::optional<std::int64_t> fail_k;
  double worst_residual = 0.0;           // max over k of lhs - rhs
  std::vector<double> residuals;         // one per k >= 1
  std::vector<double> recovered_tau;     // NaN where indeterminate
};

struct H2Verdict {
  bool pass = false;
  std::optional<std::int64_t> fail_k;
  double worst_residual = 0.0;
  double b_bar_estimate = 0.0;           // finite-horizon running max
  std::int64_t k1_used = 0;
};

struct H3Verdict {
  enum class Status { kPass, kInconclusive };
  Status status = Status::kInconclusive;
  double window_gap = 0.0;               // max Phi over window - Phi(x^K)
  // A finite trace cannot decide the asymptotic condition; this verdict
  // is always a surrogate.
  bool surrogate = true;
};

struct Eq12Verdict {
  bool b_sum_divergent = false;          // analytic, named families only
  double b_bar_estimate = 0.0;           // finite-horizon max
  bool eps_summable = false;             // analytic
  double eps_series_bound = 0.0;
  bool pass = false;
};

struct RateFit {
  enum class Regime { kLinear, kSublinear };
  Regime regime = Regime::kLinear;
  double fitted = 0.0;                   // rho for linear, slope for sublinear
  double r_squared = 0.0;
  std::int64_t burn_in = 0;
  std::int64_t window_begin = 0;
  std::int64_t window_end = 0;           // exclusive
};

struct FrameworkConstants {
  std::int64_t m = 0;
  double c_hat = 0.0;
  double c_hat1 = 0.0;
  double a_lower_used = 0.0;
  double tau_used = 0.0;
};

struct ConformanceReport {
  H1Verdict h1;
  H2Verdict h2;
  H3Verdict h3;
  Eq12Verdict eq12;
  FrameworkConstants constants;
  std::vector<std::int64_t> k1_set;
  std::vector<std::int64_t> k2_set;
  std::vector<RateFit> rate_fits;
};

// ---------------------------------------------------------------------------
// Schedules for the H2 / Eq-(1.2) machinery
// ---------------------------------------------------------------------------

/// Positive sequence from a named family, with an analytic divergence
/// decision for the series sum.
struct PositiveSchedule {
  enum class Kind { kConstant, kGeometric, kPower };
  Kind kind = Kind::kConstant;
  double scale = 1.0;   // > 0
  double shape = 0.0;   // rho for geometric, exponent for power

  static PositiveSchedule constant(double value);
  static PositiveSchedule geometric(double scale, double rho);
  static PositiveSchedule power(double scale, double exponent);

  double eval(std::int64_t k) const;
  bool series_divergent() const;
};

/// The H2 bound is stated with a divisor sequence b_k; solver-side
/// bounds arise as a multiplier constant ("||w|| <= b ||dx||"). This
/// normalizes a multiplier into the divisor orientation.
inline PositiveSchedule h2_divisor_from_multiplier(double b_multiplier) {
  if (!(b_multiplier > 0.0)) {
    throw std::invalid_argument("h2_divisor_from_multiplier: b must be positive");
  }
  return PositiveSchedule::constant(1.0 / b_multiplier);
}

// ---------------------------------------------------------------------------
// Checkers
// ---------------------------------------------------------------------------

/// Descent inequality Phi(x^k) + a ||dx_k||^2 <= C_{k-1} at every k >= 1,
/// plus recovery of tau_k from the merit recursion (indeterminate
/// iterations with C_{k-1} = Phi(x^k) pass).
H1Verdict check_h1(const Trace& trace, double a_lower, double tau);

/// Windowed relative-error bound
///   witness_k <= (1/b_k) sum_{i=k-k1}^{k+k1} ||dx_i|| + eps_k
/// over all checkable k, plus the finite-horizon B-bar estimate built
/// from the per-iteration a_i.
H2Verdict check_h2(const Trace& trace, std::int64_t k1,
                   const PositiveSchedule& b, const ErrorSchedule& eps,
                   const std::function<double(std::int64_t)>& a_seq);

/// Finite-horizon surrogate: last `window` iterates mutually within
/// eps_cauchy, and max Phi over the window within value_tol of the final
/// value. Always labeled a surrogate.
H3Verdict check_h3(const Trace& trace, std::int64_t window,
                   double eps_cauchy = 1e-6, double value_tol = 1e-6);

/// K1 = {k : Phi(x^k) <= C_{k+m}}, K2 the complement, over 0..K-m.
std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>> split_k1_k2(
    const Trace& trace, std::int64_t m);

/// Least-squares fit of log(dists_k) against k on the post-burn-in
/// window; fitted rho = exp(slope). Zeros truncate the window.
RateFit estimate_linear_rate(const std::vector<double>& dists,
                             double burn_in_fraction);

/// Least-squares fit of log(dists_k) against log(k); fitted value is the
/// slope, expected (1-theta)/(1-2theta) < 0.
RateFit estimate_sublinear_exponent(const std::vector<double>& dists,
                                    double burn_in_fraction);

struct RateRegime {
  RateFit::Regime regime;
  std::optional<double> expected_slope;  // sublinear only
};

/// Theta in (0,1/2] -> linear; theta in (1/2,1) -> sublinear with slope
/// (1-theta)/(1-2theta). Theta = 0 (finite termination) is unsupported.
RateRegime rate_oracle(const KlProfile& profile);

/// Series conditions: sum b_k divergent (analytic), B-bar finite-horizon
/// max over k1 <= k <= horizon, sum eps_k summable (analytic).
Eq12Verdict check_eq12(const std::function<double(std::int64_t)>& a_seq,
                       const PositiveSchedule& b, const ErrorSchedule& eps,
                       std::int64_t k1, std::int64_t horizon = 1000);

}  // namespace zhd
