#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace zhd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Relative tolerance used by every inequality check on merit values:
/// 1e-10 scaled by max(1, |C_0|).
inline double merit_tol(double c0) {
  return 1e-10 * std::max(1.0, std::abs(c0));
}

inline bool is_finite(const Vector& v) { return v.allFinite(); }

inline void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite coordinate");
  }
}

inline void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument(std::string(what) + ": non-finite value");
  }
}

// ---------------------------------------------------------------------------
// Merit-value averagers
// ---------------------------------------------------------------------------

/// Weighted-average merit value in p-form:
///   C_k = (1 - tau_k) C_{k-1} + tau_k Phi(x^k),  C_0 = Phi(x^0),
/// with every tau_k in [tau_lower, 1]. tau_k = 1 degenerates to the
/// monotone case C_k = Phi(x^k).
class ZhAveragerP {
 public:
  ZhAveragerP(double c0, double tau_lower) : c_(c0), tau_lower_(tau_lower) {
    require_finite(c0, "ZhAveragerP c0");
    if (!(tau_lower > 0.0 && tau_lower <= 1.0)) {
      throw std::invalid_argument("ZhAveragerP: tau_lower must lie in (0,1]");
    }
  }

  /// Advances the state and returns the new merit value.
  double update(double phi_new, double tau_k) {
    require_finite(phi_new, "zh_update_p phi_new");
    if (!(tau_k >= tau_lower_ && tau_k <= 1.0)) {
      throw std::invalid_argument("zh_update_p: tau_k outside [tau_lower, 1]");
    }
    c_ = (1.0 - tau_k) * c_ + tau_k * phi_new;
    ++history_len_;
    return c_;
  }

  double c_value() const { return c_; }
  double tau_lower() const { return tau_lower_; }
  std::int64_t history_len() const { return history_len_; }

 private:
  double c_;
  double tau_lower_;
  std::int64_t history_len_ = 0;
};

/// The same merit value in Q-form:
///   Q_{k+1} = eta_k Q_k + 1,
///   C_{k+1} = (eta_k Q_k C_k + f(x^{k+1})) / Q_{k+1},
/// with Q_0 = 1, C_0 = f(x^0) and eta_k in [eta_min, eta_max].
/// When eta_max < 1, Q_k <= 1/(1 - eta_max) throughout.
class ZhAveragerQ {
 public:
  ZhAveragerQ(double c0, double eta_min, double eta_max)
      : c_(c0), eta_min_(eta_min), eta_max_(eta_max) {
    require_finite(c0, "ZhAveragerQ c0");
    if (!(eta_min >= 0.0 && eta_min <= eta_max && eta_max <= 1.0)) {
      throw std::invalid_argument(
          "ZhAveragerQ: need 0 <= eta_min <= eta_max <= 1");
    }
  }

  struct Update {
    double c;
    double q;
  };

  Update update(double f_new, double eta_k) {
    require_finite(f_new, "zh_update_q f_new");
    if (!(eta_k >= eta_min_ && eta_k <= eta_max_)) {
      throw std::invalid_argument("zh_update_q: eta_k outside [eta_min, eta_max]");
    }
    const double q_next = eta_k * q_ + 1.0;
    c_ = (eta_k * q_ * c_ + f_new) / q_next;
    q_ = q_next;
    return {c_, q_};
  }

  double c_value() const { return c_; }
  double q_value() const { return q_; }
  double eta_min() const { return eta_min_; }
  double eta_max() const { return eta_max_; }

 private:
  double c_;
  double q_ = 1.0;
  double eta_min_;
  double eta_max_;
};

/// tau_k = 1/(eta_{k-1} Q_{k-1} + 1). Feeding this to a p-form averager
/// with the same Phi reproduces the Q-form merit value.
inline double p_equivalent_of_q(double eta_prev, double q_prev) {
  if (!(q_prev >= 1.0)) {
    throw std::invalid_argument("p_equivalent_of_q: Q must be >= 1");
  }
  if (!(eta_prev >= 0.0 && eta_prev <= 1.0)) {
    throw std::invalid_argument("p_equivalent_of_q: eta must lie in [0,1]");
  }
  return 1.0 / (eta_prev * q_prev + 1.0);
}

// ---------------------------------------------------------------------------
// Relative-error schedules
// ---------------------------------------------------------------------------

/// Summable error schedule eps_k. Three families:
///   zero       : eps_k = 0
///   geometric  : eps_k = gamma * rho^k            (rho in (0,1))
///   power      : eps_k = gamma * k^(theta/(1-2theta)), theta in (1/2,1),
///                where the exponent is < -1 so the series converges.
class ErrorSchedule {
 public:
  enum class Kind { kZero, kGeometric, kPower };

  static ErrorSchedule zero() { return ErrorSchedule(Kind::kZero, 0.0, 0.0); }

  static ErrorSchedule geometric(double gamma, double rho) {
    if (!(gamma > 0.0)) throw std::invalid_argument("geometric: gamma <= 0");
    if (!(rho > 0.0 && rho < 1.0)) {
      throw std::invalid_argument("geometric: rho must lie in (0,1)");
    }
    return ErrorSchedule(Kind::kGeometric, gamma, rho);
  }

  static ErrorSchedule power(double gamma, double theta) {
    if (!(gamma > 0.0)) throw std::invalid_argument("power: gamma <= 0");
    if (!(theta > 0.5 && theta < 1.0)) {
      throw std::invalid_argument("power: theta must lie in (1/2,1)");
    }
    return ErrorSchedule(Kind::kPower, gamma, theta);
  }

  double eval(std::int64_t k) const {
    if (k < 1) throw std::invalid_argument("ErrorSchedule: k must be >= 1");
    switch (kind_) {
      case Kind::kZero:
        return 0.0;
      case Kind::kGeometric:
        return a_ * std::pow(b_, static_cast<double>(k));
      case Kind::kPower:
        return a_ * std::pow(static_cast<double>(k), b_ / (1.0 - 2.0 * b_));
    }
    return 0.0;
  }

  /// Closed-form upper bound on the full series sum_{k>=1} eps_k.
  double series_bound() const {
    switch (kind_) {
      case Kind::kZero:
        return 0.0;
      case Kind::kGeometric:
        return a_ * b_ / (1.0 - b_);
      case Kind::kPower: {
        // exponent q = theta/(1-2theta) < -1; sum <= a (1 + integral_1^inf t^q dt)
        const double q = b_ / (1.0 - 2.0 * b_);
        return a_ * (1.0 + 1.0 / (-q - 1.0));
      }
    }
    return 0.0;
  }

  Kind kind() const { return kind_; }
  double gamma() const { return a_; }
  /// rho for the geometric family, theta for the power family.
  double shape() const { return b_; }

 private:
  ErrorSchedule(Kind kind, double a, double b) : kind_(kind), a_(a), b_(b) {}
  Kind kind_;
  double a_;
  double b_;
};

// ---------------------------------------------------------------------------
// Traces
// ---------------------------------------------------------------------------

struct TraceRecord {
  std::int64_t k = 0;
  Vector x;
  double phi = 0.0;           // Phi(x^k)
  double c = 0.0;             // C_k
  double step = 0.0;          // accepted gamma_k or alpha_k (0 at k = 0)
  double dx_norm = 0.0;       // ||x^k - x^{k-1}|| (0 at k = 0)
  std::optional<double> witness_norm;
  std::int64_t backtracks = 0;
};

/// Per-run iteration log; the object every conformance check consumes.
struct Trace {
  std::vector<TraceRecord> records;
  std::string problem_id;
  std::map<std::string, double> solver_params;

  std::size_t size() const { return records.size(); }
  const TraceRecord& operator[](std::size_t i) const { return records[i]; }

  /// Indices consecutive from 0, C nonincreasing within tolerance,
  /// phi <= c within tolerance.
  void validate() const;
};

/// Xi_{k-1} = sqrt(max(C_{k-1} - C_k, 0)) for k = 1..K. Negative
/// differences within tolerance are clamped to zero; larger increases
/// are a conformance failure reported by check_h1, not here.
std::vector<double> xi_sequence(const Trace& trace);

// ---------------------------------------------------------------------------
// Framework constants
// ---------------------------------------------------------------------------

/// Smallest positive integer m with
///   sqrt(tau) (m - k1 - 1) >= (1 + sqrt(1 - tau)) (2 k1 + 1) sqrt(m).
/// Linear scan from m = 1, capped at 1e6.
std::int64_t compute_m(double tau, std::int64_t k1);

/// c_hat1 = sqrt(m tau) - (1/2 + sqrt(1 - tau)) (2 k1 + 1); always >= 1/2
/// when m = compute_m(tau, k1).
inline double c_hat1(double tau, std::int64_t k1, std::int64_t m) {
  return std::sqrt(static_cast<double>(m) * tau) -
         (0.5 + std::sqrt(1.0 - tau)) * static_cast<double>(2 * k1 + 1);
}

/// c_hat = (B_bar / sqrt(tau) + 1) / 2.
inline double c_hat(double b_bar, double tau) {
  return 0.5 * (b_bar / std::sqrt(tau) + 1.0);
}

// ---------------------------------------------------------------------------
// KL profiles
// ---------------------------------------------------------------------------

/// Known Kurdyka-Lojasiewicz data of a test problem: desingularizer
/// phi(t) = c t^(1-theta) valid on a delta-neighborhood with level gap eta.
struct KlProfile {
  double theta = 0.5;                 // in [0,1)
  double c_coeff = 1.0;               // > 0
  std::optional<double> eta;          // nullopt = unbounded
  double delta = 1.0;                 // > 0

  void validate() const {
    if (!(theta >= 0.0 && theta < 1.0)) {
      throw std::invalid_argument("KlProfile: theta must lie in [0,1)");
    }
    if (!(c_coeff > 0.0)) {
      throw std::invalid_argument("KlProfile: c_coeff must be positive");
    }
    if (!(delta > 0.0)) {
      throw std::invalid_argument("KlProfile: delta must be positive");
    }
  }
};

}  // namespace zhd
