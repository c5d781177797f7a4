#pragma once

#include "zhd/core.hpp"
#include "zhd/problems.hpp"

#include <functional>
#include <stdexcept>

namespace zhd {

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

enum class Gamma0Rule { kConstant, kBarzilaiBorwein };

struct PgmParams {
  double gamma_min = 1e-6;
  double gamma_max = 1.0;
  double alpha = 0.5;       // in (0,1)
  double beta = 0.5;        // backtrack factor, in (0,1)
  double p_min = 0.05;      // in (0,1]
  double p_k = 0.05;        // constant p_k in [p_min, 1]
  Gamma0Rule gamma0_rule = Gamma0Rule::kConstant;
  std::int64_t max_iters = 10000;
  double stop_tol = 1e-8;

  void validate() const {
    if (!(0.0 < gamma_min && gamma_min <= gamma_max)) {
      throw std::invalid_argument("PgmParams: need 0 < gamma_min <= gamma_max");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
      throw std::invalid_argument("PgmParams: alpha must lie in (0,1)");
    }
    if (!(beta > 0.0 && beta < 1.0)) {
      throw std::invalid_argument("PgmParams: beta must lie in (0,1)");
    }
    if (!(p_min > 0.0 && p_min <= 1.0)) {
      throw std::invalid_argument("PgmParams: p_min must lie in (0,1]");
    }
    if (!(p_k >= p_min && p_k <= 1.0)) {
      throw std::invalid_argument("PgmParams: p_k must lie in [p_min, 1]");
    }
    if (!(stop_tol > 0.0)) {
      throw std::invalid_argument("PgmParams: stop_tol must be positive");
    }
    if (max_iters < 1) {
      throw std::invalid_argument("PgmParams: max_iters must be >= 1");
    }
  }
};

struct RgmParams {
  double alpha_m = 1e-6;
  double alpha_M = 1.0;
  double rho1 = 1e-4;       // in (0,1)
  double rho2 = 0.0;        // in [0,1)
  double beta = 0.5;
  double p_min = 0.05;
  double p_k = 0.05;
  double c1 = 1.0;          // direction constants, z = -grad f by default
  double c2 = 1.0;
  std::int64_t max_iters = 10000;
  double stop_tol = 1e-8;

  void validate() const {
    if (!(0.0 < alpha_m && alpha_m <= alpha_M)) {
      throw std::invalid_argument("RgmParams: need 0 < alpha_m <= alpha_M");
    }
    if (!(rho1 > 0.0 && rho1 < 1.0)) {
      throw std::invalid_argument("RgmParams: rho1 must lie in (0,1)");
    }
    if (!(rho2 >= 0.0 && rho2 < 1.0)) {
      throw std::invalid_argument("RgmParams: rho2 must lie in [0,1)");
    }
    if (!(beta > 0.0 && beta < 1.0)) {
      throw std::invalid_argument("RgmParams: beta must lie in (0,1)");
    }
    if (!(p_min > 0.0 && p_min <= 1.0)) {
      throw std::invalid_argument("RgmParams: p_min must lie in (0,1]");
    }
    if (!(p_k >= p_min && p_k <= 1.0)) {
      throw std::invalid_argument("RgmParams: p_k must lie in [p_min, 1]");
    }
    if (!(c1 > 0.0 && c2 > 0.0)) {
      throw std::invalid_argument("RgmParams: c1, c2 must be positive");
    }
    if (!(stop_tol > 0.0)) {
      throw std::invalid_argument("RgmParams: stop_tol must be positive");
    }
  }
};

struct NlsaParams {
  double delta = 1e-4;      // Armijo constant, in (0,1)
  double mu = 1.0;          // steplength cap
  double eta_min = 0.0;
  double eta_max = 0.85;    // must be < 1
  double beta = 0.5;
  double eta_k = 0.85;      // constant eta_k in [eta_min, eta_max]
  double c1 = 1.0;
  double c2 = 1.0;
  bool bb_step0 = false;    // spectral initial trial step, clipped to (0, mu]
  std::int64_t max_iters = 20000;
  double stop_tol = 1e-6;

  void validate() const {
    if (!(delta > 0.0 && delta < 1.0)) {
      throw std::invalid_argument("NlsaParams: delta must lie in (0,1)");
    }
    if (!(mu > 0.0)) {
      throw std::invalid_argument("NlsaParams: mu must be positive");
    }
    if (!(eta_min >= 0.0 && eta_min <= eta_max && eta_max < 1.0)) {
      throw std::invalid_argument("NlsaParams: need 0 <= eta_min <= eta_max < 1");
    }
    if (!(eta_k >= eta_min && eta_k <= eta_max)) {
      throw std::invalid_argument("NlsaParams: eta_k outside [eta_min, eta_max]");
    }
    if (!(beta > 0.0 && beta < 1.0)) {
      throw std::invalid_argument("NlsaParams: beta must lie in (0,1)");
    }
    if (!(stop_tol > 0.0)) {
      throw std::invalid_argument("NlsaParams: stop_tol must be positive");
    }
  }
};

// ---------------------------------------------------------------------------
// Backtracking engine
// ---------------------------------------------------------------------------

struct Trial {
  Vector point;
  double value = 0.0;
};

struct BacktrackResult {
  double step = 0.0;
  Vector point;
  double value = 0.0;
  std::int64_t halvings = 0;
};

/// Thrown when no step in {step0 beta^l} is accepted within max_halvings.
/// Carries the last rejected trial.
class LineSearchError : public std::runtime_error {
 public:
  LineSearchError(std::string what, double last_step, Trial last_trial)
      : std::runtime_error(std::move(what)),
        last_step(last_step),
        last_trial(std::move(last_trial)) {}
  double last_step;
  Trial last_trial;
};

/// Returns the first l in {0,1,...} with accept(step0 beta^l) accepted,
/// together with that trial. max_halvings defaults to 60: below that,
/// doubles cannot resolve further halving.
BacktrackResult backtrack(
    const std::function<std::pair<bool, Trial>(double)>& accept, double step0,
    double beta, std::int64_t max_halvings = 60);

// ---------------------------------------------------------------------------
// Witness
// ---------------------------------------------------------------------------

/// w^{k+1} = grad f(x^{k+1}) - grad f(x^k) - (1/gamma_k)(x^{k+1} - x^k),
/// an explicit element of the subdifferential of Theta at x^{k+1}.
inline Vector pgm_witness(const Vector& grad_new, const Vector& grad_old,
                          const Vector& x_new, const Vector& x_old,
                          double gamma) {
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("pgm_witness: gamma must be positive");
  }
  return grad_new - grad_old - (x_new - x_old) / gamma;
}

// ---------------------------------------------------------------------------
// Solvers
// ---------------------------------------------------------------------------

/// Nonmonotone proximal gradient: prox step with backtracking against the
/// averaged merit C_k, stopping at witness norm <= stop_tol or max_iters.
/// Throws if x0 is outside dom g; a line-search failure carries the
/// trace accumulated so far.
Trace pgm_solve(const CompositeObjective& problem, const Vector& x0,
                const PgmParams& params);

/// Nonmonotone Riemannian gradient on the unit sphere with z = -grad f,
/// stopping at ||grad f|| <= stop_tol or max_iters.
Trace rgm_solve(const ManifoldObjective& problem, const Vector& x0,
                const RgmParams& params);

/// Smooth nonmonotone line-search method with d = -grad f and the Q-form
/// merit recursion, stopping at ||grad f|| <= stop_tol or max_iters.
Trace nlsa_solve(const SmoothFunction& f, const Vector& x0,
                 const NlsaParams& params);

}  // namespace zhd
