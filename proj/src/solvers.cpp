#include "zhd/solvers.hpp"

#include <cmath>
#include <limits>

namespace zhd {

BacktrackResult backtrack(
    const std::function<std::pair<bool, Trial>(double)>& accept, double step0,
    double beta, std::int64_t max_halvings) {
  if (!(step0 > 0.0)) {
    throw std::invalid_argument("backtrack: step0 must be positive");
  }
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("backtrack: beta must lie in (0,1)");
  }
  double step = step0;
  Trial last;
  for (std::int64_t l = 0; l <= max_halvings; ++l) {
    auto [accepted, trial] = accept(step);
    if (accepted) {
      return {step, std::move(trial.point), trial.value, l};
    }
    last = std::move(trial);
    step *= beta;
  }
  throw LineSearchError(
      "backtrack: no acceptable step within " + std::to_string(max_halvings) +
          " halvings (check smoothness assumptions or parameters)",
      step / beta, std::move(last));
}

namespace {

constexpr double kUnboundedGuard = 1e8;

double bb_step(const Vector& s, const Vector& y, double lo, double hi) {
  const double sy = s.dot(y);
  if (!(sy > 0.0)) return hi;
  return std::clamp(s.squaredNorm() / sy, lo, hi);
}

}  // namespace

Trace pgm_solve(const CompositeObjective& problem, const Vector& x0,
                const PgmParams& params) {
  params.validate();
  require_finite(x0, "pgm_solve x0");
  const double g0 = problem.nonsmooth.evaluate(x0);
  if (!std::isfinite(g0)) {
    throw std::invalid_argument("pgm_solve: x0 outside dom g");
  }

  Trace trace;
  trace.solver_params = {{"alpha", params.alpha},
                         {"beta", params.beta},
                         {"gamma_min", params.gamma_min},
                         {"gamma_max", params.gamma_max},
                         {"p_min", params.p_min},
                         {"p_k", params.p_k},
                         {"a_lower", params.alpha / (2.0 * params.gamma_max)},
                         {"tau", params.p_min},
                         {"k1", 0.0}};

  Vector x = x0;
  double theta = problem.value(x);
  Vector grad = problem.smooth.gradient(x);
  trace.records.push_back({0, x, theta, theta, 0.0, 0.0, std::nullopt, 0});

  ZhAveragerP averager(theta, params.p_min);
  Vector x_prev, grad_prev;
  bool have_prev = false;
  double gamma_lo = params.gamma_max;
  double lip_est = 0.0;

  for (std::int64_t k = 0; k < params.max_iters; ++k) {
    double gamma0 = params.gamma_max;
    if (params.gamma0_rule == Gamma0Rule::kBarzilaiBorwein && have_prev) {
      gamma0 = bb_step(x - x_prev, grad - grad_prev, params.gamma_min,
                       params.gamma_max);
    }

    const double c_k = averager.c_value();
    auto accept = [&](double gamma) -> std::pair<bool, Trial> {
      Vector cand = problem.nonsmooth.prox(gamma, x - gamma * grad);
      const double value = problem.value(cand);
      const double dx2 = (cand - x).squaredNorm();
      const bool ok = value <= c_k - params.alpha / (2.0 * gamma) * dx2;
      return {ok, Trial{std::move(cand), value}};
    };

    BacktrackResult bt;
    try {
      bt = backtrack(accept, gamma0, params.beta);
    } catch (const LineSearchError&) {
      trace.problem_id += ":line_search_failure";
      throw;
    }

    Vector grad_new = problem.smooth.gradient(bt.point);
    const double witness =
        pgm_witness(grad_new, grad, bt.point, x, bt.step).norm();
    const double dx = (bt.point - x).norm();
    gamma_lo = std::min(gamma_lo, bt.step);
    if (dx > 0.0) lip_est = std::max(lip_est, (grad_new - grad).norm() / dx);

    x_prev = std::move(x);
    grad_prev = std::move(grad);
    have_prev = true;
    x = std::move(bt.point);
    grad = std::move(grad_new);
    theta = bt.value;

    const double c_next = averager.update(theta, params.p_k);
    trace.records.push_back(
        {k + 1, x, theta, c_next, bt.step, dx, witness, bt.halvings});

    if (x.norm() > kUnboundedGuard) {
      trace.solver_params["unbounded_flag"] = 1.0;
      break;
    }
    if (witness <= params.stop_tol) break;
  }
  trace.solver_params["gamma_lower_observed"] = gamma_lo;
  trace.solver_params["lipschitz_est"] = lip_est;
  trace.solver_params["h2_multiplier"] = 1.0 / gamma_lo + lip_est;
  return trace;
}

Trace rgm_solve(const ManifoldObjective& problem, const Vector& x0,
                const RgmParams& params) {
  params.validate();
  problem.manifold.validate_point(x0);

  Trace trace;
  trace.solver_params = {{"alpha_m", params.alpha_m},
                         {"alpha_M", params.alpha_M},
                         {"rho1", params.rho1},
                         {"rho2", params.rho2},
                         {"beta", params.beta},
                         {"p_min", params.p_min},
                         {"p_k", params.p_k},
                         {"c1", params.c1},
                         {"c2", params.c2},
                         {"tau", params.p_min},
                         {"a_lower", params.rho1 * params.c1 /
                                         (params.c2 * params.c2 * params.alpha_M)},
                         {"k1", 1.0}};

  Vector x = x0;
  double fval = problem.value(x);
  Vector grad = problem.riemannian_gradient(x);
  trace.records.push_back({0, x, fval, fval, 0.0, 0.0, grad.norm(), 0});

  ZhAveragerP averager(fval, params.p_min);
  double alpha_lo = params.alpha_M;

  for (std::int64_t k = 0; k < params.max_iters; ++k) {
    if (grad.norm() <= params.stop_tol) break;
    const Vector z = -grad;  // c1 = c2 = 1 direction
    const double gz = grad.dot(z);
    const double z2 = z.squaredNorm();
    const double c_k = averager.c_value();

    auto accept = [&](double alpha) -> std::pair<bool, Trial> {
      Vector cand = sphere_retract(x, alpha * z);
      const double value = problem.value(cand);
      const bool ok = value <=
          c_k + params.rho1 * alpha * gz - params.rho2 * alpha * alpha * z2;
      return {ok, Trial{std::move(cand), value}};
    };

    BacktrackResult bt = backtrack(accept, params.alpha_M, params.beta);
    alpha_lo = std::min(alpha_lo, bt.step);
    const double dx = (bt.point - x).norm();
    x = std::move(bt.point);
    fval = bt.value;
    grad = problem.riemannian_gradient(x);

    const double c_next = averager.update(fval, params.p_k);
    trace.records.push_back(
        {k + 1, x, fval, c_next, bt.step, dx, grad.norm(), bt.halvings});
  }
  trace.solver_params["alpha_lower_observed"] = alpha_lo;
  trace.solver_params["h2_multiplier"] = 2.0 / (params.c1 * alpha_lo);
  return trace;
}

Trace nlsa_solve(const SmoothFunction& f, const Vector& x0,
                 const NlsaParams& params) {
  params.validate();
  require_finite(x0, "nlsa_solve x0");

  Trace trace;
  trace.solver_params = {{"delta", params.delta},
                         {"mu", params.mu},
                         {"eta_min", params.eta_min},
                         {"eta_max", params.eta_max},
                         {"eta_k", params.eta_k},
                         {"beta", params.beta},
                         {"c1", params.c1},
                         {"c2", params.c2},
                         {"tau", 1.0 - params.eta_max},
                         {"a_lower", params.delta * params.c1 /
                                         (params.c2 * params.c2 * params.mu)},
                         {"k1", 1.0}};

  Vector x = x0;
  double fval = f.evaluate(x);
  Vector grad = f.gradient(x);
  trace.records.push_back({0, x, fval, fval, 0.0, 0.0, grad.norm(), 0});

  ZhAveragerQ averager(fval, params.eta_min, params.eta_max);
  Vector x_prev, grad_prev;
  bool have_prev = false;
  double alpha_lo = params.mu;

  for (std::int64_t k = 0; k < params.max_iters; ++k) {
    if (grad.norm() <= params.stop_tol) break;
    const Vector d = -grad;  // c1 = c2 = 1 direction
    const double gd = grad.dot(d);
    const double c_k = averager.c_value();

    double step0 = params.mu;
    if (params.bb_step0 && have_prev) {
      step0 = std::min(params.mu,
                       bb_step(x - x_prev, grad - grad_prev, 1e-12, params.mu));
    }

    auto accept = [&](double alpha) -> std::pair<bool, Trial> {
      Vector cand = x + alpha * d;
      const double value = f.evaluate(cand);
      const bool ok = value <= c_k + params.delta * alpha * gd;
      return {ok, Trial{std::move(cand), value}};
    };

    BacktrackResult bt = backtrack(accept, step0, params.beta);
    alpha_lo = std::min(alpha_lo, bt.step);
    const double dx = (bt.point - x).norm();
    x_prev = std::move(x);
    grad_prev = std::move(grad);
    have_prev = true;
    x = std::move(bt.point);
    fval = bt.value;
    grad = f.gradient(x);

    const double c_next = averager.update(fval, params.eta_k).c;
    trace.records.push_back(
        {k + 1, x, fval, c_next, bt.step, dx, grad.norm(), bt.halvings});

    if (x.norm() > kUnboundedGuard) {
      trace.solver_params["unbounded_flag"] = 1.0;
      break;
    }
  }
  trace.solver_params["alpha_lower_observed"] = alpha_lo;
  trace.solver_params["h2_multiplier"] = 1.0 / (params.c1 * alpha_lo);
  return trace;
}

}  // namespace zhd
