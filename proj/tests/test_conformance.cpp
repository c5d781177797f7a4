#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "zhd/conformance.hpp"
#include "zhd/solvers.hpp"

#include <cmath>
#include <random>

using namespace zhd;

namespace {

CompositeObjective small_lasso() {
  SmoothFunction f;
  Vector b(2);
  b << 2.0, 0.0;
  f.evaluate = [b](const Vector& x) { return 0.5 * (x - b).squaredNorm(); };
  f.gradient = [b](const Vector& x) { return Vector(x - b); };
  ProxableFunction g;
  g.evaluate = [](const Vector& x) { return x.lpNorm<1>(); };
  g.prox = [](double gamma, const Vector& z) { return prox_l1(gamma, 1.0, z); };
  return {std::move(f), std::move(g), std::nullopt};
}

Trace lasso_trace() {
  PgmParams params;
  params.gamma_max = 0.4;
  params.stop_tol = 1e-10;
  Vector x0(2);
  x0 << 1.5, 1.5;
  return pgm_solve(small_lasso(), x0, params);
}

}  // namespace

TEST_CASE("H1 passes on a solver trace with the documented constants") {
  const Trace t = lasso_trace();
  const H1Verdict v = check_h1(t, t.solver_params.at("a_lower"),
                               t.solver_params.at("tau"));
  CHECK(v.pass);
  CHECK_FALSE(v.fail_k.has_value());
  CHECK(v.worst_residual <= 0.0);
  REQUIRE(v.recovered_tau.size() == t.records.size() - 1);
  for (double tau : v.recovered_tau) {
    if (!std::isnan(tau)) CHECK(tau == doctest::Approx(0.05).epsilon(1e-4));
  }
}

TEST_CASE("H1 fails when the merit column is corrupted") {
  Trace t = lasso_trace();
  t.records[10].c += 5.0;
  const H1Verdict v = check_h1(t, t.solver_params.at("a_lower"),
                               t.solver_params.at("tau"));
  CHECK_FALSE(v.pass);
  REQUIRE(v.fail_k.has_value());
  CHECK(*v.fail_k <= 11);
}

TEST_CASE("H1 fails when the objective jumps above the previous merit") {
  Trace t = lasso_trace();
  t.records[5].phi = t.records[4].c + 1.0;
  const H1Verdict v = check_h1(t, t.solver_params.at("a_lower"),
                               t.solver_params.at("tau"));
  CHECK_FALSE(v.pass);
  CHECK(*v.fail_k == 5);
  CHECK(v.worst_residual >= 1.0 - 1e-9);
}

TEST_CASE("H2 passes with the solver multiplier and fails when corrupted") {
  const Trace t = lasso_trace();
  const double a_lower = t.solver_params.at("a_lower");
  const PositiveSchedule b =
      h2_divisor_from_multiplier(t.solver_params.at("h2_multiplier"));
  const auto a_seq = [a_lower](std::int64_t) { return a_lower; };

  const H2Verdict ok = check_h2(t, 0, b, ErrorSchedule::zero(), a_seq);
  CHECK(ok.pass);
  CHECK(ok.k1_used == 0);
  CHECK(ok.b_bar_estimate > 0.0);
  CHECK(std::isfinite(ok.b_bar_estimate));

  Trace bad = t;
  *bad.records[7].witness_norm += 100.0;
  const H2Verdict fail = check_h2(bad, 0, b, ErrorSchedule::zero(), a_seq);
  CHECK_FALSE(fail.pass);
  CHECK(*fail.fail_k == 7);

  Trace missing = t;
  missing.records[7].witness_norm.reset();
  CHECK_THROWS_AS(check_h2(missing, 0, b, ErrorSchedule::zero(), a_seq),
                  std::invalid_argument);
}

TEST_CASE("H2 windowing with k1 = 1 sums three displacements") {
  // Hand-built 4-record trace: with k1 = 1 only k = 2 is checkable, and
  // its window sums dx_1 + dx_2 + dx_3 = 3. A witness of exactly 3 holds
  // with multiplier 1 and fails with multiplier 0.9.
  Trace t;
  for (int k = 0; k < 4; ++k) {
    TraceRecord r;
    r.k = k;
    r.x = Vector::Constant(1, 4.0 - k);
    r.phi = 4.0 - k;
    r.c = 4.0 - k;
    r.step = k == 0 ? 0.0 : 1.0;
    r.dx_norm = k == 0 ? 0.0 : 1.0;
    r.witness_norm = 3.0;
    t.records.push_back(r);
  }
  const auto a_seq = [](std::int64_t) { return 1.0; };
  CHECK(check_h2(t, 1, h2_divisor_from_multiplier(1.0), ErrorSchedule::zero(),
                 a_seq)
            .pass);
  CHECK_FALSE(check_h2(t, 1, h2_divisor_from_multiplier(0.9),
                       ErrorSchedule::zero(), a_seq)
                  .pass);
  // a positive error schedule absorbs the shortfall
  CHECK(check_h2(t, 1, h2_divisor_from_multiplier(0.9),
                 ErrorSchedule::geometric(2.0, 0.5), a_seq)
            .pass);
}

TEST_CASE("H3 surrogate: converged tail passes, truncated run does not") {
  const Trace t = lasso_trace();
  const H3Verdict good = check_h3(t, 5);
  CHECK(good.status == H3Verdict::Status::kPass);
  CHECK(good.surrogate);
  CHECK(good.window_gap >= 0.0);

  Trace early = t;
  early.records.resize(12);  // still far from the minimizer
  const H3Verdict bad = check_h3(early, 5);
  CHECK(bad.status == H3Verdict::Status::kInconclusive);

  CHECK_THROWS_AS(check_h3(t, 1), std::invalid_argument);
}

TEST_CASE("K1/K2 split is exhaustive, disjoint, and deterministic") {
  const Trace t = lasso_trace();
  const std::int64_t m = 5;
  const auto [k1a, k2a] = split_k1_k2(t, m);
  const auto [k1b, k2b] = split_k1_k2(t, m);
  CHECK(k1a == k1b);
  CHECK(k2a == k2b);
  const auto K = static_cast<std::int64_t>(t.records.size()) - 1;
  CHECK(static_cast<std::int64_t>(k1a.size() + k2a.size()) == K - m + 1);
  std::vector<bool> seen(static_cast<std::size_t>(K + 1), false);
  for (auto k : k1a) seen[static_cast<std::size_t>(k)] = true;
  for (auto k : k2a) {
    CHECK_FALSE(seen[static_cast<std::size_t>(k)]);
    seen[static_cast<std::size_t>(k)] = true;
  }
}

TEST_CASE("linear rate fit recovers an exact geometric decay") {
  std::vector<double> dists;
  for (int k = 0; k < 60; ++k) dists.push_back(std::pow(0.5, k));
  const RateFit fit = estimate_linear_rate(dists, 0.1);
  CHECK(fit.regime == RateFit::Regime::kLinear);
  CHECK(fit.fitted == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("linear rate fit tolerates multiplicative noise") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> noise(-0.01, 0.01);
  std::vector<double> dists;
  for (int k = 0; k < 200; ++k) {
    dists.push_back(3.0 * std::pow(0.9, k) * (1.0 + noise(rng)));
  }
  const RateFit fit = estimate_linear_rate(dists, 0.1);
  CHECK(fit.fitted >= 0.885);
  CHECK(fit.fitted <= 0.915);
  CHECK(fit.r_squared >= 0.999);
}

TEST_CASE("sublinear fit recovers a power-law slope") {
  std::vector<double> dists;
  for (int k = 1; k <= 500; ++k) {
    dists.push_back(std::pow(static_cast<double>(k), -0.5));
  }
  const RateFit fit = estimate_sublinear_exponent(dists, 0.1);
  CHECK(fit.regime == RateFit::Regime::kSublinear);
  CHECK(fit.fitted == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rate fits truncate at the first exact zero") {
  std::vector<double> dists;
  for (int k = 0; k < 40; ++k) dists.push_back(std::pow(0.25, k));
  dists[30] = 0.0;  // converged exactly; the tail is unusable
  const RateFit fit = estimate_linear_rate(dists, 0.0);
  CHECK(fit.window_end == 30);
  CHECK(fit.fitted == doctest::Approx(0.25).epsilon(1e-12));

  std::vector<double> too_short(8, 1.0);
  CHECK_THROWS_AS(estimate_linear_rate(too_short, 0.0), std::invalid_argument);
}

TEST_CASE("rate oracle maps the KL exponent to the predicted regime") {
  KlProfile p;
  p.theta = 0.3;
  CHECK(rate_oracle(p).regime == RateFit::Regime::kLinear);
  CHECK_FALSE(rate_oracle(p).expected_slope.has_value());

  p.theta = 0.75;
  auto r = rate_oracle(p);
  CHECK(r.regime == RateFit::Regime::kSublinear);
  CHECK(*r.expected_slope == doctest::Approx(-0.5));

  p.theta = 0.9;
  CHECK(*rate_oracle(p).expected_slope == doctest::Approx(-0.125));

  p.theta = 0.0;
  CHECK_THROWS_AS(rate_oracle(p), std::invalid_argument);
}

TEST_CASE("series conditions: constants pass, geometric b fails divergence") {
  const auto a_seq = [](std::int64_t) { return 4.0; };
  const Eq12Verdict ok = check_eq12(a_seq, PositiveSchedule::constant(2.0),
                                    ErrorSchedule::zero(), 0);
  CHECK(ok.pass);
  CHECK(ok.b_sum_divergent);
  // sum over the window {k} of 1/sqrt(a) = 1/2, divided by b_k = 2
  CHECK(ok.b_bar_estimate == doctest::Approx(0.25));
  CHECK(ok.eps_summable);
  CHECK(ok.eps_series_bound == 0.0);

  const Eq12Verdict geo = check_eq12(a_seq, PositiveSchedule::geometric(1.0, 0.5),
                                     ErrorSchedule::zero(), 0);
  CHECK_FALSE(geo.pass);
  CHECK_FALSE(geo.b_sum_divergent);

  // harmonic-type power schedule still diverges
  CHECK(PositiveSchedule::power(1.0, -1.0).series_divergent());
  CHECK_FALSE(PositiveSchedule::power(1.0, -1.5).series_divergent());
}

TEST_CASE("series conditions on the solver's own identifications") {
  const Trace t = lasso_trace();
  const double a_lower = t.solver_params.at("a_lower");
  const double mult = t.solver_params.at("h2_multiplier");
  const Eq12Verdict v =
      check_eq12([a_lower](std::int64_t) { return a_lower; },
                 h2_divisor_from_multiplier(mult), ErrorSchedule::zero(), 0);
  CHECK(v.pass);
  CHECK(v.b_bar_estimate == doctest::Approx(mult / std::sqrt(a_lower)));
}

TEST_CASE("xi sequence squares back to the merit decrements") {
  const Trace t = lasso_trace();
  const auto xi = xi_sequence(t);
  REQUIRE(xi.size() == t.records.size() - 1);
  for (std::size_t k = 1; k < t.records.size(); ++k) {
    const double drop = t.records[k - 1].c - t.records[k].c;
    CHECK(xi[k - 1] * xi[k - 1] == doctest::Approx(std::max(drop, 0.0))
                                       .epsilon(1e-10));
  }
}
