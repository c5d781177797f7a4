#include "zhd/conformance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace zhd {

PositiveSchedule PositiveSchedule::constant(double value) {
  if (!(value > 0.0)) {
    throw std::invalid_argument("PositiveSchedule::constant: value <= 0");
  }
  return {Kind::kConstant, value, 0.0};
}

PositiveSchedule PositiveSchedule::geometric(double scale, double rho) {
  if (!(scale > 0.0) || !(rho > 0.0 && rho < 1.0)) {
    throw std::invalid_argument("PositiveSchedule::geometric: bad parameters");
  }
  return {Kind::kGeometric, scale, rho};
}

PositiveSchedule PositiveSchedule::power(double scale, double exponent) {
  if (!(scale > 0.0)) {
    throw std::invalid_argument("PositiveSchedule::power: scale <= 0");
  }
  return {Kind::kPower, scale, exponent};
}

double PositiveSchedule::eval(std::int64_t k) const {
  if (k < 1) throw std::invalid_argument("PositiveSchedule: k must be >= 1");
  switch (kind) {
    case Kind::kConstant:
      return scale;
    case Kind::kGeometric:
      return scale * std::pow(shape, static_cast<double>(k));
    case Kind::kPower:
      return scale * std::pow(static_cast<double>(k), shape);
  }
  return scale;
}

bool PositiveSchedule::series_divergent() const {
  switch (kind) {
    case Kind::kConstant:
      return true;
    case Kind::kGeometric:
      return false;
    case Kind::kPower:
      return shape >= -1.0;
  }
  return false;
}

H1Verdict check_h1(const Trace& trace, double a_lower, double tau) {
  if (!(a_lower > 0.0)) {
    throw std::invalid_argument("check_h1: a_lower must be positive");
  }
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw std::invalid_argument("check_h1: tau must lie in (0,1]");
  }
  if (trace.records.size() < 2) {
    throw std::invalid_argument("check_h1: trace needs at least 2 records");
  }

  const double tol = merit_tol(trace.records.front().c);
  H1Verdict v;
  v.pass = true;
  v.worst_residual = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < trace.records.size(); ++k) {
    const TraceRecord& cur = trace.records[k];
    const TraceRecord& prev = trace.records[k - 1];

    const double residual =
        cur.phi + a_lower * cur.dx_norm * cur.dx_norm - prev.c;
    v.residuals.push_back(residual);
    v.worst_residual = std::max(v.worst_residual, residual);
    bool ok = residual <= tol;

    // Recover tau_k from C_k = (1 - tau_k) C_{k-1} + tau_k Phi(x^k).
    const double denom = prev.c - cur.phi;
    if (std::abs(denom) <= tol) {
      // Indeterminate: any tau_k reproduces the recursion.
      v.recovered_tau.push_back(std::numeric_limits<double>::quiet_NaN());
    } else {
      const double tau_k = (prev.c - cur.c) / denom;
      v.recovered_tau.push_back(tau_k);
      // The quotient loses ~eps*scale/|denom| digits to cancellation when
      // C_{k-1} and Phi(x^k) are close; widen the tolerance accordingly.
      const double scale = std::max({1.0, std::abs(prev.c), std::abs(cur.phi)});
      const double tau_tol =
          1e-8 + 64.0 * std::numeric_limits<double>::epsilon() * scale /
                     std::abs(denom);
      if (tau_k < tau - tau_tol || tau_k > 1.0 + tau_tol) ok = false;
    }

    if (!ok && v.pass) {
      v.pass = false;
      v.fail_k = static_cast<std::int64_t>(k);
    }
  }
  return v;
}

H2Verdict check_h2(const Trace& trace, std::int64_t k1,
                   const PositiveSchedule& b, const ErrorSchedule& eps,
                   const std::function<double(std::int64_t)>& a_seq) {
  if (k1 < 0) throw std::invalid_argument("check_h2: k1 must be nonnegative");
  const auto K = static_cast<std::int64_t>(trace.records.size()) - 1;
  const std::int64_t k_begin = std::max<std::int64_t>(k1, k1 + 1);
  const std::int64_t k_end = K - k1;

  H2Verdict v;
  v.k1_used = k1;
  v.pass = true;
  v.worst_residual = -std::numeric_limits<double>::infinity();
  const double tol = merit_tol(trace.records.front().c);

  for (std::int64_t k = k_begin; k <= k_end; ++k) {
    const auto& rec = trace.records[static_cast<std::size_t>(k)];
    if (!rec.witness_norm) {
      throw std::invalid_argument(
          "check_h2: missing witness norm at k=" + std::to_string(k) +
          " (the solver must record witness norms)");
    }
    double dx_sum = 0.0;
    double inv_sqrt_a_sum = 0.0;
    for (std::int64_t i = k - k1; i <= k + k1; ++i) {
      dx_sum += trace.records[static_cast<std::size_t>(i)].dx_norm;
      inv_sqrt_a_sum += 1.0 / std::sqrt(a_seq(i));
    }
    const double b_k = b.eval(k);
    const double bound = dx_sum / b_k + eps.eval(k);
    const double residual = *rec.witness_norm - bound;
    v.worst_residual = std::max(v.worst_residual, residual);
    if (residual > tol && v.pass) {
      v.pass = false;
      v.fail_k = k;
    }
    v.b_bar_estimate = std::max(v.b_bar_estimate, inv_sqrt_a_sum / b_k);
  }
  return v;
}

H3Verdict check_h3(const Trace& trace, std::int64_t window, double eps_cauchy,
                   double value_tol) {
  if (window < 2) throw std::invalid_argument("check_h3: window must be >= 2");
  const auto K = static_cast<std::int64_t>(trace.records.size());
  if (K < 2 * window) {
    throw std::invalid_argument("check_h3: trace shorter than 2*window");
  }

  H3Verdict v;
  const auto begin = static_cast<std::size_t>(K - window);
  double max_phi = -std::numeric_limits<double>::infinity();
  bool cauchy = true;
  for (std::size_t i = begin; i < trace.records.size(); ++i) {
    max_phi = std::max(max_phi, trace.records[i].phi);
    for (std::size_t j = i + 1; j < trace.records.size(); ++j) {
      if ((trace.records[i].x - trace.records[j].x).norm() > eps_cauchy) {
        cauchy = false;
      }
    }
  }
  v.window_gap = max_phi - trace.records.back().phi;
  v.status = (cauchy && v.window_gap <= value_tol)
                 ? H3Verdict::Status::kPass
                 : H3Verdict::Status::kInconclusive;
  return v;
}

std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>> split_k1_k2(
    const Trace& trace, std::int64_t m) {
  if (m < 1) throw std::invalid_argument("split_k1_k2: m must be >= 1");
  std::vector<std::int64_t> k1_set, k2_set;
  const auto K = static_cast<std::int64_t>(trace.records.size()) - 1;
  const double tol = merit_tol(trace.records.empty() ? 1.0 : trace.records.front().c);
  for (std::int64_t k = 0; k + m <= K; ++k) {
    const double phi_k = trace.records[static_cast<std::size_t>(k)].phi;
    const double c_km = trace.records[static_cast<std::size_t>(k + m)].c;
    if (phi_k <= c_km + tol) {
      k1_set.push_back(k);
    } else {
      k2_set.push_back(k);
    }
  }
  return {k1_set, k2_set};
}

namespace {

struct LsFit {
  double slope;
  double intercept;
  double r_squared;
};

LsFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
  const auto n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (intercept + slope * xs[i]);
    ss_res += e * e;
  }
  const double r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return {slope, intercept, r2};
}

// Truncate at the first nonpositive entry and apply the burn-in.
std::pair<std::size_t, std::size_t> fit_window(const std::vector<double>& dists,
                                               double burn_in_fraction) {
  std::size_t end = dists.size();
  for (std::size_t i = 0; i < dists.size(); ++i) {
    if (!(dists[i] > 0.0)) {
      end = i;
      break;
    }
  }
  const auto burn = static_cast<std::size_t>(burn_in_fraction *
                                             static_cast<double>(end));
  if (end - burn < 10) {
    throw std::invalid_argument(
        "rate fit: fewer than 10 points in the fit window");
  }
  return {burn, end};
}

}  // namespace

RateFit estimate_linear_rate(const std::vector<double>& dists,
                             double burn_in_fraction) {
  auto [burn, end] = fit_window(dists, burn_in_fraction);
  std::vector<double> xs, ys;
  for (std::size_t i = burn; i < end; ++i) {
    xs.push_back(static_cast<double>(i + 1));
    ys.push_back(std::log(dists[i]));
  }
  const LsFit fit = least_squares(xs, ys);
  RateFit r;
  r.regime = RateFit::Regime::kLinear;
  r.fitted = std::exp(fit.slope);
  r.r_squared = fit.r_squared;
  r.burn_in = static_cast<std::int64_t>(burn);
  r.window_begin = static_cast<std::int64_t>(burn);
  r.window_end = static_cast<std::int64_t>(end);
  return r;
}

RateFit estimate_sublinear_exponent(const std::vector<double>& dists,
                                    double burn_in_fraction) {
  auto [burn, end] = fit_window(dists, burn_in_fraction);
  std::vector<double> xs, ys;
  for (std::size_t i = burn; i < end; ++i) {
    xs.push_back(std::log(static_cast<double>(i + 1)));
    ys.push_back(std::log(dists[i]));
  }
  const LsFit fit = least_squares(xs, ys);
  RateFit r;
  r.regime = RateFit::Regime::kSublinear;
  r.fitted = fit.slope;
  r.r_squared = fit.r_squared;
  r.burn_in = static_cast<std::int64_t>(burn);
  r.window_begin = static_cast<std::int64_t>(burn);
  r.window_end = static_cast<std::int64_t>(end);
  return r;
}

RateRegime rate_oracle(const KlProfile& profile) {
  profile.validate();
  if (profile.theta == 0.0) {
    throw std::invalid_argument(
        "rate_oracle: theta = 0 (finite termination) is unsupported");
  }
  if (profile.theta <= 0.5) {
    return {RateFit::Regime::kLinear, std::nullopt};
  }
  return {RateFit::Regime::kSublinear,
          (1.0 - profile.theta) / (1.0 - 2.0 * profile.theta)};
}

Eq12Verdict check_eq12(const std::function<double(std::int64_t)>& a_seq,
                       const PositiveSchedule& b, const ErrorSchedule& eps,
                       std::int64_t k1, std::int64_t horizon) {
  if (k1 < 0) throw std::invalid_argument("check_eq12: k1 must be nonnegative");
  Eq12Verdict v;
  v.b_sum_divergent = b.series_divergent();
  v.eps_summable = true;  // all ErrorSchedule families are summable
  v.eps_series_bound = eps.series_bound();

  for (std::int64_t k = std::max<std::int64_t>(k1, 1); k <= horizon; ++k) {
    double inv_sqrt_a_sum = 0.0;
    for (std::int64_t i = k - k1; i <= k + k1; ++i) {
      inv_sqrt_a_sum += 1.0 / std::sqrt(a_seq(std::max<std::int64_t>(i, 1)));
    }
    v.b_bar_estimate = std::max(v.b_bar_estimate, inv_sqrt_a_sum / b.eval(k));
  }
  v.pass = v.b_sum_divergent && std::isfinite(v.b_bar_estimate) && v.eps_summable;
  return v;
}

}  // namespace zhd
