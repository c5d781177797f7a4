#include "zhd/core.hpp"

namespace zhd {

void Trace::validate() const {
  if (records.empty()) return;
  const double tol = merit_tol(records.front().c);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const TraceRecord& r = records[i];
    if (r.k != static_cast<std::int64_t>(i)) {
      throw std::invalid_argument("Trace: record indices must be consecutive from 0");
    }
    if (r.phi > r.c + tol) {
      throw std::invalid_argument("Trace: phi exceeds c at k=" + std::to_string(i));
    }
    if (i > 0) {
      if (r.c > records[i - 1].c + tol) {
        throw std::invalid_argument("Trace: C increases at k=" + std::to_string(i));
      }
      if (!(r.step > 0.0)) {
        throw std::invalid_argument("Trace: non-positive step at k=" + std::to_string(i));
      }
    }
    if (r.dx_norm < 0.0) {
      throw std::invalid_argument("Trace: negative dx_norm at k=" + std::to_string(i));
    }
  }
}

std::vector<double> xi_sequence(const Trace& trace) {
  std::vector<double> xi;
  if (trace.records.size() < 2) return xi;
  xi.reserve(trace.records.size() - 1);
  for (std::size_t k = 1; k < trace.records.size(); ++k) {
    const double diff = trace.records[k - 1].c - trace.records[k].c;
    xi.push_back(std::sqrt(std::max(diff, 0.0)));
  }
  return xi;
}

std::int64_t compute_m(double tau, std::int64_t k1) {
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw std::invalid_argument("compute_m: tau must lie in (0,1]");
  }
  if (k1 < 0) {
    throw std::invalid_argument("compute_m: k1 must be nonnegative");
  }
  constexpr std::int64_t kCap = 1000000;
  const double lhs_coeff = std::sqrt(tau);
  const double rhs_coeff =
      (1.0 + std::sqrt(1.0 - tau)) * static_cast<double>(2 * k1 + 1);
  for (std::int64_t m = 1; m <= kCap; ++m) {
    const double md = static_cast<double>(m);
    if (lhs_coeff * (md - static_cast<double>(k1) - 1.0) >=
        rhs_coeff * std::sqrt(md)) {
      return m;
    }
  }
  throw std::runtime_error("compute_m: no m found below cap 1e6");
}

}  // namespace zhd
