#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

#include "aoi/expoly.hpp"
#include "aoi/params.hpp"

namespace aoi {

namespace detail {

// sum_{i=0}^{J} x^i / i!  (empty for J < 0), built by the recurrence
// term_i = term_{i-1} * x / i so no explicit factorials appear.
inline double poisson_partial_sum(double x, int J) {
  if (J < 0) return 0.0;
  double term = 1.0, sum = 1.0;
  for (int i = 1; i <= J; ++i) {
    term *= x / i;
    sum += term;
  }
  return sum;
}

inline double pow_i(double x, int n) { return std::pow(x, static_cast<double>(n)); }

inline void require_negligible_service(const SystemParams& p) {
  if (p.mu)
    throw InvalidRate("closed forms require the negligible-service-time regime (no mu)");
}

}  // namespace detail

// Arrival rate of valid updates, lambda (1-theta^(K+B)) / (1-theta^(K+B+1)).
inline double fcfs_valid_rate(const SystemParams& p) {
  detail::require_negligible_service(p);
  const double th = p.theta();
  const double thKB = detail::pow_i(th, p.K + p.B);
  return p.lambda * (1.0 - thKB) / (1.0 - thKB * th);
}

// Peak-AoI distribution. All theta^(-B) denominators are multiplied through
// by theta^B, so the common denominator is 1 - theta^(K+B).
inline ExpPolyDist fcfs_peak_cdf(const SystemParams& p) {
  detail::require_negligible_service(p);
  const double th = p.theta();
  const double thB = detail::pow_i(th, p.B);
  const double D = 1.0 - detail::pow_i(th, p.K + p.B);

  ExpPolyDist d;
  d.atom_at_zero = 0.0;
  d.terms.reserve(2 * p.K + 2);
  d.terms.push_back({1.0 / D, 0, p.lambda});
  double lam_n = 1.0;  // lambda^n
  for (int n = 1; n <= p.K; ++n) {
    lam_n *= p.lambda;
    d.terms.push_back({thB / th * lam_n / D, n, p.r});
  }
  const double thKB = detail::pow_i(th, p.K + p.B);
  double r_n = 1.0;  // r^n
  for (int n = 0; n <= p.K; ++n) {
    d.terms.push_back({-thKB * r_n / D, n, p.r});
    r_n *= p.r;
  }
  return d;
}

// Sojourn-time distribution; the atom at zero is the chance of finding a
// non-empty battery.
inline ExpPolyDist fcfs_sojourn_cdf(const SystemParams& p) {
  detail::require_negligible_service(p);
  const double th = p.theta();
  const double thB = detail::pow_i(th, p.B);
  const double thK = detail::pow_i(th, p.K);
  const double D = 1.0 - thK * thB;

  ExpPolyDist d;
  d.atom_at_zero = 1.0 - (1.0 - thK) * thB / D;
  d.terms.reserve(2 * p.K + 2);
  double lam_n = 1.0, r_n = 1.0;
  for (int n = 0; n <= p.K; ++n) {
    d.terms.push_back({thB * lam_n / D, n, p.r});
    d.terms.push_back({-thK * thB * r_n / D, n, p.r});
    lam_n *= p.lambda;
    r_n *= p.r;
  }
  return d;
}

inline UpdateProcessStats fcfs_stats(const SystemParams& p) {
  return {fcfs_valid_rate(p), fcfs_peak_cdf(p), fcfs_sojourn_cdf(p)};
}

// Average AoI under FCFS.
inline double fcfs_avg_aoi(const SystemParams& p) {
  detail::require_negligible_service(p);
  const double th = p.theta();
  const double thB = detail::pow_i(th, p.B);
  const double thK = detail::pow_i(th, p.K);
  const double D = 1.0 - thK * thB * th;  // theta^B * (theta^-B - theta^(K+1))
  // theta^(K-1) at K=0 really is theta^(-1)
  const double bracket =
      -p.K * thK + (1.0 + thK / th - 3.0 * thK + thK * th) / (1.0 - th);
  return 1.0 / p.lambda + (th / p.r) * thB / D * bracket;
}

// Average exponential penalty under FCFS; the alpha = r - lambda branch is
// the analytic limit of the generic one and is used near the pole.
inline double fcfs_avg_exp_penalty(const SystemParams& p, double alpha) {
  detail::require_negligible_service(p);
  if (alpha == 0.0) throw PenaltyDiverges("alpha must be nonzero");
  if (alpha >= p.lambda)
    throw PenaltyDiverges("alpha must be < lambda for a finite exponential penalty");
  const double th = p.theta();
  const double thB = detail::pow_i(th, p.B);
  const double D = 1.0 - detail::pow_i(th, p.K + p.B + 1);
  const double thK2 = detail::pow_i(th, p.K + 2);

  if (std::abs(alpha - (p.r - p.lambda)) < 1e-7 * p.r) {
    const double bracket = (thK2 - 2.0 * th + 1.0) / ((2.0 * th - 1.0) * (1.0 - th)) +
                           p.K / th;
    return 1.0 / (p.lambda - alpha) + (1.0 / p.r) * thB / D * bracket;
  }
  const double ratio = detail::pow_i(p.lambda / (p.r - alpha), p.K + 1);
  const double bracket = thK2 / (p.lambda - alpha) +
                         (1.0 - th) * (1.0 - ratio) / (p.r - alpha - p.lambda) -
                         1.0 / (p.r - alpha);
  return 1.0 / (p.lambda - alpha) + (p.r / alpha) * thB / D * bracket;
}

// AoI threshold-violation probability under FCFS.
inline double fcfs_violation_prob(const SystemParams& p, double beta) {
  detail::require_negligible_service(p);
  if (beta < 0.0) throw UnsupportedPenalty("beta must be >= 0");
  if (beta == 0.0) return 1.0;  // AoI is positive almost surely
  const double th = p.theta();
  const double thB = detail::pow_i(th, p.B);
  const double thK1 = detail::pow_i(th, p.K + 1);
  const double D = 1.0 - thK1 * thB;
  const double e_lam = std::exp(-p.lambda * beta);
  const double e_r = std::exp(-p.r * beta);
  const double sum_lam = detail::poisson_partial_sum(p.lambda * beta, p.K);
  const double sum_r = detail::poisson_partial_sum(p.r * beta, p.K);
  const double c = e_lam + thB / D * (e_r * sum_lam - thK1 * e_r * sum_r +
                                      e_lam * thK1 - e_r);
  return std::clamp(c, 0.0, 1.0);
}

// (peak tail, AoI violation) at the same threshold; the first upper-bounds
// the second.
inline std::pair<double, double> fcfs_peak_violation_bound_check(
    const SystemParams& p, double beta) {
  const double peak_tail =
      beta <= 0.0 ? 1.0 : std::clamp(fcfs_peak_cdf(p).survivor(beta), 0.0, 1.0);
  return {peak_tail, fcfs_violation_prob(p, beta)};
}

// Smallest battery capacity whose FCFS average AoI is <= delta_max. The
// real-valued sizing formula seeds the search; the integer answer is pinned
// by bracketing against fcfs_avg_aoi.
inline int min_battery_for_aoi(SystemParams p, double delta_max) {
  p.B = 1;
  validate_params(p);
  detail::require_negligible_service(p);
  if (!(delta_max > 0.0)) throw Infeasible("delta_max must be > 0");
  if (delta_max <= 1.0 / p.lambda)
    throw Infeasible("average AoI cannot go below 1/lambda for any battery");

  const double th = p.theta();
  const double thK = detail::pow_i(th, p.K);
  const double num = p.lambda * delta_max - 1.0;
  const double den = p.lambda * thK * delta_max +
                     (-p.K * thK - thK + (1.0 - thK) / (1.0 - th)) * th * th;
  const double arg = num / den;
  if (!(arg > 0.0))
    throw DegenerateArgument("delta_max is met by any battery capacity >= 1");

  double b_real = std::log(arg) / std::log(th);
  int B = std::max(1, static_cast<int>(std::ceil(b_real - 1e-9)));
  B = std::min(B, kMaxCapacity);

  auto aoi_at = [&](int b) {
    SystemParams q = p;
    q.B = b;
    return fcfs_avg_aoi(q);
  };
  while (B < kMaxCapacity && aoi_at(B) > delta_max) ++B;
  if (aoi_at(B) > delta_max)
    throw Infeasible("no battery capacity within the cap reaches delta_max");
  while (B > 1 && aoi_at(B - 1) <= delta_max) --B;
  return B;
}

}  // namespace aoi
