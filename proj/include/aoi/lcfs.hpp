#pragma once

#include <algorithm>
#include <cmath>

#include "aoi/expoly.hpp"
#include "aoi/fcfs.hpp"
#include "aoi/params.hpp"

namespace aoi {

namespace detail {

// theta^B * [(theta^-B - 1)(1 + theta) + (1 - theta^(K+1))], the common
// stabilized denominator of the Lemma 3/4 expressions.
inline double lcfs_denominator(double th, int K, int B) {
  const double thB = pow_i(th, B);
  return (1.0 - thB) * (1.0 + th) + thB * (1.0 - pow_i(th, K + 1));
}

}  // namespace detail

// Arrival rate of valid updates under LCFS. The displayed lemma omits the
// leading lambda factor; this is the appendix (per-packet probability times
// lambda) form, which the simulator confirms.
inline double lcfs_valid_rate(const SystemParams& p) {
  detail::require_negligible_service(p);
  const double th = p.theta();
  const double N = detail::lcfs_denominator(th, p.K, p.B);
  const double D = 1.0 - detail::pow_i(th, p.K + p.B + 1);  // theta^B (theta^-B - theta^(K+1))
  return p.lambda * N / (D * (1.0 + th));
}

// Sojourn law: an atom at zero plus one exponential(lambda + r) tail.
inline ExpPolyDist lcfs_sojourn_cdf(const SystemParams& p) {
  detail::require_negligible_service(p);
  const double th = p.theta();
  const double thB = detail::pow_i(th, p.B);
  const double N = detail::lcfs_denominator(th, p.K, p.B);
  const double scale = thB * (1.0 - detail::pow_i(th, p.K + 1)) / N;

  ExpPolyDist d;
  d.atom_at_zero = 1.0 - scale;
  d.terms.push_back({scale, 0, p.lambda + p.r});
  return d;
}

// Peak-AoI law: three exponential groups with rates lambda, r and lambda+r.
// The (r theta a)^(k+1)/k! group becomes power k+1 with coefficient scaled
// by (k+1) to fit the t^n/n! convention.
inline ExpPolyDist lcfs_peak_cdf(const SystemParams& p) {
  detail::require_negligible_service(p);
  const double th = p.theta();
  const double thB = detail::pow_i(th, p.B);
  const double thK1 = detail::pow_i(th, p.K + 1);
  const double N = detail::lcfs_denominator(th, p.K, p.B);
  const double one_th = 1.0 + th;

  ExpPolyDist d;
  d.atom_at_zero = 0.0;
  d.terms.reserve(2 * p.K + 5);

  // e^{-lambda a} group
  d.terms.push_back({(1.0 - detail::pow_i(th, p.K + p.B + 1)) * one_th / N, 0,
                     p.lambda});

  // e^{-r a} group
  const double c_r = p.K / th + (thK1 - 2.0 + 1.0 / th) / (1.0 - th);
  d.terms.push_back({thB * one_th * c_r / N, 0, p.r});

  // e^{-(lambda+r) a} group (entered with a global minus sign)
  const double rate_lr = p.lambda + p.r;
  d.terms.push_back({thB * (1.0 - thK1) / N, 0, rate_lr});
  const double c2 = p.K / th + 1.0 / th - th / (1.0 - th);
  double lam_k = 1.0;  // lambda^k
  for (int k = 0; k <= p.K; ++k) {
    d.terms.push_back({-thB * one_th * c2 * lam_k / N, k, rate_lr});
    if (k < p.K) {
      // -(1/theta) (r theta a)^(k+1) / k!  ->  power k+1, factor (k+1)
      d.terms.push_back(
          {thB * one_th / th * lam_k * p.lambda * (k + 1) / N, k + 1, rate_lr});
    }
    lam_k *= p.lambda;
  }
  const double thK2 = thK1 * th;
  double r_k = 1.0;
  for (int k = 0; k <= p.K; ++k) {
    d.terms.push_back({-thB * one_th * thK2 / (1.0 - th) * r_k / N, k, rate_lr});
    r_k *= p.r;
  }
  return d;
}

inline UpdateProcessStats lcfs_stats(const SystemParams& p) {
  return {lcfs_valid_rate(p), lcfs_peak_cdf(p), lcfs_sojourn_cdf(p)};
}

// Average AoI under LCFS.
inline double lcfs_avg_aoi(const SystemParams& p) {
  detail::require_negligible_service(p);
  const double th = p.theta();
  const double thB = detail::pow_i(th, p.B);
  const double thK1 = detail::pow_i(th, p.K + 1);
  const double D = 1.0 - thK1 * thB;
  const double bracket =
      (1.0 - th) * thK1 / detail::pow_i(1.0 + th, p.K + 1) - thK1 + th;
  return 1.0 / p.lambda + (1.0 / p.r) * thB / D * bracket;
}

// Average exponential penalty under LCFS.
inline double lcfs_avg_exp_penalty(const SystemParams& p, double alpha) {
  detail::require_negligible_service(p);
  if (alpha == 0.0) throw PenaltyDiverges("alpha must be nonzero");
  if (alpha >= p.lambda)
    throw PenaltyDiverges("alpha must be < lambda for a finite exponential penalty");
  const double th = p.theta();
  const double thB = detail::pow_i(th, p.B);
  const double thK1 = detail::pow_i(th, p.K + 1);
  const double D = 1.0 - thK1 * thB;
  const double ra = p.r - alpha;
  const double bracket =
      1.0 +
      detail::pow_i(p.lambda / (p.lambda + ra), p.K + 1) * (p.r - p.lambda) /
          (p.lambda - alpha) -
      thK1 * ra / (p.lambda - alpha);
  return 1.0 / (p.lambda - alpha) + p.lambda / (ra * ra) * thB / D * bracket;
}

// AoI threshold-violation probability under LCFS.
inline double lcfs_violation_prob(const SystemParams& p, double beta) {
  detail::require_negligible_service(p);
  if (beta < 0.0) throw UnsupportedPenalty("beta must be >= 0");
  if (beta == 0.0) return 1.0;  // AoI is positive almost surely
  const double th = p.theta();
  const double thB = detail::pow_i(th, p.B);
  const double thK1 = detail::pow_i(th, p.K + 1);
  const double thK2 = thK1 * th;
  const double D = 1.0 - thK1 * thB;
  const double lb = p.lambda * beta;
  const double e_lam = std::exp(-lb);
  const double e_lr = std::exp(-(p.r + p.lambda) * beta);
  const double sum_lam_K = detail::poisson_partial_sum(lb, p.K);
  const double sum_lam_K1 = detail::poisson_partial_sum(lb, p.K - 1);
  const double sum_r_K = detail::poisson_partial_sum(p.r * beta, p.K);
  const double e_pl = std::exp(lb);  // e^{lambda beta}
  const double brace = e_pl * thK2 / (1.0 - th) +
                       (p.K + (1.0 - 2.0 * th) / (1.0 - th)) * (e_pl - sum_lam_K) +
                       lb * sum_lam_K1 - thK2 / (1.0 - th) * sum_r_K;
  const double c = e_lam + thB / D * e_lr * brace;
  return std::clamp(c, 0.0, 1.0);
}

}  // namespace aoi
