#pragma once

#include <cmath>

#include "aoi/fcfs.hpp"
#include "aoi/penalty.hpp"
#include "aoi/params.hpp"

namespace aoi {

namespace detail {

// Every K->inf entry has the form (limit) + (gap coefficient) * theta^B, so
// the table is evaluated with theta^B passed in; thB = 0 yields the
// B -> infinity limit exactly.
inline double asymptotic_entry(const SystemParams& p, Discipline d,
                               const PenaltySpec& spec, double thB) {
  const double th = p.theta();
  switch (spec.kind) {
    case PenaltySpec::Kind::Linear:
      if (d == Discipline::FCFS)
        return 1.0 / p.lambda + thB * th * th / (p.lambda * (1.0 - th));
      return 1.0 / p.lambda + thB * th * th / p.lambda;

    case PenaltySpec::Kind::Exponential: {
      const double a = spec.alpha;
      if (a >= p.lambda) throw PenaltyDiverges("alpha must be < lambda");
      if (d == Discipline::FCFS) {
        if (a >= p.r - p.lambda)
          throw PenaltyDiverges(
              "FCFS K->inf exponential penalty needs alpha < r - lambda");
        return 1.0 / (p.lambda - a) +
               (p.r / a) *
                   ((1.0 - th) / (p.r - a - p.lambda) - 1.0 / (p.r - a)) * thB;
      }
      const double ra = p.r - a;
      return 1.0 / (p.lambda - a) + p.lambda / (ra * ra) * thB;
    }

    case PenaltySpec::Kind::Step: {
      const double b = spec.beta;
      const double e_lam = std::exp(-p.lambda * b);
      const double e_r = std::exp(-p.r * b);
      if (d == Discipline::FCFS)
        return e_lam + std::expm1(p.lambda * b) * e_r * thB;
      return e_lam + p.lambda * b * e_r * thB;
    }

    case PenaltySpec::Kind::Custom:
      break;
  }
  throw UnsupportedPenalty("no K->inf entry for custom penalties");
}

}  // namespace detail

// K -> infinity average penalty for (discipline, penalty). Custom penalties
// have no tabulated entry and are rejected.
inline double asymptotic_penalty(const SystemParams& p, Discipline d,
                                 const PenaltySpec& spec) {
  detail::require_negligible_service(p);
  return detail::asymptotic_entry(p, d, spec, detail::pow_i(p.theta(), p.B));
}

// Ratio of consecutive gaps to the B -> infinity limit; algebraically equal
// to theta for every tabulated entry.
inline double battery_decay_rate(const SystemParams& p, Discipline d,
                                 const PenaltySpec& spec) {
  detail::require_negligible_service(p);
  const double th = p.theta();
  const double limit = detail::asymptotic_entry(p, d, spec, 0.0);
  const double at_B = detail::asymptotic_entry(p, d, spec, detail::pow_i(th, p.B));
  const double at_B1 =
      detail::asymptotic_entry(p, d, spec, detail::pow_i(th, p.B + 1));
  return (at_B1 - limit) / (at_B - limit);
}

}  // namespace aoi
