#pragma once

#include <cmath>

#include "aoi/detail/quadrature.hpp"
#include "aoi/expoly.hpp"
#include "aoi/fcfs.hpp"
#include "aoi/penalty.hpp"

namespace aoi {

struct PenaltyResult {
  double value = 0.0;
  enum class Method { Exact, Quadrature } method = Method::Exact;
  double est_error = 0.0;
};

namespace detail {

// int_T^inf (t^n / n!) e^(-b t) dt = e^(-bT)/b^(n+1) * sum_{k<=n} (bT)^k/k!
inline double exp_poly_tail_integral(int n, double b, double T) {
  return std::exp(-b * T) / std::pow(b, n + 1) *
         poisson_partial_sum(b * T, n);
}

inline void check_mgf_pole(const ExpPolyDist& d, double alpha,
                           const char* what) {
  for (const auto& t : d.terms) {
    if (alpha >= t.rate)
      throw MgfDiverges(std::string(what) + " must be below every term rate");
    if (std::abs(alpha - t.rate) < 1e-9 * t.rate)
      throw MgfDiverges(std::string(what) + " too close to a term rate");
  }
}

}  // namespace detail

// E[G(V)] for V ~ d, computed as int_0^inf g(t) S(t) dt. The atom at zero
// contributes nothing since G(0) = 0. Named penalties integrate term by
// term in closed form; custom ones go through adaptive quadrature with the
// declared growth bound fixing the truncation horizon.
inline PenaltyResult expected_G(const ExpPolyDist& d, const PenaltySpec& spec) {
  switch (spec.kind) {
    case PenaltySpec::Kind::Linear:
      return {0.5 * expoly_moment(d, 2), PenaltyResult::Method::Exact, 0.0};

    case PenaltySpec::Kind::Exponential: {
      const double a = spec.alpha;
      detail::check_mgf_pole(d, a, "exponential penalty alpha");
      double total = 0.0;
      for (const auto& t : d.terms)
        total += t.coef * (std::pow(t.rate - a, -(t.power + 1)) -
                           std::pow(t.rate, -(t.power + 1)));
      return {total / a, PenaltyResult::Method::Exact, 0.0};
    }

    case PenaltySpec::Kind::Step: {
      double total = 0.0;
      for (const auto& t : d.terms)
        total += t.coef *
                 detail::exp_poly_tail_integral(t.power, t.rate, spec.beta);
      return {std::fmax(total, 0.0), PenaltyResult::Method::Exact, 0.0};
    }

    case PenaltySpec::Kind::Custom: {
      const auto& c = spec.custom;
      detail::check_mgf_pole(d, c.growth_rate, "custom penalty growth bound");
      auto integrand = [&](double t) { return c.g(t) * d.survivor(t); };
      auto tail_bound = [&](double T) {
        double bound = 0.0;
        for (const auto& t : d.terms)
          bound += std::abs(t.coef) * c.growth_scale *
                   detail::exp_poly_tail_integral(t.power,
                                                  t.rate - c.growth_rate, T);
        return bound;
      };
      detail::QuadBudget budget;
      double T = 8.0 / d.min_rate();
      double total = detail::integrate(integrand, 0.0, T, 1e-10, 1e-10, budget);
      while (tail_bound(T) > 1e-12 * std::fmax(std::abs(total), 1.0)) {
        total += detail::integrate(integrand, T, 2.0 * T, 1e-10, 1e-10, budget);
        T *= 2.0;
      }
      const double err = tail_bound(T) + 1e-10 * (1.0 + std::abs(total));
      return {total, PenaltyResult::Method::Quadrature, err};
    }
  }
  throw UnsupportedPenalty("unknown penalty kind");
}

// Average penalty C = valid_rate * (E[G(A)] - E[G(T)]).
inline PenaltyResult average_penalty(const UpdateProcessStats& stats,
                                     const PenaltySpec& spec) {
  const PenaltyResult peak = expected_G(stats.peak, spec);
  const PenaltyResult sojourn = expected_G(stats.sojourn, spec);
  double value = stats.valid_rate * (peak.value - sojourn.value);
  if (value < -1e-9)
    throw NegativePenalty("negative average penalty: inconsistent distributions");
  PenaltyResult out;
  out.value = std::fmax(value, 0.0);
  out.method = (peak.method == PenaltyResult::Method::Quadrature ||
                sojourn.method == PenaltyResult::Method::Quadrature)
                   ? PenaltyResult::Method::Quadrature
                   : PenaltyResult::Method::Exact;
  out.est_error = stats.valid_rate * (peak.est_error + sojourn.est_error);
  return out;
}

// Average AoI from second moments: (valid_rate / 2)(E[A^2] - E[T^2]).
inline double avg_aoi_from_moments(const UpdateProcessStats& stats) {
  return 0.5 * stats.valid_rate *
         (expoly_moment(stats.peak, 2) - expoly_moment(stats.sojourn, 2));
}

// E[A]; in steady state it also equals 1/valid_rate + E[T].
inline double avg_peak_from_stats(const UpdateProcessStats& stats) {
  return expoly_moment(stats.peak, 1);
}

}  // namespace aoi
