#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "aoi/errors.hpp"

namespace aoi {

// One c * (t^n / n!) * exp(-a t) term of a survivor function.
struct ExpPolyTerm {
  double coef = 0.0;
  int power = 0;     // n >= 0
  double rate = 0.0; // a > 0
};

// A nonnegative random variable whose survivor function is a finite sum of
// exponential-polynomial terms plus a possible atom at zero:
//   P{V > t} = sum_j coef_j * (t^n_j / n_j!) * exp(-a_j t)   for t > 0
//   P{V = 0} = atom_at_zero
// The 1/n! lives in the evaluation so coefficients transcribe term-by-term
// from Poisson-tail sums like sum (lambda a)^n / n!.
struct ExpPolyDist {
  double atom_at_zero = 0.0;
  std::vector<ExpPolyTerm> terms;

  double min_rate() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& t : terms) m = std::fmin(m, t.rate);
    return m;
  }

  // Survivor function for t > 0; survivor(0) returns the right limit S(0+).
  double survivor(double t) const {
    double s = 0.0;
    for (const auto& term : terms) {
      // t^n/n! by running product, avoids explicit factorials
      double poly = 1.0;
      for (int i = 1; i <= term.power; ++i) poly *= t / i;
      s += term.coef * poly * std::exp(-term.rate * t);
    }
    return s;
  }

  double cdf(double t) const {
    if (t < 0.0) return 0.0;
    return 1.0 - survivor(t);
  }
};

// Numerical spot-check of the survivor-function invariants: S(0+) consistent
// with the atom, S nonincreasing and within [0,1] on a log grid.
inline bool expoly_is_valid(const ExpPolyDist& d, double tol = 1e-9) {
  if (d.atom_at_zero < -1e-12 || d.atom_at_zero > 1.0 + 1e-12) return false;
  if (std::abs(d.survivor(0.0) - (1.0 - d.atom_at_zero)) > 1e-10) return false;
  const double a_min = d.min_rate();
  if (!(a_min > 0.0)) return !std::isfinite(a_min) && d.terms.empty();
  const double lo = 1e-6 / a_min, hi = 50.0 / a_min;
  const int n = 200;
  double prev = d.survivor(0.0);
  for (int i = 0; i <= n; ++i) {
    const double t = lo * std::pow(hi / lo, static_cast<double>(i) / n);
    const double s = d.survivor(t);
    if (s < -tol || s > 1.0 + tol) return false;
    if (s > prev + tol) return false;
    prev = s;
  }
  return true;
}

// E[V^m] for m in {1, 2, 3}, via m * int_0^inf t^(m-1) S(t) dt with each
// term integrated in closed form:
//   int_0^inf t^(m-1+n)/n! e^(-a t) dt = (m-1+n)!/(n! a^(m+n)).
inline double expoly_moment(const ExpPolyDist& d, int m) {
  if (m < 1 || m > 3) throw NonIntegrable("expoly_moment supports m in {1,2,3}");
  double total = 0.0;
  for (const auto& term : d.terms) {
    if (!(term.rate > 0.0)) throw NonIntegrable("term rate must be > 0");
    // (m-1+n)!/n! = product of (n+1)..(n+m-1)
    double fact_ratio = 1.0;
    for (int i = term.power + 1; i <= term.power + m - 1; ++i) fact_ratio *= i;
    total += term.coef * m * fact_ratio /
             std::pow(term.rate, static_cast<double>(m + term.power));
  }
  if (total < -1e-9)
    throw NonIntegrable("negative moment: malformed distribution");
  return std::fmax(total, 0.0);
}

// Statistics of the valid-update process: rate, peak-AoI law, sojourn law.
struct UpdateProcessStats {
  double valid_rate = 0.0;  // lambda-tilde
  ExpPolyDist peak;         // distribution of A
  ExpPolyDist sojourn;      // distribution of T
};

}  // namespace aoi
