#pragma once

#include <cmath>
#include <cstdint>

#include "aoi/errors.hpp"

namespace aoi::detail {

// Adaptive Simpson with absolute-plus-relative tolerance. Evaluation budget
// is shared across the whole call tree; exceeding it throws QuadratureFailed.
struct QuadBudget {
  std::int64_t remaining = 1'000'000;
  void charge(std::int64_t n) {
    remaining -= n;
    if (remaining < 0)
      throw QuadratureFailed("quadrature evaluation budget exhausted");
  }
};

template <typename F>
double simpson(F&& f, double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adaptive_simpson_rec(F&& f, double a, double b, double fa, double fm,
                            double fb, double whole, double tol,
                            QuadBudget& budget, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  budget.charge(2);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(f, a, m, fa, flm, fm);
  const double right = simpson(f, m, b, fm, frm, fb);
  const double delta = left + right - whole;
  if (depth >= 60 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, budget,
                              depth + 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, budget,
                              depth + 1);
}

template <typename F>
double adaptive_simpson(F&& f, double a, double b, double tol,
                        QuadBudget& budget) {
  if (!(b > a)) return 0.0;
  budget.charge(3);
  const double fa = f(a);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double fb = f(b);
  const double whole = simpson(f, a, b, fa, fm, fb);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, budget, 0);
}

// Integrates f over [a, b], splitting into unit-ish panels so the tolerance
// is distributed sensibly over long ranges.
template <typename F>
double integrate(F&& f, double a, double b, double abs_tol, double rel_tol,
                 QuadBudget& budget) {
  if (!(b > a)) return 0.0;
  const int panels = static_cast<int>(std::fmin(64.0, std::fmax(1.0, b - a)));
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double lo = a + i * h;
    const double hi = (i + 1 == panels) ? b : lo + h;
    const double tol =
        (abs_tol + rel_tol * std::abs(total)) / static_cast<double>(panels);
    total += adaptive_simpson(f, lo, hi, std::fmax(tol, 1e-300), budget);
  }
  return total;
}

}  // namespace aoi::detail
