#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "aoi/detail/quadrature.hpp"
#include "aoi/errors.hpp"

namespace aoi {

// User-supplied penalty g must be nonnegative on [0, inf) and declare a
// growth bound g(x) <= growth_scale * exp(growth_rate * x) so integrals can
// pick a truncation horizon.
struct CustomPenalty {
  std::function<double(double)> g;
  double growth_rate = 0.0;
  double growth_scale = 1.0;
};

// Which g(delta) to average: linear, exponential(alpha), shifted unit step,
// or a user-supplied callable.
struct PenaltySpec {
  enum class Kind { Linear, Exponential, Step, Custom };

  Kind kind = Kind::Linear;
  double alpha = 0.0;  // Exponential only, alpha != 0
  double beta = 0.0;   // Step only, beta >= 0
  CustomPenalty custom;

  static PenaltySpec linear() { return {}; }

  static PenaltySpec exponential(double alpha) {
    if (alpha == 0.0) throw PenaltyDiverges("exponential penalty needs alpha != 0");
    PenaltySpec s;
    s.kind = Kind::Exponential;
    s.alpha = alpha;
    return s;
  }

  static PenaltySpec step(double beta) {
    if (beta < 0.0) throw UnsupportedPenalty("step threshold beta must be >= 0");
    PenaltySpec s;
    s.kind = Kind::Step;
    s.beta = beta;
    return s;
  }

  static PenaltySpec custom_fn(CustomPenalty c) {
    if (!c.g) throw UnsupportedPenalty("custom penalty needs a callable");
    PenaltySpec s;
    s.kind = Kind::Custom;
    s.custom = std::move(c);
    return s;
  }

  std::string id() const {
    switch (kind) {
      case Kind::Linear: return "linear";
      case Kind::Exponential: return "exp(" + std::to_string(alpha) + ")";
      case Kind::Step: return "step(" + std::to_string(beta) + ")";
      case Kind::Custom: return "custom";
    }
    return "?";
  }
};

// g(delta)
inline double penalty_value(const PenaltySpec& spec, double delta) {
  switch (spec.kind) {
    case PenaltySpec::Kind::Linear:
      return delta;
    case PenaltySpec::Kind::Exponential:
      // expm1 keeps precision for small alpha*delta
      return std::expm1(spec.alpha * delta) / spec.alpha;
    case PenaltySpec::Kind::Step:
      return delta > spec.beta ? 1.0 : 0.0;
    case PenaltySpec::Kind::Custom:
      return spec.custom.g(delta);
  }
  return 0.0;
}

// G(x) = int_0^x g(delta) d delta. Custom penalties go through quadrature.
inline double penalty_antiderivative(const PenaltySpec& spec, double x) {
  switch (spec.kind) {
    case PenaltySpec::Kind::Linear:
      return 0.5 * x * x;
    case PenaltySpec::Kind::Exponential: {
      const double a = spec.alpha;
      return (std::expm1(a * x) - a * x) / (a * a);
    }
    case PenaltySpec::Kind::Step:
      return std::fmax(0.0, x - spec.beta);
    case PenaltySpec::Kind::Custom: {
      detail::QuadBudget budget;
      return detail::integrate(spec.custom.g, 0.0, x, 1e-12, 1e-10, budget);
    }
  }
  return 0.0;
}

}  // namespace aoi
