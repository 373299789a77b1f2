#include <cmath>

#include "aoi/fcfs.hpp"
#include "aoi/lcfs.hpp"
#include "aoi/penalty_engine.hpp"
#include "doctest.h"

using namespace aoi;

namespace {
ExpPolyDist exponential_dist(double a) {
  ExpPolyDist d;
  d.terms.push_back({1.0, 0, a});
  return d;
}

PenaltySpec quad_version(const PenaltySpec& spec) {
  // same g, but routed through the quadrature path
  CustomPenalty c;
  c.g = [spec](double t) { return penalty_value(spec, t); };
  switch (spec.kind) {
    case PenaltySpec::Kind::Exponential:
      c.growth_rate = std::fmax(spec.alpha, 0.0);
      c.growth_scale = 1.0 / std::abs(spec.alpha);
      break;
    default:
      c.growth_rate = 0.0;
      c.growth_scale = 1e3;  // crude linear/step bound over the active range
      break;
  }
  return PenaltySpec::custom_fn(c);
}
}  // namespace

TEST_CASE("expected_G on a pure exponential law") {
  const double a = 1.5;
  const auto d = exponential_dist(a);

  CHECK(expected_G(d, PenaltySpec::linear()).value ==
        doctest::Approx(1.0 / (a * a)).epsilon(1e-12));

  // int_0^inf G'(t) S(t) dt with g = e^(alpha t): 1 / (a (a - alpha))
  for (double alpha : {0.3, -0.5, 1.0}) {
    CAPTURE(alpha);
    CHECK(expected_G(d, PenaltySpec::exponential(alpha)).value ==
          doctest::Approx(1.0 / (a * (a - alpha))).epsilon(1e-12));
  }

  // step at zero integrates the whole survivor: the mean
  CHECK(expected_G(d, PenaltySpec::step(0.0)).value ==
        doctest::Approx(1.0 / a).epsilon(1e-12));
  CHECK(expected_G(d, PenaltySpec::step(2.0)).value ==
        doctest::Approx(std::exp(-2.0 * a) / a).epsilon(1e-12));
}

TEST_CASE("closed forms agree with the quadrature fallback") {
  const auto stats = fcfs_stats(validate_params({0.5, 1.0, 3, 2, std::nullopt}));
  const std::vector<PenaltySpec> specs = {
      PenaltySpec::linear(), PenaltySpec::exponential(0.2),
      PenaltySpec::exponential(-0.3), PenaltySpec::step(1.5)};
  for (const auto& spec : specs) {
    CAPTURE(spec.id());
    const auto exact = expected_G(stats.peak, spec);
    const auto quad = expected_G(stats.peak, quad_version(spec));
    CHECK(exact.method == PenaltyResult::Method::Exact);
    CHECK(quad.method == PenaltyResult::Method::Quadrature);
    CHECK(quad.value == doctest::Approx(exact.value).epsilon(1e-6));
  }
}

TEST_CASE("step expectation decreases in the threshold") {
  const auto stats = lcfs_stats(validate_params({0.5, 1.0, 3, 2, std::nullopt}));
  double prev = expected_G(stats.peak, PenaltySpec::step(0.0)).value;
  for (double beta : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    const double cur = expected_G(stats.peak, PenaltySpec::step(beta)).value;
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("moment-generating pole is rejected, not mis-evaluated") {
  const auto d = exponential_dist(1.0);
  CHECK_THROWS_AS(expected_G(d, PenaltySpec::exponential(1.0)), MgfDiverges);
  CHECK_THROWS_AS(expected_G(d, PenaltySpec::exponential(1.5)), MgfDiverges);
  CHECK_THROWS_AS(expected_G(d, PenaltySpec::exponential(1.0 + 1e-12)),
                  MgfDiverges);
  // custom growth bounds hit the same guard
  CustomPenalty c;
  c.g = [](double t) { return std::exp(t); };
  c.growth_rate = 1.0;
  c.growth_scale = 1.0;
  CHECK_THROWS_AS(expected_G(d, PenaltySpec::custom_fn(c)), MgfDiverges);
}

TEST_CASE("average_penalty combines routes and propagates the method tag") {
  const auto stats = fcfs_stats(validate_params({0.5, 1.0, 2, 2, std::nullopt}));

  const auto exact = average_penalty(stats, PenaltySpec::linear());
  CHECK(exact.method == PenaltyResult::Method::Exact);
  CHECK(exact.est_error == 0.0);

  CustomPenalty ident;
  ident.g = [](double t) { return t; };
  ident.growth_rate = 0.05;  // t <= 20 e^(t/20)
  ident.growth_scale = 20.0;
  const auto quad = average_penalty(stats, PenaltySpec::custom_fn(ident));
  CHECK(quad.method == PenaltyResult::Method::Quadrature);
  CHECK(quad.est_error > 0.0);
  CHECK(quad.value == doctest::Approx(exact.value).epsilon(1e-6));
}

TEST_CASE("custom quadrature reproduces a non-library penalty") {
  // g(t) = t^2 on a pure exponential: E[G(V)] = E[V^3]/3 = 2/a^3
  const double a = 2.0;
  CustomPenalty c;
  c.g = [](double t) { return t * t; };
  c.growth_rate = 0.1;
  c.growth_scale = 1000.0;
  CHECK(expected_G(exponential_dist(a), PenaltySpec::custom_fn(c)).value ==
        doctest::Approx(2.0 / (a * a * a)).epsilon(1e-8));
}
