#include <cmath>

#include "aoi/fcfs.hpp"
#include "aoi/penalty_engine.hpp"
#include "doctest.h"

using namespace aoi;

namespace {
SystemParams params(double lambda, double r, int K, int B) {
  return validate_params({lambda, r, K, B, std::nullopt});
}
}  // namespace

TEST_CASE("fcfs_valid_rate") {
  CHECK(fcfs_valid_rate(params(0.5, 1.0, 1, 1)) ==
        doctest::Approx(3.0 / 7.0).epsilon(1e-12));
  // rare arrivals: nothing is ever blocked
  CHECK(fcfs_valid_rate(params(0.001, 1.0, 1, 1)) ==
        doctest::Approx(0.001).epsilon(1e-6));
  // geometric terms vanish for deep buffers
  CHECK(fcfs_valid_rate(params(0.5, 1.0, 100, 100)) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("fcfs peak distribution is a proper law") {
  for (int K : {0, 1, 5, 20}) {
    for (int B : {1, 3, 10}) {
      const auto p = params(0.5, 1.0, K, B);
      const auto d = fcfs_peak_cdf(p);
      CAPTURE(K);
      CAPTURE(B);
      CHECK(d.atom_at_zero == 0.0);
      CHECK(std::abs(d.cdf(0.0)) < 1e-10);
      CHECK(d.cdf(50.0 / p.lambda) >= 1.0 - 1e-9);
      CHECK(expoly_is_valid(d));
    }
  }
}

TEST_CASE("fcfs sojourn distribution") {
  const auto p = params(0.5, 1.0, 1, 1);
  const auto d = fcfs_sojourn_cdf(p);
  CHECK(d.atom_at_zero == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(expoly_is_valid(d));

  // effectively infinite battery: every packet is served on arrival
  const auto deep = fcfs_sojourn_cdf(params(0.5, 1.0, 1, 60));
  CHECK(deep.atom_at_zero == doctest::Approx(1.0).epsilon(1e-12));

  double prev = 0.0;
  for (double t = 0.0; t <= 30.0; t += 0.1) {
    const double c = d.cdf(t);
    CHECK(c >= prev - 1e-12);
    prev = c;
  }
}

TEST_CASE("fcfs_avg_aoi limits and internal consistency") {
  // large battery approaches the average-power-constrained value 1/lambda
  CHECK(fcfs_avg_aoi(params(0.5, 1.0, 5, 60)) ==
        doctest::Approx(2.0).epsilon(1e-12));

  for (int K : {0, 1, 5, 20}) {
    for (int B : {1, 3, 10}) {
      const auto p = params(0.5, 1.0, K, B);
      const auto stats = fcfs_stats(p);
      const double theorem = fcfs_avg_aoi(p);
      CAPTURE(K);
      CAPTURE(B);
      CHECK(theorem >= 1.0 / p.lambda);
      // Eq.(5) route on the lemma distributions
      CHECK(average_penalty(stats, PenaltySpec::linear()).value ==
            doctest::Approx(theorem).epsilon(1e-9));
      // moment route
      CHECK(avg_aoi_from_moments(stats) == doctest::Approx(theorem).epsilon(1e-9));
      // E[A] = 1/valid_rate + E[T]
      CHECK(avg_peak_from_stats(stats) ==
            doctest::Approx(1.0 / stats.valid_rate +
                            expoly_moment(stats.sojourn, 1))
                .epsilon(1e-9));
    }
  }
}

TEST_CASE("fcfs_avg_aoi is strictly decreasing in B") {
  double prev = fcfs_avg_aoi(params(0.5, 1.0, 5, 1));
  for (int B = 2; B <= 30; ++B) {
    const double cur = fcfs_avg_aoi(params(0.5, 1.0, 5, B));
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("fcfs_avg_exp_penalty") {
  const auto p = params(0.5, 1.0, 5, 1);
  const double aoi = fcfs_avg_aoi(p);
  CHECK(fcfs_avg_exp_penalty(p, 1e-6) == doctest::Approx(aoi).epsilon(1e-4));
  CHECK(fcfs_avg_exp_penalty(p, -1e-6) == doctest::Approx(aoi).epsilon(1e-4));
  CHECK_THROWS_AS(fcfs_avg_exp_penalty(p, 0.5), PenaltyDiverges);
  CHECK_THROWS_AS(fcfs_avg_exp_penalty(p, 0.7), PenaltyDiverges);

  // Eq.(5) route
  for (double alpha : {0.2, -0.2, 0.4})
    CHECK(fcfs_avg_exp_penalty(p, alpha) ==
          doctest::Approx(
              average_penalty(fcfs_stats(p), PenaltySpec::exponential(alpha)).value)
              .epsilon(1e-9));
}

TEST_CASE("fcfs exp penalty branch continuity at alpha = r - lambda") {
  const auto p = params(0.7, 1.0, 5, 1);
  const double special = fcfs_avg_exp_penalty(p, 0.3);  // exactly r - lambda
  const double lo = fcfs_avg_exp_penalty(p, 0.3 - 1e-5);
  const double hi = fcfs_avg_exp_penalty(p, 0.3 + 1e-5);
  CHECK(special == doctest::Approx(lo).epsilon(1e-3));
  CHECK(special == doctest::Approx(hi).epsilon(1e-3));
}

TEST_CASE("fcfs_violation_prob") {
  const auto p = params(0.5, 1.0, 5, 1);
  CHECK(fcfs_violation_prob(p, 0.0) == 1.0);
  CHECK(fcfs_violation_prob(p, 200.0 / p.lambda) <= 1e-12);
  for (double beta : {0.5, 1.0, 2.0, 5.0}) {
    const double v = fcfs_violation_prob(p, beta);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(v == doctest::Approx(
                   average_penalty(fcfs_stats(p), PenaltySpec::step(beta)).value)
                   .epsilon(1e-9));
  }
}

TEST_CASE("peak tail upper-bounds the AoI violation") {
  for (double beta : {0.0, 0.5, 1.0, 2.0, 5.0}) {
    for (int K : {0, 1, 5}) {
      const auto p = params(0.5, 1.0, K, 2);
      const auto [peak_tail, violation] = fcfs_peak_violation_bound_check(p, beta);
      CAPTURE(beta);
      CAPTURE(K);
      CHECK(peak_tail >= violation - 1e-12);
      if (beta == 0.0) {
        CHECK(peak_tail == 1.0);
        CHECK(violation == 1.0);
      }
    }
  }
}

TEST_CASE("K = 0 evaluates finitely everywhere") {
  const auto p = params(0.5, 1.0, 0, 2);
  CHECK(std::isfinite(fcfs_avg_aoi(p)));
  CHECK(std::isfinite(fcfs_avg_exp_penalty(p, 0.2)));
  CHECK(std::isfinite(fcfs_violation_prob(p, 2.0)));
  CHECK(average_penalty(fcfs_stats(p), PenaltySpec::linear()).value ==
        doctest::Approx(fcfs_avg_aoi(p)).epsilon(1e-9));
}

TEST_CASE("min_battery_for_aoi") {
  SystemParams base{0.5, 1.0, 5, 1, std::nullopt};
  CHECK_THROWS_AS(min_battery_for_aoi(base, 2.0), Infeasible);  // 1/lambda
  CHECK_THROWS_AS(min_battery_for_aoi(base, 1.0), Infeasible);
  CHECK(min_battery_for_aoi(base, 1e6 / base.lambda) == 1);

  const int B = min_battery_for_aoi(base, 2.5);
  SystemParams at = base;
  at.B = B;
  CHECK(fcfs_avg_aoi(at) <= 2.5);
  if (B > 1) {
    at.B = B - 1;
    CHECK(fcfs_avg_aoi(at) > 2.5);
  }
}
