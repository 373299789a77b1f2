#include <Eigen/Dense>
#include <cmath>

#include "aoi/fcfs.hpp"
#include "aoi/penalty_engine.hpp"
#include "aoi/qbd.hpp"
#include "doctest.h"

using namespace aoi;

namespace {
SystemParams params(double lambda, double r, double mu, int B) {
  return validate_params({lambda, r, 0, B, mu});
}

// Independent oracle: stationary law of the chain truncated at `levels`
// levels, solved as one flat linear system.
Eigen::VectorXd truncated_stationary(const QbdModel& m, int levels) {
  const int n = m.V.rows();
  const int N = (levels + 1) * n;
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(N, N);
  auto put = [&](int lev_from, int lev_to, const Eigen::MatrixXd& blk) {
    Q.block(lev_from * n, lev_to * n, n, n) += blk;
  };
  put(0, 0, m.V_tilde);
  put(0, 1, m.W);
  for (int k = 1; k < levels; ++k) {
    put(k, k - 1, m.U);
    put(k, k, m.V);
    put(k, k + 1, m.W);
  }
  // reflecting top level: no further arrivals
  put(levels, levels - 1, m.U);
  put(levels, levels, m.V + m.W);

  // pi Q = 0, pi 1 = 1: overwrite the last balance equation
  Eigen::MatrixXd A = Q.transpose();
  A.row(N - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(N);
  b(N - 1) = 1.0;
  return A.partialPivLu().solve(b);
}
}  // namespace

TEST_CASE("generator blocks have the documented structure") {
  const auto m = build_qbd(params(0.4, 0.8, 1.0, 2));
  const int n = 3;
  REQUIRE(m.V.rows() == n);

  CHECK(m.W.isApprox(0.4 * Eigen::MatrixXd::Identity(n, n)));
  // boundary: energy accumulates, no service
  CHECK(m.V_tilde(0, 0) == doctest::Approx(-0.4 - 0.8));
  CHECK(m.V_tilde(0, 1) == doctest::Approx(0.8));
  CHECK(m.V_tilde(2, 2) == doctest::Approx(-0.4));  // battery full
  // interior: service active whenever energy is present
  CHECK(m.V(0, 0) == doctest::Approx(-0.4 - 0.8));
  CHECK(m.V(1, 1) == doctest::Approx(-0.4 - 0.8 - 1.0));
  CHECK(m.V(2, 2) == doctest::Approx(-0.4 - 1.0));
  CHECK(m.U(1, 0) == doctest::Approx(1.0));
  CHECK(m.U(2, 1) == doctest::Approx(1.0));
  CHECK(m.U(0, 0) == 0.0);

  // conservation: each row of the full generator sums to zero
  CHECK((m.V_tilde + m.W).rowwise().sum().cwiseAbs().maxCoeff() < 1e-14);
  CHECK((m.U + m.V + m.W).rowwise().sum().cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("build_qbd rejects missing mu and unstable rates") {
  CHECK_THROWS_AS(build_qbd(validate_params({0.4, 0.8, 0, 2, std::nullopt})),
                  InvalidRate);
  CHECK_THROWS_AS(build_qbd({0.9, 0.8, 0, 2, 1.0}), UnstableSystem);
}

TEST_CASE("solve_R certifies a small residual and a subunit spectral radius") {
  for (double lambda : {0.2, 0.4}) {
    for (double r : {0.8, 1.0}) {
      for (int B : {1, 5}) {
        const auto m = build_qbd(params(lambda, r, 1.0, B));
        const auto sol = solve_R(m);
        CAPTURE(lambda);
        CAPTURE(r);
        CAPTURE(B);
        CHECK(sol.residual < 1e-7);
        CHECK((sol.R.array() >= -1e-12).all());
        CHECK(sol.R.eigenvalues().cwiseAbs().maxCoeff() < 1.0);
      }
    }
  }
}

TEST_CASE("fixed-point iterates increase entrywise toward R") {
  const auto m = build_qbd(params(0.4, 0.8, 1.0, 3));
  const Eigen::MatrixXd V_inv = m.V.partialPivLu().inverse();
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(4, 4);
  for (int it = 0; it < 300; ++it) {
    const Eigen::MatrixXd next = -(R * R * m.U + m.W) * V_inv;
    CHECK(((next - R).array() >= -1e-13).all());
    R = next;
  }
  CHECK((R * R * m.U + R * m.V + m.W).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("vanishing arrivals give a vanishing R") {
  const auto sol = solve_R(build_qbd(params(1e-8, 1.0, 1.0, 2)));
  CHECK(sol.R.cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("stationary law: balance, normalization, truncated-chain oracle") {
  for (double lambda : {0.2, 0.4}) {
    for (int B : {1, 5}) {
      const auto p = params(lambda, 0.8, 1.0, B);
      const auto m = build_qbd(p);
      const auto sol = solve_qbd(m, 1e-13);
      const int n = B + 1;
      CAPTURE(lambda);
      CAPTURE(B);

      // normalization over all levels
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      CHECK((sol.p0 * (I - sol.R).inverse()).sum() ==
            doctest::Approx(1.0).epsilon(1e-10));

      // global balance level by level (pi_k = p0 R^k)
      Eigen::RowVectorXd pim1 = sol.p0;
      Eigen::RowVectorXd pi = sol.p0 * sol.R;
      Eigen::RowVectorXd pip1 = pi * sol.R;
      CHECK((sol.p0 * m.V_tilde + pi * m.U).cwiseAbs().maxCoeff() < 1e-8);
      for (int k = 1; k <= 30; ++k) {
        CHECK((pim1 * m.W + pi * m.V + pip1 * m.U).cwiseAbs().maxCoeff() < 1e-8);
        pim1 = pi;
        pi = pip1;
        pip1 = pi * sol.R;
      }

      // independent oracle
      const int levels = 120;
      const Eigen::VectorXd flat = truncated_stationary(m, levels);
      Eigen::RowVectorXd level = sol.p0;
      for (int k = 0; k <= 20; ++k) {
        for (int i = 0; i < n; ++i)
          CHECK(level(i) == doctest::Approx(flat(k * n + i)).epsilon(1e-8).scale(1.0));
        level = level * sol.R;
      }
    }
  }
}

TEST_CASE("mean queue length matches the truncated-chain oracle") {
  const auto p = params(0.4, 0.8, 1.0, 3);
  const auto m = build_qbd(p);
  const auto sol = solve_qbd(m, 1e-13);
  const int n = 4, levels = 150;
  const Eigen::VectorXd flat = truncated_stationary(m, levels);
  double mean = 0.0;
  for (int k = 0; k <= levels; ++k)
    for (int i = 0; i < n; ++i) mean += k * flat(k * n + i);
  CHECK(qbd_mean_queue_length(sol) == doctest::Approx(mean).epsilon(1e-8));
  CHECK(qbd_mean_sojourn(sol, p) == doctest::Approx(mean / p.lambda).epsilon(1e-8));
}

TEST_CASE("fast service approaches the instantaneous deep-buffer closed form") {
  // mu large: service is nearly instantaneous and the buffer effectively
  // infinite, so the mean peak age approaches the K -> inf zero-service value
  SystemParams p = params(0.4, 0.8, 400.0, 2);
  const double qbd_peak = qbd_avg_peak_aoi(p);
  SystemParams inst = validate_params({0.4, 0.8, 450, 2, std::nullopt});
  const double closed = avg_peak_from_stats(fcfs_stats(inst));
  CHECK(qbd_peak == doctest::Approx(closed).epsilon(0.01));
  CHECK(qbd_peak > closed);  // finite mu can only add delay
}

TEST_CASE("non-convergence surfaces as NotConverged") {
  const auto m = build_qbd(params(0.4, 0.8, 1.0, 2));
  CHECK_THROWS_AS(solve_R(m, 1e-14, 3), NotConverged);
}
