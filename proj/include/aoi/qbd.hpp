#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

#include "aoi/params.hpp"

namespace aoi {

// Generator blocks of the level-structured chain: levels are data-queue
// lengths, phases are battery levels 0..B.
struct QbdModel {
  SystemParams params;
  Eigen::MatrixXd V_tilde;  // boundary diagonal block (level 0)
  Eigen::MatrixXd V;        // interior diagonal block
  Eigen::MatrixXd U;        // level-down block (service completion)
  Eigen::MatrixXd W;        // level-up block (status arrival), lambda*I
};

struct QbdSolution {
  Eigen::MatrixXd R;
  Eigen::RowVectorXd p0;
  std::int64_t iterations = 0;
  double residual = 0.0;
};

inline QbdModel build_qbd(const SystemParams& p) {
  validate_params(p);
  if (!p.mu) throw InvalidRate("QBD model requires a service rate mu");
  const int n = p.B + 1;
  const double mu = *p.mu;

  QbdModel m;
  m.params = p;
  m.V_tilde = Eigen::MatrixXd::Zero(n, n);
  m.V = Eigen::MatrixXd::Zero(n, n);
  m.U = Eigen::MatrixXd::Zero(n, n);
  m.W = p.lambda * Eigen::MatrixXd::Identity(n, n);

  for (int i = 0; i < n; ++i) {
    const bool last = (i == n - 1);
    // boundary level: no packet in service, only energy accumulation
    m.V_tilde(i, i) = -p.lambda - (last ? 0.0 : p.r);
    if (!last) m.V_tilde(i, i + 1) = p.r;
    // interior level: service active whenever the battery is nonempty
    m.V(i, i) = -p.lambda - (last ? 0.0 : p.r) - (i > 0 ? mu : 0.0);
    if (!last) m.V(i, i + 1) = p.r;
    if (i > 0) m.U(i, i - 1) = mu;
  }
  return m;
}

// Minimal nonnegative solution of R^2 U + R V + W = 0 by the fixed-point
// iteration R <- -(R^2 U + W) V^{-1} from R = 0. V is factorized once.
inline QbdSolution solve_R(const QbdModel& m, double eps = 1e-8,
                           std::int64_t max_iter = 1'000'000) {
  const int n = m.V.rows();
  const Eigen::MatrixXd V_inv = m.V.partialPivLu().inverse();

  QbdSolution sol;
  sol.R = Eigen::MatrixXd::Zero(n, n);
  for (std::int64_t it = 1; it <= max_iter; ++it) {
    Eigen::MatrixXd next = -(sol.R * sol.R * m.U + m.W) * V_inv;
    const double delta = (next - sol.R).cwiseAbs().maxCoeff();
    sol.R = next;
    sol.iterations = it;
    if (!sol.R.allFinite())
      throw NotConverged("R iteration diverged (unstable system?)");
    if (delta < eps) break;
    if (it == max_iter)
      throw NotConverged("R iteration did not converge within max_iter");
  }

  const double spectral_radius = sol.R.eigenvalues().cwiseAbs().maxCoeff();
  if (!(spectral_radius < 1.0))
    throw NotConverged("spectral radius of R is " +
                       std::to_string(spectral_radius) +
                       " >= 1: system not positive recurrent");
  sol.residual =
      (sol.R * sol.R * m.U + sol.R * m.V + m.W).cwiseAbs().maxCoeff();
  return sol;
}

// Left null vector of (V_tilde + R U), normalized so p0 (I-R)^{-1} 1' = 1.
// The balance equations have rank n-1, so one of them is swapped for the
// normalization constraint and the dropped one is verified afterwards.
inline Eigen::RowVectorXd solve_boundary(const QbdModel& m,
                                         const Eigen::MatrixXd& R) {
  const int n = m.V_tilde.rows();
  const Eigen::MatrixXd B = m.V_tilde + R * m.U;  // p0 B = 0
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd norm_vec = (I - R).inverse() * Eigen::VectorXd::Ones(n);

  Eigen::MatrixXd A = B.transpose();
  A.row(n - 1) = norm_vec.transpose();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;

  const Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible())
    throw DegenerateNullSpace("null space of (V_tilde + R U) is not one-dimensional");
  const Eigen::VectorXd v = lu.solve(rhs);

  const double scale = v.cwiseAbs().maxCoeff();
  for (int i = 0; i < n; ++i)
    if (v(i) < -1e-9 * scale)
      throw DegenerateNullSpace("boundary vector has a negative entry");

  // the dropped balance equation must hold as well
  Eigen::RowVectorXd p0 = v.cwiseMax(0.0).transpose();
  if ((p0 * B).cwiseAbs().maxCoeff() > 1e-6 * B.cwiseAbs().maxCoeff())
    throw DegenerateNullSpace("boundary solve failed the dropped balance check");
  return p0;
}

inline QbdSolution solve_qbd(const QbdModel& m, double eps = 1e-8,
                             std::int64_t max_iter = 1'000'000) {
  QbdSolution sol = solve_R(m, eps, max_iter);
  sol.p0 = solve_boundary(m, sol.R);
  return sol;
}

// Mean data-queue length p0 (I-R)^{-2} R 1'.
inline double qbd_mean_queue_length(const QbdSolution& sol) {
  const int n = sol.R.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd M = (I - sol.R).inverse();
  return (sol.p0 * M * M * sol.R).sum();
}

// Little's law: mean sojourn time of a status packet.
inline double qbd_mean_sojourn(const QbdSolution& sol, const SystemParams& p) {
  return qbd_mean_queue_length(sol) / p.lambda;
}

// Average peak AoI with exponential service: 1/lambda + mean sojourn.
inline double qbd_avg_peak_aoi(const SystemParams& p, double eps = 1e-8,
                               std::int64_t max_iter = 1'000'000) {
  const QbdModel m = build_qbd(p);
  const QbdSolution sol = solve_qbd(m, eps, max_iter);
  return 1.0 / p.lambda + qbd_mean_sojourn(sol, p);
}

}  // namespace aoi
