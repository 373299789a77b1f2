#pragma once

#include <optional>
#include <string>

#include "aoi/errors.hpp"

namespace aoi {

enum class Discipline { FCFS, LCFS };

inline const char* to_string(Discipline d) {
  return d == Discipline::FCFS ? "fcfs" : "lcfs";
}

// Closed forms involve theta^(K+B) sums; past a few hundred terms they are
// pure noise anyway, so capacities are capped.
inline constexpr int kMaxCapacity = 500;

// The (lambda, r, K, B, mu) tuple describing the status-update system.
// mu absent means the negligible-service-time regime. theta = lambda/r is
// always derived, never stored.
struct SystemParams {
  double lambda = 0.0;  // status packet arrival rate
  double r = 0.0;       // energy packet arrival rate
  int K = 0;            // data buffer capacity
  int B = 1;            // battery capacity, in energy packets
  std::optional<double> mu;  // service rate, when service time is not negligible

  double theta() const { return lambda / r; }
};

inline SystemParams validate_params(const SystemParams& p) {
  if (!(p.lambda > 0.0)) throw InvalidRate("lambda must be > 0");
  if (!(p.r > 0.0)) throw InvalidRate("r must be > 0");
  if (p.mu && !(*p.mu > 0.0)) throw InvalidRate("mu must be > 0");
  if (p.B < 1) throw InvalidCapacity("battery capacity B must be >= 1");
  if (p.K < 0) throw InvalidCapacity("buffer capacity K must be >= 0");
  if (p.B > kMaxCapacity || p.K > kMaxCapacity)
    throw InvalidCapacity("K and B are capped at " + std::to_string(kMaxCapacity));
  if (!(p.lambda < p.r))
    throw UnstableSystem("lambda must be < r to keep the data queue stable");
  return p;
}

}  // namespace aoi
