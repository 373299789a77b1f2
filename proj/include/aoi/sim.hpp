#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "aoi/params.hpp"
#include "aoi/penalty.hpp"

namespace aoi {

enum class ServiceMode { Instantaneous, ExponentialService };

struct SimHorizon {
  enum class Kind { Events, Time, ValidUpdates } kind = Kind::Events;
  double value = 0.0;

  static SimHorizon events(std::uint64_t n) {
    return {Kind::Events, static_cast<double>(n)};
  }
  static SimHorizon time(double t) { return {Kind::Time, t}; }
  static SimHorizon valid_updates(std::uint64_t n) {
    return {Kind::ValidUpdates, static_cast<double>(n)};
  }
};

struct SimConfig {
  SystemParams params;
  Discipline discipline = Discipline::FCFS;
  ServiceMode service = ServiceMode::Instantaneous;
  SimHorizon horizon = SimHorizon::events(1'000'000);
  std::uint64_t seed = 1;
  double warmup_fraction = 0.1;  // in [0, 0.5]
  std::vector<PenaltySpec> tracked_penalties;  // time-averaged per spec
  bool record_samples = true;
  // optional event log sink (t, kind, q1, q2, aoi); logs are large
  std::function<void(double, char, int, int, double)> event_log;
};

struct SimCounts {
  std::uint64_t arrivals = 0;
  std::uint64_t blocked = 0;           // FCFS buffer overflow
  std::uint64_t discarded = 0;         // LCFS oldest-drop
  std::uint64_t valid_updates = 0;
  std::uint64_t deliveries = 0;
  std::uint64_t energy_discarded = 0;  // battery full
  std::uint64_t in_flight = 0;         // still buffered when the run ended
};

struct SimResult {
  double valid_rate_hat = 0.0;
  double aoi_time_integral = 0.0;
  double elapsed_sim_time = 0.0;  // measurement window, after warmup
  std::vector<double> time_avg_penalty;  // aligned with tracked_penalties
  std::vector<double> peak_samples;      // A_i per valid update
  std::vector<double> sojourn_samples;   // T_i per valid update
  SimCounts counts;

  double avg_aoi() const { return aoi_time_integral / elapsed_sim_time; }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t master, int index) {
  std::uint64_t s = master;
  std::uint64_t out = 0;
  for (int i = 0; i <= index; ++i) out = splitmix64(s);
  return out;
}

// Exponential inter-event stream with its own generator state, so toggling
// the service mode does not perturb the arrival processes.
class ExpStream {
 public:
  ExpStream(std::uint64_t seed, double rate) : state_(seed), rate_(rate) {}

  double next() {
    const std::uint64_t u = splitmix64(state_);
    const double unit = (static_cast<double>(u >> 11) + 1.0) * 0x1.0p-53;
    return -std::log(unit) / rate_;
  }

 private:
  std::uint64_t state_;
  double rate_;
};

struct SimEngine {
  const SimConfig& cfg;
  const SystemParams& p;
  ExpStream status_rng, energy_rng, service_rng;

  double now = 0.0;
  double next_status, next_energy;
  std::optional<double> next_completion;

  std::deque<double> buffer;  // arrival times, front = oldest
  int battery = 0;
  double last_arrival_time = -1.0;  // newest packet that entered the system
  std::uint64_t total_valid = 0;    // including warmup

  // AoI trajectory: delta(t) = aoi_base + (t - aoi_base_time)
  double aoi_base = 0.0;
  double aoi_base_time = 0.0;

  bool measuring = false;
  double measure_start = 0.0;
  SimResult res;
  std::map<int, double>* occupancy = nullptr;       // collapsed state -> time
  std::vector<double>* valid_arrival_times = nullptr;

  explicit SimEngine(const SimConfig& c)
      : cfg(c),
        p(c.params),
        status_rng(substream_seed(c.seed, 0), c.params.lambda),
        energy_rng(substream_seed(c.seed, 1), c.params.r),
        service_rng(substream_seed(c.seed, 2), c.params.mu.value_or(1.0)) {
    next_status = status_rng.next();
    next_energy = energy_rng.next();
    res.time_avg_penalty.assign(cfg.tracked_penalties.size(), 0.0);
  }

  double aoi_at(double t) const { return aoi_base + (t - aoi_base_time); }

  void advance_to(double t) {
    if (measuring && occupancy) {
      const int s = static_cast<int>(buffer.size()) - battery;
      (*occupancy)[s] += t - now;
    }
    now = t;
  }

  void start_measuring() {
    measuring = true;
    measure_start = now;
  }

  // Accumulates the exact penalty integral over the AoI segment ending at t.
  void close_segment(double t) {
    if (!measuring) return;
    const double d0 = aoi_at(std::fmax(aoi_base_time, measure_start));
    const double d1 = aoi_at(t);
    res.aoi_time_integral += 0.5 * (d1 * d1 - d0 * d0);
    for (std::size_t i = 0; i < cfg.tracked_penalties.size(); ++i)
      res.time_avg_penalty[i] +=
          penalty_antiderivative(cfg.tracked_penalties[i], d1) -
          penalty_antiderivative(cfg.tracked_penalties[i], d0);
  }

  void deliver(double t, double arrival_time) {
    if (measuring) ++res.counts.deliveries;
    const double sojourn = t - arrival_time;
    // FCFS delivers in arrival order, so every delivery is valid; LCFS is
    // valid iff no status packet entered between this one's arrival and now
    const bool valid = cfg.discipline == Discipline::FCFS ||
                       last_arrival_time <= arrival_time;
    // the same criterion as seen by the AoI curve: the packet's age is
    // below the pre-reception AoI
    const bool resets = sojourn < aoi_at(t);
    if (valid != resets)
      throw Error("validity cross-check failed at t=" + std::to_string(t));
    if (!valid) return;

    close_segment(t);
    ++total_valid;
    if (measuring) {
      ++res.counts.valid_updates;
      if (cfg.record_samples) {
        res.peak_samples.push_back(aoi_at(t));
        res.sojourn_samples.push_back(sojourn);
      }
      if (valid_arrival_times) valid_arrival_times->push_back(arrival_time);
    }
    aoi_base = sojourn;
    aoi_base_time = t;
  }

  void on_status_arrival() {
    if (measuring) ++res.counts.arrivals;
    const double ta = now;
    if (cfg.service == ServiceMode::Instantaneous) {
      if (battery > 0) {
        last_arrival_time = ta;
        --battery;
        deliver(now, ta);  // served on the spot, zero sojourn
        return;
      }
      if (cfg.discipline == Discipline::FCFS &&
          static_cast<int>(buffer.size()) == p.K) {
        if (measuring) ++res.counts.blocked;
        return;  // never enters the system
      }
      last_arrival_time = ta;
      buffer.push_back(ta);
      if (cfg.discipline == Discipline::LCFS &&
          static_cast<int>(buffer.size()) > p.K) {
        buffer.pop_front();  // oldest is pushed out
        if (measuring) ++res.counts.discarded;
      }
    } else {
      // exponential service: unbounded buffer, matching the level chain
      last_arrival_time = ta;
      buffer.push_back(ta);
    }
  }

  void on_energy_arrival() {
    if (cfg.service == ServiceMode::Instantaneous && !buffer.empty()) {
      double ta;
      if (cfg.discipline == Discipline::FCFS) {
        ta = buffer.front();
        buffer.pop_front();
      } else {
        ta = buffer.back();
        buffer.pop_back();
      }
      deliver(now, ta);  // the fresh energy packet is consumed immediately
      return;
    }
    if (battery < p.B)
      ++battery;
    else if (measuring)
      ++res.counts.energy_discarded;
  }

  bool service_active() const { return !buffer.empty() && battery > 0; }

  void maybe_activate_service() {
    if (cfg.service == ServiceMode::ExponentialService && !next_completion &&
        service_active())
      next_completion = now + service_rng.next();
  }

  void on_completion() {
    next_completion.reset();
    const double ta = buffer.front();
    buffer.pop_front();
    --battery;  // energy consumed at completion
    deliver(now, ta);
  }
};

}  // namespace detail

// Event-driven simulation of the two-queue system. Deterministic for a given
// seed; statistics are collected after the warmup fraction of the horizon.
inline SimResult run_sim(const SimConfig& cfg,
                         std::map<int, double>* occupancy = nullptr,
                         std::vector<double>* valid_arrival_times = nullptr) {
  validate_params(cfg.params);
  if (cfg.warmup_fraction < 0.0 || cfg.warmup_fraction > 0.5)
    throw Error("warmup_fraction must be in [0, 0.5]");
  if (cfg.service == ServiceMode::ExponentialService) {
    if (!cfg.params.mu)
      throw ModeUnsupported("exponential service requires params.mu");
    if (cfg.discipline == Discipline::LCFS)
      throw ModeUnsupported("LCFS with exponential service is not supported");
  }
  if (!(cfg.horizon.value > 0.0)) throw Error("horizon must be positive");

  detail::SimEngine eng(cfg);
  eng.occupancy = occupancy;
  eng.valid_arrival_times = valid_arrival_times;

  std::uint64_t event_count = 0;
  const double warm_target = cfg.warmup_fraction * cfg.horizon.value;

  auto past_warmup = [&]() {
    switch (cfg.horizon.kind) {
      case SimHorizon::Kind::Events:
        return static_cast<double>(event_count) >= warm_target;
      case SimHorizon::Kind::Time:
        return eng.now >= warm_target;
      case SimHorizon::Kind::ValidUpdates:
        return static_cast<double>(eng.total_valid) >= warm_target;
    }
    return true;
  };
  auto done = [&]() {
    switch (cfg.horizon.kind) {
      case SimHorizon::Kind::Events:
        return static_cast<double>(event_count) >= cfg.horizon.value;
      case SimHorizon::Kind::Time:
        return eng.now >= cfg.horizon.value;
      case SimHorizon::Kind::ValidUpdates:
        return static_cast<double>(eng.res.counts.valid_updates) >=
               cfg.horizon.value;
    }
    return true;
  };

  while (!done()) {
    if (!eng.measuring && past_warmup()) eng.start_measuring();

    double t = std::fmin(eng.next_status, eng.next_energy);
    char kind = (eng.next_status <= eng.next_energy) ? 'a' : 'e';
    if (eng.next_completion && *eng.next_completion < t) {
      t = *eng.next_completion;
      kind = 's';
    }
    eng.advance_to(t);

    switch (kind) {
      case 'a':
        eng.next_status = eng.now + eng.status_rng.next();
        eng.on_status_arrival();
        break;
      case 'e':
        eng.next_energy = eng.now + eng.energy_rng.next();
        eng.on_energy_arrival();
        break;
      case 's':
        eng.on_completion();
        break;
    }
    eng.maybe_activate_service();
    if (cfg.event_log)
      cfg.event_log(eng.now, kind, static_cast<int>(eng.buffer.size()),
                    eng.battery, eng.aoi_at(eng.now));
    ++event_count;
  }

  eng.close_segment(eng.now);  // trailing AoI segment

  SimResult res = std::move(eng.res);
  res.counts.in_flight = eng.buffer.size();
  res.elapsed_sim_time = eng.now - eng.measure_start;
  res.valid_rate_hat = res.counts.valid_updates / res.elapsed_sim_time;
  for (double& v : res.time_avg_penalty) v /= res.elapsed_sim_time;
  return res;
}

// Long-run time fraction per collapsed state S = q1 - q2 in [-B, K];
// instantaneous mode only.
inline std::map<int, double> state_occupancy(const SimConfig& cfg) {
  if (cfg.service != ServiceMode::Instantaneous)
    throw ModeUnsupported("state occupancy is defined for instantaneous service");
  std::map<int, double> occ;
  SimConfig c = cfg;
  c.record_samples = false;
  const SimResult res = run_sim(c, &occ);
  for (auto& [s, t] : occ) t /= res.elapsed_sim_time;
  return occ;
}

// Max deviation between the empirical valid-update inter-arrival CDF and
// its closed form on the given grid. FCFS, instantaneous mode only.
inline double empirical_interarrival_cdf_check(const SimConfig& cfg,
                                               const std::vector<double>& grid) {
  if (cfg.service != ServiceMode::Instantaneous ||
      cfg.discipline != Discipline::FCFS)
    throw ModeUnsupported("inter-arrival check needs FCFS, instantaneous mode");
  std::vector<double> arrivals;
  SimConfig c = cfg;
  c.record_samples = false;
  run_sim(c, nullptr, &arrivals);

  std::vector<double> gaps;
  gaps.reserve(arrivals.size());
  for (std::size_t i = 1; i < arrivals.size(); ++i)
    gaps.push_back(arrivals[i] - arrivals[i - 1]);
  std::sort(gaps.begin(), gaps.end());
  if (gaps.empty()) throw Error("no valid updates observed");

  const double th = cfg.params.theta();
  const double thKB = std::pow(th, cfg.params.K + cfg.params.B);
  double max_dev = 0.0;
  for (double x : grid) {
    const double closed = 1.0 +
                          std::exp(-cfg.params.r * x) * thKB / (1.0 - thKB) -
                          std::exp(-cfg.params.lambda * x) / (1.0 - thKB);
    const auto it = std::upper_bound(gaps.begin(), gaps.end(), x);
    const double emp =
        static_cast<double>(it - gaps.begin()) / static_cast<double>(gaps.size());
    max_dev = std::fmax(max_dev, std::abs(emp - closed));
  }
  return max_dev;
}

// Kolmogorov distance between empirical samples and a reference CDF. Tied
// samples are treated as one jump; the reference laws here are continuous
// except for a possible atom at zero, so the left limit is 0 there.
inline double kolmogorov_distance(std::vector<double> samples,
                                  const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < samples.size()) {
    std::size_t j = i;
    while (j < samples.size() && samples[j] == samples[i]) ++j;
    const double f = cdf(samples[i]);
    const double f_left = samples[i] == 0.0 ? 0.0 : f;
    d = std::fmax(d, std::abs(f - static_cast<double>(j) / n));
    d = std::fmax(d, std::abs(f_left - static_cast<double>(i) / n));
    i = j;
  }
  return d;
}

}  // namespace aoi
