// Command-line front end: single-point analysis, sweeps, simulation, the
// matrix-geometric solver, and a built-in cross-validation suite.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "aoi/asymptotics.hpp"
#include "aoi/fcfs.hpp"
#include "aoi/lcfs.hpp"
#include "aoi/penalty_engine.hpp"
#include "aoi/qbd.hpp"
#include "aoi/sim.hpp"

namespace {

using namespace aoi;

constexpr int kExitOk = 0;
constexpr int kExitInvalidParams = 2;
constexpr int kExitDivergentPenalty = 3;
constexpr int kExitUnsupported = 4;
constexpr int kExitNotConverged = 5;

// ---------------------------------------------------------------- formatting

// JSON carries 17 significant digits (machine interface), CSV 12 (human one).
std::string fmt_sig(double v, int sig) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", sig, v);
  return buf;
}

// One output record: ordered fields with pre-rendered JSON and CSV forms.
struct Record {
  std::vector<std::string> names, json, csv;

  void num(const std::string& n, double v) {
    names.push_back(n);
    json.push_back(std::isfinite(v) ? fmt_sig(v, 17) : "null");
    csv.push_back(std::isfinite(v) ? fmt_sig(v, 12) : "nan");
  }
  void integer(const std::string& n, long long v) {
    names.push_back(n);
    json.push_back(std::to_string(v));
    csv.push_back(std::to_string(v));
  }
  void str(const std::string& n, const std::string& v) {
    names.push_back(n);
    json.push_back("\"" + v + "\"");
    csv.push_back(v);
  }
  void boolean(const std::string& n, bool v) {
    names.push_back(n);
    json.push_back(v ? "true" : "false");
    csv.push_back(v ? "true" : "false");
  }
};

std::string join(const std::vector<std::string>& v, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += v[i];
  }
  return out;
}

std::string render_json(const std::vector<Record>& rows) {
  std::string out;
  const bool array = rows.size() != 1;
  if (array) out += "[\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out += array ? "  {" : "{\n";
    for (std::size_t i = 0; i < rows[r].names.size(); ++i) {
      if (i) out += array ? ", " : ",\n";
      if (!array) out += "  ";
      out += "\"" + rows[r].names[i] + "\": " + rows[r].json[i];
    }
    out += array ? "}" : "\n}";
    if (array && r + 1 < rows.size()) out += ",";
    out += "\n";
  }
  if (array) out += "]\n";
  return out;
}

std::string render_csv(const std::vector<Record>& rows) {
  std::string out = join(rows.front().names, ",") + "\n";
  for (const auto& r : rows) out += join(r.csv, ",") + "\n";
  return out;
}

// Default output directory comes from the environment; --output takes a
// path, relative paths land inside $AOI_OUTPUT_DIR when it is set.
void emit(const std::string& text, const std::string& output) {
  if (output.empty()) {
    std::cout << text;
    return;
  }
  std::string path = output;
  const char* dir = std::getenv("AOI_OUTPUT_DIR");
  if (dir && *dir && path.front() != '/') path = std::string(dir) + "/" + path;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open output file: " + path);
  f << text;
}

// -------------------------------------------------------------- config file

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Flat key=value file mirroring the flags; expanded into arguments that are
// injected ahead of the explicit flags, so the flags win.
std::vector<std::string> load_config_args(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open config file: " + path);
  std::vector<std::string> args;
  std::string line;
  while (std::getline(f, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error("config line is not key=value: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw Error("config line has an empty key: " + line);
    args.push_back("--" + key);
    if (val == "true")
      ;  // bare flag
    else if (val == "false")
      args.pop_back();
    else
      args.push_back(val);
  }
  return args;
}

std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config;
  for (auto it = args.begin(); it != args.end();) {
    if (*it == "--config" && it + 1 != args.end()) {
      config = *(it + 1);
      it = args.erase(it, it + 2);
    } else if (it->rfind("--config=", 0) == 0) {
      config = it->substr(9);
      it = args.erase(it);
    } else {
      ++it;
    }
  }
  if (!config.empty()) {
    // explicit flags win: config keys already present are dropped
    std::vector<std::string> given;
    for (const auto& a : args)
      if (a.rfind("--", 0) == 0) given.push_back(a.substr(0, a.find('=')));
    const auto extra = load_config_args(config);
    std::vector<std::string> keep;
    for (std::size_t i = 0; i < extra.size();) {
      const bool has_value = i + 1 < extra.size() && extra[i + 1].rfind("--", 0) != 0;
      if (std::find(given.begin(), given.end(), extra[i]) == given.end()) {
        keep.push_back(extra[i]);
        if (has_value) keep.push_back(extra[i + 1]);
      }
      i += has_value ? 2 : 1;
    }
    auto pos = args.begin();
    if (pos != args.end() && pos->front() != '-') ++pos;  // keep subcommand first
    args.insert(pos, keep.begin(), keep.end());
  }
  return args;
}

// ------------------------------------------------------------- shared flags

struct CommonArgs {
  std::string discipline = "fcfs";
  double lambda = 0.0, rate = 0.0;
  int buffer = 0, battery = 1;
  std::string penalty = "linear";
  double alpha = 0.0, beta = 0.0;
  std::string format = "json";
  std::string output;

  Discipline parsed_discipline() const {
    return discipline == "lcfs" ? Discipline::LCFS : Discipline::FCFS;
  }
  SystemParams params() const {
    return validate_params({lambda, rate, buffer, battery, std::nullopt});
  }
  PenaltySpec penalty_spec() const {
    if (penalty == "linear") return PenaltySpec::linear();
    if (penalty == "exp") return PenaltySpec::exponential(alpha);
    if (penalty == "step") return PenaltySpec::step(beta);
    throw UnsupportedPenalty("unknown penalty: " + penalty);
  }
};

void add_common(CLI::App* sub, CommonArgs& a, bool need_rates = true) {
  sub->add_option("--discipline", a.discipline, "fcfs|lcfs")
      ->check(CLI::IsMember({"fcfs", "lcfs"}));
  auto* l = sub->add_option("--lambda", a.lambda, "status packet arrival rate");
  auto* r = sub->add_option("--rate", a.rate, "energy packet arrival rate");
  if (need_rates) {
    l->required();
    r->required();
  }
  sub->add_option("--buffer", a.buffer, "data buffer capacity K");
  sub->add_option("--battery", a.battery, "battery capacity B");
  sub->add_option("--penalty", a.penalty, "linear|exp|step")
      ->check(CLI::IsMember({"linear", "exp", "step"}));
  sub->add_option("--alpha", a.alpha, "exponential penalty exponent");
  sub->add_option("--beta", a.beta, "step penalty threshold");
  sub->add_option("--format", a.format, "json|csv")
      ->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--output", a.output,
                  "output file (relative paths join AOI_OUTPUT_DIR)");
  static std::string config_sink;  // handled in expand_config; here for --help
  sub->add_option("--config", config_sink,
                  "flat key=value file mirroring the flags; flags win");
}

// -------------------------------------------------------------- metric eval

double theorem_metric(const SystemParams& p, Discipline d,
                      const PenaltySpec& spec) {
  const bool fcfs = d == Discipline::FCFS;
  switch (spec.kind) {
    case PenaltySpec::Kind::Linear:
      return fcfs ? fcfs_avg_aoi(p) : lcfs_avg_aoi(p);
    case PenaltySpec::Kind::Exponential:
      return fcfs ? fcfs_avg_exp_penalty(p, spec.alpha)
                  : lcfs_avg_exp_penalty(p, spec.alpha);
    case PenaltySpec::Kind::Step:
      return fcfs ? fcfs_violation_prob(p, spec.beta)
                  : lcfs_violation_prob(p, spec.beta);
    default:
      throw UnsupportedPenalty("no closed form for custom penalties");
  }
}

UpdateProcessStats stats_for(const SystemParams& p, Discipline d) {
  return d == Discipline::FCFS ? fcfs_stats(p) : lcfs_stats(p);
}

// ----------------------------------------------------------------- analyze

int cmd_analyze(const CommonArgs& a) {
  const SystemParams p = a.params();
  const Discipline d = a.parsed_discipline();
  const PenaltySpec spec = a.penalty_spec();
  const auto stats = stats_for(p, d);

  const double avg_penalty_theorem = theorem_metric(p, d, spec);
  const double avg_penalty_eq5 = average_penalty(stats, spec).value;
  const double scale = std::fmax(std::abs(avg_penalty_theorem), 1e-300);
  const bool agrees =
      std::abs(avg_penalty_theorem - avg_penalty_eq5) / scale <= 1e-9;

  Record rec;
  rec.str("discipline", to_string(d));
  rec.str("penalty", a.penalty);
  rec.num("alpha", spec.kind == PenaltySpec::Kind::Exponential
                       ? spec.alpha
                       : std::nan(""));
  rec.num("beta",
          spec.kind == PenaltySpec::Kind::Step ? spec.beta : std::nan(""));
  rec.num("theta", p.theta());
  rec.num("lambda", p.lambda);
  rec.num("r", p.r);
  rec.integer("K", p.K);
  rec.integer("B", p.B);
  rec.num("valid_rate", stats.valid_rate);
  rec.num("avg_aoi", d == Discipline::FCFS ? fcfs_avg_aoi(p) : lcfs_avg_aoi(p));
  rec.num("avg_peak_aoi", avg_peak_from_stats(stats));
  rec.num("violation_prob", spec.kind == PenaltySpec::Kind::Step
                                ? avg_penalty_theorem
                                : std::nan(""));
  rec.num("avg_penalty", avg_penalty_theorem);
  rec.num("avg_penalty_crosscheck", avg_penalty_eq5);
  rec.boolean("crosscheck_agrees", agrees);

  emit(a.format == "csv" ? render_csv({rec}) : render_json({rec}), a.output);
  return kExitOk;
}

// ------------------------------------------------------------------- sweep

struct SweepArgs {
  CommonArgs common;
  std::string swept = "theta";
  double from = 0.0, to = 0.0;
  int steps = 2;
  bool log_spacing = false;
  std::vector<std::string> metrics = {"avg_penalty"};
  int jobs = 1;
};

std::vector<double> make_grid(double from, double to, int steps, bool log) {
  if (steps < 2) throw Error("steps must be >= 2");
  std::vector<double> g(steps);
  if (log) {
    if (!(from > 0.0) || !(to > 0.0))
      throw Error("log spacing needs positive endpoints");
    const double lf = std::log(from), lt = std::log(to);
    for (int i = 0; i < steps; ++i)
      g[i] = std::exp(lf + (lt - lf) * i / (steps - 1));
  } else {
    for (int i = 0; i < steps; ++i)
      g[i] = from + (to - from) * i / (steps - 1);
  }
  return g;
}

int cmd_sweep(const SweepArgs& sa) {
  const CommonArgs& a = sa.common;
  const Discipline d = a.parsed_discipline();
  const auto grid = make_grid(sa.from, sa.to, sa.steps, sa.log_spacing);

  for (const auto& m : sa.metrics)
    if (m != "avg_penalty" && m != "avg_aoi" && m != "valid_rate" &&
        m != "peak_mean" && m != "violation_prob")
      throw Error("unknown metric: " + m);

  // every grid point must pass validation before any work starts
  auto point = [&](double v) {
    SystemParams p{a.lambda, a.rate, a.buffer, a.battery, std::nullopt};
    PenaltySpec spec = a.penalty_spec();
    if (sa.swept == "theta")
      p.lambda = v * p.r;
    else if (sa.swept == "lambda")
      p.lambda = v;
    else if (sa.swept == "r")
      p.r = v;
    else if (sa.swept == "K")
      p.K = static_cast<int>(std::lround(v));
    else if (sa.swept == "B")
      p.B = static_cast<int>(std::lround(v));
    else if (sa.swept == "alpha")
      spec = PenaltySpec::exponential(v);
    else if (sa.swept == "beta")
      spec = PenaltySpec::step(v);
    else
      throw Error("unknown sweep variable: " + sa.swept);
    validate_params(p);
    return std::pair{p, spec};
  };
  for (double v : grid) point(v);

  std::vector<Record> rows(grid.size() * sa.metrics.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next.fetch_add(1); i < grid.size();
         i = next.fetch_add(1)) {
      const auto [p, spec] = point(grid[i]);
      for (std::size_t m = 0; m < sa.metrics.size(); ++m) {
        const std::string& metric = sa.metrics[m];
        double value;
        std::string method = "exact";
        try {
          if (metric == "avg_penalty")
            value = theorem_metric(p, d, spec);
          else if (metric == "avg_aoi")
            value = theorem_metric(p, d, PenaltySpec::linear());
          else if (metric == "violation_prob")
            value = theorem_metric(p, d, PenaltySpec::step(spec.beta));
          else if (metric == "valid_rate")
            value = d == Discipline::FCFS ? fcfs_valid_rate(p)
                                          : lcfs_valid_rate(p);
          else  // peak_mean
            value = avg_peak_from_stats(stats_for(p, d));
        } catch (const PenaltyDiverges&) {
          value = std::nan("");
          method = "diverged";
        }
        Record& rec = rows[i * sa.metrics.size() + m];
        rec.num("theta", p.theta());
        rec.num("lambda", p.lambda);
        rec.num("r", p.r);
        rec.integer("K", p.K);
        rec.integer("B", p.B);
        rec.str("discipline", to_string(d));
        rec.str("penalty", a.penalty);
        rec.num("alpha", spec.kind == PenaltySpec::Kind::Exponential
                             ? spec.alpha
                             : std::nan(""));
        rec.num("beta", spec.kind == PenaltySpec::Kind::Step ? spec.beta
                                                             : std::nan(""));
        rec.str("metric", metric);
        rec.num("value", value);
        rec.str("method", method);
      }
    }
  };
  // rows land in their grid slots, so completion order never shows
  const int jobs = std::max(1, sa.jobs);
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  emit(a.format == "csv" ? render_csv(rows) : render_json(rows), a.output);
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

struct SimArgs {
  CommonArgs common;
  std::uint64_t events = 1'000'000;
  double time_horizon = 0.0;
  std::uint64_t seed = 1;
  std::string service = "zero";
  double mu = 0.0;
  double warmup = 0.1;
};

int cmd_simulate(const SimArgs& sa) {
  const CommonArgs& a = sa.common;
  SimConfig cfg;
  cfg.params = {a.lambda, a.rate, a.buffer, a.battery,
                sa.service == "exp" ? std::optional<double>(sa.mu)
                                    : std::nullopt};
  validate_params(cfg.params);
  cfg.discipline = a.parsed_discipline();
  cfg.service = sa.service == "exp" ? ServiceMode::ExponentialService
                                    : ServiceMode::Instantaneous;
  cfg.horizon = sa.time_horizon > 0.0 ? SimHorizon::time(sa.time_horizon)
                                      : SimHorizon::events(sa.events);
  cfg.seed = sa.seed;
  cfg.warmup_fraction = sa.warmup;
  const PenaltySpec spec = a.penalty_spec();
  cfg.tracked_penalties = {spec};

  const SimResult res = run_sim(cfg);

  // closed forms exist for zero service; with exponential service only the
  // mean peak age has an analytic counterpart (the matrix-geometric solve)
  const bool zero_service = cfg.service == ServiceMode::Instantaneous;
  double an_rate = std::nan(""), an_aoi = std::nan("");
  double an_penalty = std::nan(""), an_peak = std::nan("");
  if (zero_service) {
    const SystemParams p = validate_params(
        {a.lambda, a.rate, a.buffer, a.battery, std::nullopt});
    const auto stats = stats_for(p, cfg.discipline);
    an_rate = stats.valid_rate;
    an_aoi = cfg.discipline == Discipline::FCFS ? fcfs_avg_aoi(p)
                                                : lcfs_avg_aoi(p);
    try {
      an_penalty = theorem_metric(p, cfg.discipline, spec);
    } catch (const PenaltyDiverges&) {
    }
    an_peak = avg_peak_from_stats(stats);
  } else if (cfg.discipline == Discipline::FCFS) {
    an_peak = qbd_avg_peak_aoi(cfg.params);
  }

  double sim_peak = std::nan("");
  if (!res.peak_samples.empty()) {
    double s = 0.0;
    for (double x : res.peak_samples) s += x;
    sim_peak = s / static_cast<double>(res.peak_samples.size());
  }
  auto rel = [](double sim, double an) {
    return std::isfinite(an) ? std::abs(sim - an) / std::abs(an) : std::nan("");
  };

  Record rec;
  rec.str("discipline", to_string(cfg.discipline));
  rec.str("service", sa.service);
  rec.str("penalty", a.penalty);
  rec.num("lambda", a.lambda);
  rec.num("r", a.rate);
  rec.integer("K", a.buffer);
  rec.integer("B", a.battery);
  rec.num("mu", zero_service ? std::nan("") : sa.mu);
  rec.integer("seed", static_cast<long long>(sa.seed));
  rec.num("elapsed_time", res.elapsed_sim_time);
  rec.integer("arrivals", static_cast<long long>(res.counts.arrivals));
  rec.integer("valid_updates", static_cast<long long>(res.counts.valid_updates));
  rec.num("valid_rate_sim", res.valid_rate_hat);
  rec.num("valid_rate_analytic", an_rate);
  rec.num("valid_rate_rel_err", rel(res.valid_rate_hat, an_rate));
  rec.num("avg_aoi_sim", res.avg_aoi());
  rec.num("avg_aoi_analytic", an_aoi);
  rec.num("avg_aoi_rel_err", rel(res.avg_aoi(), an_aoi));
  rec.num("avg_penalty_sim", res.time_avg_penalty[0]);
  rec.num("avg_penalty_analytic", an_penalty);
  rec.num("avg_penalty_rel_err", rel(res.time_avg_penalty[0], an_penalty));
  rec.num("peak_mean_sim", sim_peak);
  rec.num("peak_mean_analytic", an_peak);
  rec.num("peak_mean_rel_err", rel(sim_peak, an_peak));

  emit(a.format == "csv" ? render_csv({rec}) : render_json({rec}), a.output);
  return kExitOk;
}

// --------------------------------------------------------------------- qbd

struct QbdArgs {
  double lambda = 0.0, rate = 0.0, mu = 0.0;
  int battery = 1;
  double eps = 1e-8;
  long long max_iter = 1'000'000;
  std::string sweep;  // only "lambda" is meaningful
  double from = 0.0, to = 0.0;
  int steps = 2;
  std::string format = "json";
  std::string output;
};

Record qbd_record(const SystemParams& p, double eps, long long max_iter) {
  const QbdModel m = build_qbd(p);
  const QbdSolution sol = solve_qbd(m, eps, max_iter);
  const double sojourn = qbd_mean_sojourn(sol, p);

  Record rec;
  rec.num("lambda", p.lambda);
  rec.num("r", p.r);
  rec.num("mu", *p.mu);
  rec.integer("B", p.B);
  rec.num("avg_peak_aoi", 1.0 / p.lambda + sojourn);
  rec.num("mean_sojourn", sojourn);
  rec.num("mean_queue_length", qbd_mean_queue_length(sol));
  rec.integer("iterations", sol.iterations);
  rec.num("residual", sol.residual);
  return rec;
}

int cmd_qbd(const QbdArgs& qa) {
  std::vector<Record> rows;
  if (qa.sweep.empty()) {
    const SystemParams p =
        validate_params({qa.lambda, qa.rate, 0, qa.battery, qa.mu});
    rows.push_back(qbd_record(p, qa.eps, qa.max_iter));
  } else {
    if (qa.sweep != "lambda") throw Error("qbd sweeps only support lambda");
    for (double v : make_grid(qa.from, qa.to, qa.steps, false)) {
      const SystemParams p =
          validate_params({v, qa.rate, 0, qa.battery, qa.mu});
      rows.push_back(qbd_record(p, qa.eps, qa.max_iter));
    }
  }
  emit(qa.format == "csv" ? render_csv(rows) : render_json(rows), qa.output);
  return kExitOk;
}

// ---------------------------------------------------------------- selftest

int cmd_selftest() {
  int failures = 0;
  auto report = [&](const char* name, bool ok) {
    std::cout << (ok ? "PASS  " : "FAIL  ") << name << "\n";
    if (!ok) ++failures;
  };
  auto close_rel = [](double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::fmax(std::abs(b), 1e-300);
  };

  // theorem route vs survivor-integration route on a small grid
  bool routes = true;
  for (double theta : {0.2, 0.5, 0.8})
    for (int K : {0, 5})
      for (int B : {1, 3})
        for (auto d : {Discipline::FCFS, Discipline::LCFS}) {
          const SystemParams p =
              validate_params({2.0 * theta, 2.0, K, B, std::nullopt});
          const auto stats = stats_for(p, d);
          for (const auto& spec :
               {PenaltySpec::linear(), PenaltySpec::exponential(0.2),
                PenaltySpec::step(2.0)})
            routes = routes &&
                     close_rel(average_penalty(stats, spec).value,
                               theorem_metric(p, d, spec), 1e-9);
        }
  report("closed forms match survivor-integration route (1e-9)", routes);

  // deep-buffer limits agree with the buffered-to-infinity table
  bool table = true;
  for (double theta : {0.2, 0.5, 0.8})
    for (auto d : {Discipline::FCFS, Discipline::LCFS}) {
      const SystemParams deep =
          validate_params({2.0 * theta, 2.0, 200, 2, std::nullopt});
      table = table && close_rel(theorem_metric(deep, d, PenaltySpec::linear()),
                                 asymptotic_penalty(deep, d,
                                                    PenaltySpec::linear()),
                                 1e-6);
      table = table &&
              close_rel(battery_decay_rate(deep, d, PenaltySpec::linear()),
                        theta, 1e-9);
    }
  report("deep-buffer limits and geometric battery gain (1e-6)", table);

  // matrix-geometric solve certifies its own residual
  {
    const SystemParams p = validate_params({0.4, 0.8, 0, 5, 1.0});
    const QbdModel m = build_qbd(p);
    const QbdSolution sol = solve_qbd(m);
    const double mass =
        (sol.p0 * (Eigen::MatrixXd::Identity(6, 6) - sol.R).inverse()).sum();
    report("matrix-geometric residual < 1e-7 and normalized",
           sol.residual < 1e-7 && std::abs(mass - 1.0) < 1e-10);
  }

  // short simulation against the closed forms
  {
    SimConfig cfg;
    cfg.params = validate_params({0.5, 1.0, 5, 1, std::nullopt});
    cfg.horizon = SimHorizon::events(400'000);
    cfg.seed = 7;
    cfg.record_samples = false;
    cfg.tracked_penalties = {PenaltySpec::linear()};
    const SimResult res = run_sim(cfg);
    report("simulation tracks closed-form AoI within 3%",
           close_rel(res.avg_aoi(), fcfs_avg_aoi(cfg.params), 0.03));
    const SimResult res2 = run_sim(cfg);
    report("simulation is deterministic per seed",
           res.avg_aoi() == res2.avg_aoi() &&
               res.counts.valid_updates == res2.counts.valid_updates);
  }

  std::cout << (failures == 0 ? "all checks passed\n"
                              : std::to_string(failures) + " check(s) failed\n");
  return failures == 0 ? kExitOk : 1;
}

// -------------------------------------------------------------------- main

int dispatch(int argc, char** argv) {
  CLI::App app{"Status-update AoI toolkit: closed forms, sweeps, simulation, "
               "and a matrix-geometric solver"};
  app.require_subcommand(1);

  CommonArgs an;
  auto* analyze = app.add_subcommand("analyze", "closed-form single point");
  add_common(analyze, an);

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "grid sweep over one variable");
  add_common(sweep, sw.common);
  sweep->add_option("--sweep", sw.swept, "theta|lambda|r|K|B|alpha|beta")
      ->required()
      ->check(CLI::IsMember({"theta", "lambda", "r", "K", "B", "alpha", "beta"}));
  sweep->add_option("--from", sw.from)->required();
  sweep->add_option("--to", sw.to)->required();
  sweep->add_option("--steps", sw.steps)->required();
  sweep->add_flag("--log", sw.log_spacing, "logarithmic spacing");
  sweep->add_option("--metrics", sw.metrics,
                    "avg_penalty|avg_aoi|valid_rate|peak_mean|violation_prob");
  sweep->add_option("--jobs", sw.jobs, "parallel evaluation limit");

  SimArgs si;
  auto* simulate = app.add_subcommand("simulate", "discrete-event simulation");
  add_common(simulate, si.common);
  simulate->add_option("--events", si.events, "event-count horizon");
  simulate->add_option("--time", si.time_horizon, "time horizon");
  simulate->add_option("--seed", si.seed);
  simulate->add_option("--service", si.service, "zero|exp")
      ->check(CLI::IsMember({"zero", "exp"}));
  simulate->add_option("--mu", si.mu, "service rate (service=exp)");
  simulate->add_option("--warmup", si.warmup, "warmup fraction [0, 0.5]");

  QbdArgs qb;
  auto* qbd = app.add_subcommand("qbd", "matrix-geometric solver");
  qbd->add_option("--lambda", qb.lambda)->required();
  qbd->add_option("--rate", qb.rate)->required();
  qbd->add_option("--mu", qb.mu)->required();
  qbd->add_option("--battery", qb.battery)->required();
  qbd->add_option("--eps", qb.eps, "fixed-point tolerance");
  qbd->add_option("--max-iter", qb.max_iter);
  qbd->add_option("--sweep", qb.sweep, "sweep variable (lambda)");
  qbd->add_option("--from", qb.from);
  qbd->add_option("--to", qb.to);
  qbd->add_option("--steps", qb.steps);
  qbd->add_option("--format", qb.format)->check(CLI::IsMember({"json", "csv"}));
  qbd->add_option("--output", qb.output);
  static std::string qbd_config_sink;
  qbd->add_option("--config", qbd_config_sink,
                  "flat key=value file mirroring the flags; flags win");

  app.add_subcommand("selftest", "run the built-in cross-validation suite");

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());  // CLI11 consumes reversed args
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kExitInvalidParams;
  }

  if (analyze->parsed()) return cmd_analyze(an);
  if (sweep->parsed()) return cmd_sweep(sw);
  if (simulate->parsed()) return cmd_simulate(si);
  if (qbd->parsed()) return cmd_qbd(qb);
  return cmd_selftest();
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const PenaltyDiverges& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDivergentPenalty;
  } catch (const MgfDiverges& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDivergentPenalty;
  } catch (const ModeUnsupported& e) {
    std::cerr << "error: unsupported combination: " << e.what() << "\n";
    return kExitUnsupported;
  } catch (const UnsupportedPenalty& e) {
    std::cerr << "error: unsupported combination: " << e.what() << "\n";
    return kExitUnsupported;
  } catch (const NotConverged& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNotConverged;
  } catch (const DegenerateNullSpace& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNotConverged;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidParams;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidParams;
  }
}
