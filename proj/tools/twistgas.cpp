#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#include "twistgas/config.hpp"
#include "twistgas/engine.hpp"
#include "twistgas/experiments.hpp"
#include "twistgas/io.hpp"
#include "twistgas/map_analysis.hpp"
#include "twistgas/quadrature.hpp"

using namespace twistgas;

namespace {

// Command-line values that override the config file when given.
struct Overrides {
  std::string config;
  std::optional<std::string> family;
  std::optional<double> lambda;
  std::optional<int> n_disks;
  std::optional<double> diameter;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::uint64_t> max_events;
  std::optional<std::string> output;

  std::optional<std::uint64_t> events;
  std::optional<std::string> event_log;
  std::optional<std::vector<double>> lambdas;
  std::optional<int> samples;
  std::optional<std::string> trap;
  std::optional<double> eps0;
  std::optional<std::string> fit_output;
  std::optional<std::uint64_t> events_per_sample;
  std::optional<double> perturbation;
  std::optional<std::uint64_t> pair_collisions;
  std::optional<int> runs;
  std::optional<int> grid;
  std::optional<double> abs_tol;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON config file");
  cmd->add_option("--family", o.family, "specular | tan-center | reversible-shear");
  cmd->add_option("--lambda", o.lambda, "twist parameter");
  cmd->add_option("--n", o.n_disks, "number of disks");
  cmd->add_option("--d", o.diameter, "disk diameter");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--workers", o.workers, "worker threads (default: TWISTGAS_WORKERS or all cores)");
  cmd->add_option("--max-events", o.max_events, "event budget per trajectory");
  cmd->add_option("--output,-o", o.output, "output file (default stdout)");
}

RunConfig resolve(const Overrides& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (o.family) {
    try {
      cfg.sim.rule.family = parse_family(*o.family);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("--family", e.what());
    }
  }
  if (o.lambda) cfg.sim.rule.lambda = *o.lambda;
  if (o.n_disks) cfg.sim.n_disks = *o.n_disks;
  if (o.diameter) cfg.sim.diameter = *o.diameter;
  if (o.seed) cfg.sim.seed = *o.seed;
  if (o.workers) cfg.workers = *o.workers;
  if (o.max_events) cfg.sim.max_events = *o.max_events;
  if (o.output) cfg.output = *o.output;
  if (o.events) cfg.events = *o.events;
  if (o.event_log) cfg.event_log = *o.event_log;
  if (o.lambdas) cfg.lambda_grid = *o.lambdas;
  if (o.samples) {
    cfg.samples_per_lambda = *o.samples;
    cfg.drift_samples = *o.samples;
  }
  if (o.trap) {
    try {
      cfg.trap.kind = parse_trap_kind(*o.trap);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("--trap", e.what());
    }
    cfg.trap_given = true;
  }
  if (o.eps0) cfg.trap.eps0 = *o.eps0;
  if (o.fit_output) cfg.fit_output = *o.fit_output;
  if (o.events_per_sample) cfg.events_per_sample = *o.events_per_sample;
  if (o.perturbation) cfg.perturbation = *o.perturbation;
  if (o.pair_collisions) cfg.pair_collisions = *o.pair_collisions;
  if (o.runs) cfg.sstar_runs = *o.runs;
  if (o.grid) cfg.map.grid_size = *o.grid;
  if (o.abs_tol) cfg.quad.abs_tol = *o.abs_tol;
  if (cfg.sim.rule.family == Family::Specular && cfg.sim.rule.lambda != 0.0) {
    throw ConfigError("$.rule.lambda", "the specular rule takes no lambda; pick a --family");
  }
  try {
    cfg.sim.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("$.sim", e.what());
  }
  return cfg;
}

// Opens the output file, or returns stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw std::runtime_error("cannot open '" + path + "' for writing");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

int run_simulate(const RunConfig& cfg) {
  Rng rng(cfg.sim.seed);
  auto state = sample_initial_state(cfg.sim, rng);
  const double energy0 = kinetic_energy(state);
  const double momentum0 = horizontal_momentum(state);
  Sink sink(cfg.event_log.empty() ? cfg.output : cfg.event_log);
  EventLogWriter log(sink.stream());
  const auto never = [](const PhaseState<double>&, const StepOutcome<double>&) { return false; };
  const auto result = run_until(state, cfg.sim.rule, never, cfg.events, cfg.sim.tolerances,
                                [&](const PhaseState<double>& s, const StepOutcome<double>& out) {
                                  log.write(s, out);
                                });
  const nlohmann::json summary{
      {"events", result.n_events},
      {"reason", to_string(result.reason)},
      {"energy_drift", kinetic_energy(state) - energy0},
      {"momentum_change", horizontal_momentum(state) - momentum0},
      {"time", state.time}};
  std::cerr << summary.dump() << '\n';
  return 0;
}

std::vector<double> default_grid(double sign) {
  std::vector<double> grid{0.04, 0.06, 0.08, 0.12, 0.16, 0.2};
  if (sign < 0.0) {
    for (auto& l : grid) l = -l;
  }
  return grid;
}

int run_escape_scan(RunConfig cfg) {
  if (cfg.sim.rule.family == Family::Specular) {
    throw ConfigError("$.rule.family", "escape-scan needs a twisting family");
  }
  EscapeScanConfig scan;
  scan.lambda_grid = cfg.lambda_grid.empty() ? default_grid(cfg.sim.rule.lambda) : cfg.lambda_grid;
  if (!cfg.trap_given) {
    const auto eps0 = cfg.trap.eps0;
    cfg.trap = default_trap(TwistRule{cfg.sim.rule.family, scan.lambda_grid.front()});
    if (cfg.trap.kind == TrapKind::Wpm) cfg.trap.eps0 = eps0;
  }
  scan.samples_per_lambda = cfg.samples_per_lambda;
  scan.trap = cfg.trap;
  scan.sim = cfg.sim;
  scan.workers = cfg.workers;
  scan.master_seed = cfg.sim.seed;
  const auto stats = escape_scan(scan);
  Sink sink(cfg.output);
  write_escape_csv(sink.stream(), stats);
  if (!cfg.fit_output.empty()) {
    nlohmann::json report{{"schema", "twistgas.escape_fit/1"}, {"stats", nlohmann::json::array()}};
    for (const auto& s : stats) report["stats"].push_back(to_json(s));
    for (const auto model : {FitModel::Linear, FitModel::Refined}) {
      try {
        report[to_string(model)] = to_json(fit_scaling(stats, model));
      } catch (const DegenerateInput& e) {
        report[to_string(model)] = {{"error", e.what()}};
      }
    }
    Sink fit(cfg.fit_output);
    fit.stream() << report.dump(2) << '\n';
  }
  return 0;
}

int run_drift(const RunConfig& cfg) {
  DriftConfig drift;
  drift.sim = cfg.sim;
  drift.samples = cfg.drift_samples;
  drift.events_per_sample = cfg.events_per_sample;
  drift.workers = cfg.workers;
  drift.master_seed = cfg.sim.seed;
  const auto curve = drift_curve(drift);
  Sink sink(cfg.output);
  write_drift_csv(sink.stream(), curve);
  std::cerr << nlohmann::json{{"wall_events", curve.total()},
                              {"below", curve.below},
                              {"above", curve.above}}.dump()
            << '\n';
  return 0;
}

int run_sstar_decay(const RunConfig& cfg) {
  if (cfg.sim.rule.family != Family::ReversibleShear || cfg.sim.n_disks != 2) {
    throw ConfigError("$.rule", "sstar-decay needs reversible-shear with two disks");
  }
  if (cfg.sstar_runs < 1) throw ConfigError("$.sstar.runs", "must be >= 1");
  std::vector<SStarDecay> runs(static_cast<std::size_t>(cfg.sstar_runs));
  parallel_for(runs.size(), cfg.workers, [&](std::size_t r) {
    Rng rng(trajectory_seed(cfg.sim.seed, 0, r));
    auto start = random_sstar_state(cfg.sim.diameter, rng);
    if (cfg.perturbation > 0.0) start = perturb_state(start, cfg.perturbation, rng);
    runs[r] = sstar_decay(start, cfg.sim.rule, cfg.pair_collisions, cfg.sim.max_events,
                          cfg.sim.tolerances);
  });
  Sink sink(cfg.output);
  write_sstar_csv(sink.stream(), runs);
  nlohmann::json summary = nlohmann::json::array();
  for (const auto& run : runs) {
    nlohmann::json row{{"m", run.m}, {"exact", run.exact}, {"reason", to_string(run.reason)}};
    row["dv_slope"] = run.dv_fit ? nlohmann::json(run.dv_fit->a) : nlohmann::json();
    row["ell_slope"] = run.ell_fit ? nlohmann::json(run.ell_fit->a) : nlohmann::json();
    summary.push_back(row);
  }
  std::cerr << summary.dump() << '\n';
  return 0;
}

int run_map_analyze(const RunConfig& cfg) {
  Sink sink(cfg.output);
  sink.stream() << to_json(analyze_interval_map(cfg.sim.rule, cfg.map)).dump(2) << '\n';
  return 0;
}

int run_lemmas(const RunConfig& cfg) {
  Sink sink(cfg.output);
  sink.stream() << lemma_report(cfg.sim.rule, cfg.t_grid, cfg.quad).dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hard disks in a channel with twisting walls"};
  app.require_subcommand(1);
  Overrides o;

  auto* simulate = app.add_subcommand("simulate", "single trajectory with an event log");
  add_common(simulate, o);
  simulate->add_option("--events", o.events, "number of events");
  simulate->add_option("--event-log", o.event_log, "event log file (default: the output)");

  auto* scan = app.add_subcommand("escape-scan", "mean escape time per lambda");
  add_common(scan, o);
  scan->add_option("--lambdas", o.lambdas, "lambda grid");
  scan->add_option("--samples", o.samples, "samples per lambda");
  scan->add_option("--trap", o.trap, "U0 | Wpm | SStar");
  scan->add_option("--eps0", o.eps0, "use +-sum(u) > N - eps0 for Wpm");
  scan->add_option("--fit-output", o.fit_output, "JSON file for the scaling fits");

  auto* drift = app.add_subcommand("drift", "mean change of u at wall collisions");
  add_common(drift, o);
  drift->add_option("--samples", o.samples, "trajectories");
  drift->add_option("--events-per-sample", o.events_per_sample, "events per trajectory");

  auto* sstar = app.add_subcommand("sstar-decay", "decay of perturbations of the symmetric regime");
  add_common(sstar, o);
  sstar->add_option("--perturbation", o.perturbation, "perturbation size");
  sstar->add_option("--pair-collisions", o.pair_collisions, "disk-disk collisions per run");
  sstar->add_option("--runs", o.runs, "independent runs");

  auto* map = app.add_subcommand("map-analyze", "fixed points of the one-particle map");
  add_common(map, o);
  map->add_option("--grid", o.grid, "scan grid size");

  auto* lemmas = app.add_subcommand("lemmas", "quadrature of the decay integrals");
  add_common(lemmas, o);
  lemmas->add_option("--abs-tol", o.abs_tol, "absolute quadrature tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  // The symmetric regime only exists for the reversible rule with two disks.
  if (*sstar && o.config.empty()) {
    if (!o.family) o.family = "reversible-shear";
    if (!o.n_disks) o.n_disks = 2;
  }

  try {
    const RunConfig cfg = resolve(o);
    if (*simulate) return run_simulate(cfg);
    if (*scan) return run_escape_scan(cfg);
    if (*drift) return run_drift(cfg);
    if (*sstar) return run_sstar_decay(cfg);
    if (*map) return run_map_analyze(cfg);
    if (*lemmas) return run_lemmas(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
