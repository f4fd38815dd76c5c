#ifndef TWISTGAS_CONFIG_HPP
#define TWISTGAS_CONFIG_HPP

#include <nlohmann/json.hpp>

#include <stdexcept>
#include <string>
#include <vector>

#include "twistgas/core.hpp"
#include "twistgas/map_analysis.hpp"
#include "twistgas/quadrature.hpp"
#include "twistgas/regimes.hpp"

namespace twistgas {

/// Bad configuration; the message starts with the JSON path of the field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct RunConfig {
  SimParams sim{};  // seed doubles as the master seed of scans
  TrapSpec trap{};
  bool trap_given = false;
  int workers = 0;
  std::string output;  // empty = stdout

  // simulate
  std::uint64_t events = 1000;
  std::string event_log;

  // escape-scan
  std::vector<double> lambda_grid;
  int samples_per_lambda = 1000;
  std::string fit_output;

  // drift
  int drift_samples = 1000;
  std::uint64_t events_per_sample = 10000;

  // sstar-decay
  double perturbation = 1e-3;
  std::uint64_t pair_collisions = 2000;
  int sstar_runs = 1;

  // map-analyze
  MapAnalysisOptions map{};

  // lemmas
  QuadOptions quad{};
  std::vector<double> t_grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
};

/// Reads a config document. Unknown keys and wrongly typed values throw
/// ConfigError with the offending path, e.g. "$.rule.family".
RunConfig parse_config(const nlohmann::json& doc, RunConfig base = {});

RunConfig load_config(const std::string& path);

/// The trap a rule implies when none is configured.
TrapSpec default_trap(const TwistRule& rule);

}  // namespace twistgas

#endif  // TWISTGAS_CONFIG_HPP
