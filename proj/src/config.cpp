#include "twistgas/config.hpp"

#include <fstream>
#include <set>

namespace twistgas {

namespace {

using nlohmann::json;

class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_, "expected an object");
  }

  // Rejects keys that no accessor asked about.
  void finish() const {
    for (const auto& item : node_.items()) {
      if (!seen_.count(item.key())) {
        throw ConfigError(path_ + "." + item.key(), "unknown key");
      }
    }
  }

  Reader(const Reader&) = delete;
  Reader& operator=(const Reader&) = delete;

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key);
  }

  std::string path(const std::string& key) const { return path_ + "." + key; }
  const json& at(const std::string& key) const { return node_.at(key); }

  void number(const std::string& key, double& out) {
    if (!has(key)) return;
    if (!at(key).is_number()) throw ConfigError(path(key), "expected a number");
    out = at(key).get<double>();
  }

  template <typename Int>
  void integer(const std::string& key, Int& out) {
    if (!has(key)) return;
    const auto& v = at(key);
    if (!v.is_number_integer()) throw ConfigError(path(key), "expected an integer");
    if (v.is_number_unsigned()) {
      out = static_cast<Int>(v.get<std::uint64_t>());
    } else {
      const auto x = v.get<std::int64_t>();
      if (std::is_unsigned_v<Int> && x < 0) throw ConfigError(path(key), "must be >= 0");
      out = static_cast<Int>(x);
    }
  }

  void string(const std::string& key, std::string& out) {
    if (!has(key)) return;
    if (!at(key).is_string()) throw ConfigError(path(key), "expected a string");
    out = at(key).get<std::string>();
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    if (!has(key)) return;
    const auto& v = at(key);
    if (!v.is_array()) throw ConfigError(path(key), "expected an array of numbers");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) {
        throw ConfigError(path(key) + "[" + std::to_string(i) + "]", "expected a number");
      }
      out.push_back(v[i].get<double>());
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_rule(Reader& parent, TwistRule& rule) {
  if (!parent.has("rule")) return;
  Reader r(parent.at("rule"), parent.path("rule"));
  std::string family;
  r.string("family", family);
  if (!family.empty()) {
    try {
      rule.family = parse_family(family);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(r.path("family"), e.what());
    }
  }
  r.number("lambda", rule.lambda);
  r.finish();
}

void read_tolerances(Reader& parent, ToleranceSet& tol) {
  if (!parent.has("tolerances")) return;
  Reader r(parent.at("tolerances"), parent.path("tolerances"));
  r.number("energy", tol.energy);
  r.number("overlap", tol.overlap);
  r.number("event_tie", tol.event_tie);
  r.number("root", tol.root);
  r.finish();
}

void read_sim(Reader& parent, SimParams& sim) {
  if (!parent.has("sim")) return;
  Reader r(parent.at("sim"), parent.path("sim"));
  r.integer("n_disks", sim.n_disks);
  r.number("diameter", sim.diameter);
  r.integer("max_events", sim.max_events);
  read_tolerances(r, sim.tolerances);
  r.finish();
}

void read_trap(Reader& parent, RunConfig& cfg) {
  if (!parent.has("trap")) return;
  Reader r(parent.at("trap"), parent.path("trap"));
  cfg.trap_given = true;
  std::string kind;
  r.string("kind", kind);
  if (!kind.empty()) {
    try {
      cfg.trap.kind = parse_trap_kind(kind);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(r.path("kind"), e.what());
    }
  }
  if (r.has("eps0")) {
    double eps0 = 0.0;
    r.number("eps0", eps0);
    cfg.trap.eps0 = eps0;
  }
  r.number("tol_momentum", cfg.trap.tol_momentum);
  r.number("tol_center", cfg.trap.tol_center);
  r.finish();
  try {
    cfg.trap.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(parent.path("trap"), e.what());
  }
}

template <typename Fn>
void read_block(Reader& parent, const std::string& key, Fn&& fn) {
  if (!parent.has(key)) return;
  Reader r(parent.at(key), parent.path(key));
  fn(r);
  r.finish();
}

}  // namespace

RunConfig parse_config(const nlohmann::json& doc, RunConfig cfg) {
  {
    Reader root(doc, "$");
    root.integer("seed", cfg.sim.seed);
    root.integer("workers", cfg.workers);
    root.string("output", cfg.output);
    read_rule(root, cfg.sim.rule);
    read_sim(root, cfg.sim);
    read_trap(root, cfg);
    read_block(root, "simulate", [&](Reader& r) {
      r.integer("events", cfg.events);
      r.string("event_log", cfg.event_log);
    });
    read_block(root, "scan", [&](Reader& r) {
      r.numbers("lambda_grid", cfg.lambda_grid);
      r.integer("samples_per_lambda", cfg.samples_per_lambda);
      r.string("fit_output", cfg.fit_output);
    });
    read_block(root, "drift", [&](Reader& r) {
      r.integer("samples", cfg.drift_samples);
      r.integer("events_per_sample", cfg.events_per_sample);
    });
    read_block(root, "sstar", [&](Reader& r) {
      r.number("perturbation", cfg.perturbation);
      r.integer("pair_collisions", cfg.pair_collisions);
      r.integer("runs", cfg.sstar_runs);
    });
    read_block(root, "map", [&](Reader& r) {
      r.integer("grid_size", cfg.map.grid_size);
      r.number("root_tol", cfg.map.root_tol);
      r.number("neutral_tol", cfg.map.neutral_tol);
      r.number("derivative_step", cfg.map.derivative_step);
    });
    read_block(root, "lemmas", [&](Reader& r) {
      r.number("abs_tol", cfg.quad.abs_tol);
      r.integer("max_panels", cfg.quad.max_panels);
      r.numbers("t_grid", cfg.t_grid);
    });
    root.finish();
  }
  try {
    cfg.sim.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("$.sim", e.what());
  }
  if (cfg.workers < 0) throw ConfigError("$.workers", "must be >= 0");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("$", "cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("$", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

TrapSpec default_trap(const TwistRule& rule) {
  if (rule.family == Family::ReversibleShear) return TrapSpec::sstar();
  return rule.lambda < 0.0 ? TrapSpec::wpm() : TrapSpec::u0();
}

}  // namespace twistgas
