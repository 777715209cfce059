#include "rtlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace rtlab {

namespace {

void check_keys(const YAML::Node& node, const std::string& where, std::set<std::string> allowed) {
  if (!node.IsMap()) throw ConfigError(where + ": expected a table");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read(const YAML::Node& node, const char* key, T& out, const std::string& where) {
  if (!node[key]) return;
  try {
    out = node[key].as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(where + "." + key + ": invalid value");
  }
}

template <class T>
void read(const YAML::Node& node, const char* key, std::optional<T>& out, const std::string& where) {
  if (!node[key]) return;
  T v{};
  read(node, key, v, where);
  out = v;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed YAML: ") + e.what());
  }
  check_keys(root, "config", {"name", "system", "target", "schedule", "seed", "workers", "threshold", "outputs", "predict"});
  ExperimentConfig c;
  read(root, "name", c.name, "config");
  read(root, "seed", c.seed, "config");
  read(root, "workers", c.workers, "config");
  read(root, "threshold", c.threshold, "config");

  require(bool(root["system"]), "config: missing system");
  const auto sys = root["system"];
  check_keys(sys, "system", {"kind", "map", "a", "eps", "n", "gamma", "weights", "backend", "burn_in", "rule",
                             "lengths", "gamma_exponent", "k_cap"});
  auto& s = c.system;
  read(sys, "kind", s.kind, "system");
  read(sys, "map", s.map, "system");
  read(sys, "a", s.a, "system");
  read(sys, "eps", s.eps, "system");
  read(sys, "n", s.n, "system");
  read(sys, "gamma", s.gamma, "system");
  read(sys, "weights", s.weights, "system");
  read(sys, "backend", s.backend, "system");
  read(sys, "burn_in", s.burn_in, "system");
  read(sys, "rule", s.rule, "system");
  read(sys, "lengths", s.lengths, "system");
  read(sys, "gamma_exponent", s.gamma_exponent, "system");
  read(sys, "k_cap", s.k_cap, "system");

  require(bool(root["target"]), "config: missing target");
  const auto tgt = root["target"];
  check_keys(tgt, "target", {"kind", "center", "periodic"});
  read(tgt, "kind", c.target.kind, "target");
  read(tgt, "center", c.target.center, "target");
  read(tgt, "periodic", c.target.periodic, "target");

  require(root["schedule"] && root["schedule"].IsSequence(), "config: schedule must be a list");
  for (std::size_t i = 0; i < root["schedule"].size(); ++i) {
    const auto row = root["schedule"][i];
    const std::string where = "schedule[" + std::to_string(i) + "]";
    check_keys(row, where, {"size", "K", "L", "t", "n_trials", "min_entries", "orbit_length", "max_steps"});
    ScheduleRow r;
    require(bool(row["size"]), where + ": missing size");
    read(row, "size", r.size, where);
    if (row["K"] && row["K"].IsScalar()) {
      r.K = {0};
      read(row, "K", r.K[0], where);
    } else {
      read(row, "K", r.K, where);
    }
    read(row, "L", r.L, where);
    read(row, "t", r.t, where);
    read(row, "n_trials", r.n_trials, where);
    read(row, "min_entries", r.min_entries, where);
    read(row, "orbit_length", r.orbit_length, where);
    read(row, "max_steps", r.max_steps, where);
    c.schedule.push_back(std::move(r));
  }

  if (const auto out = root["outputs"]) {
    check_keys(out, "outputs", {"dir", "formats"});
    read(out, "dir", c.outputs.dir, "outputs");
    read(out, "formats", c.outputs.formats, "outputs");
  }
  if (const auto p = root["predict"]) {
    check_keys(p, "predict", {"k_max", "tol"});
    read(p, "k_max", c.predict.k_max, "predict");
    read(p, "tol", c.predict.tol, "predict");
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string ExperimentConfig::to_yaml(bool include_workers) const {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "name" << YAML::Value << name;
  e << YAML::Key << "system" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "kind" << YAML::Value << system.kind;
  e << YAML::Key << "map" << YAML::Value << system.map;
  e << YAML::Key << "a" << YAML::Value << system.a;
  e << YAML::Key << "eps" << YAML::Value << system.eps;
  e << YAML::Key << "n" << YAML::Value << system.n;
  e << YAML::Key << "gamma" << YAML::Value << system.gamma;
  e << YAML::Key << "weights" << YAML::Value << YAML::Flow << system.weights;
  e << YAML::Key << "backend" << YAML::Value << system.backend;
  e << YAML::Key << "burn_in" << YAML::Value << system.burn_in;
  e << YAML::Key << "rule" << YAML::Value << system.rule;
  e << YAML::Key << "lengths" << YAML::Value << YAML::Flow << system.lengths;
  e << YAML::Key << "gamma_exponent" << YAML::Value << system.gamma_exponent;
  e << YAML::Key << "k_cap" << YAML::Value << system.k_cap;
  e << YAML::EndMap;
  e << YAML::Key << "target" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "kind" << YAML::Value << target.kind;
  e << YAML::Key << "center" << YAML::Value << YAML::Flow << target.center;
  e << YAML::Key << "periodic" << YAML::Value << target.periodic;
  e << YAML::EndMap;
  e << YAML::Key << "schedule" << YAML::Value << YAML::BeginSeq;
  for (const auto& r : schedule) {
    e << YAML::BeginMap;
    e << YAML::Key << "size" << YAML::Value << r.size;
    e << YAML::Key << "K" << YAML::Value << YAML::Flow << r.K;
    if (r.L) e << YAML::Key << "L" << YAML::Value << *r.L;
    if (r.t) e << YAML::Key << "t" << YAML::Value << *r.t;
    e << YAML::Key << "n_trials" << YAML::Value << r.n_trials;
    e << YAML::Key << "min_entries" << YAML::Value << r.min_entries;
    e << YAML::Key << "orbit_length" << YAML::Value << r.orbit_length;
    e << YAML::Key << "max_steps" << YAML::Value << r.max_steps;
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;
  e << YAML::Key << "seed" << YAML::Value << seed;
  if (include_workers) e << YAML::Key << "workers" << YAML::Value << workers;
  e << YAML::Key << "threshold" << YAML::Value << threshold;
  e << YAML::Key << "outputs" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "dir" << YAML::Value << outputs.dir;
  e << YAML::Key << "formats" << YAML::Value << YAML::Flow << outputs.formats;
  e << YAML::EndMap;
  e << YAML::Key << "predict" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "k_max" << YAML::Value << predict.k_max;
  e << YAML::Key << "tol" << YAML::Value << predict.tol;
  e << YAML::EndMap;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

void ExperimentConfig::validate() const {
  const auto& s = system;
  static const std::set<std::string> kinds{"interval", "torus", "cml", "regenerative"};
  require(kinds.count(s.kind) > 0, "system.kind must be one of interval, torus, cml, regenerative");
  require(!schedule.empty(), "schedule must not be empty");
  require(workers >= 1 && workers <= 1024, "workers must lie in [1, 1024]");
  require(threshold >= 0.0 && threshold < 1.0, "threshold must lie in [0, 1)");
  for (const auto& f : outputs.formats) require(f == "csv" || f == "json", "outputs.formats: csv or json");
  require(!outputs.formats.empty(), "outputs.formats must not be empty");
  require(predict.k_max >= 1 && predict.k_max <= 64, "predict.k_max must lie in [1, 64]");
  require(predict.tol > 0.0 && predict.tol < 1e-3, "predict.tol must lie in (0, 1e-3)");

  if (regenerative()) {
    require(target.kind == "level", "regenerative systems take target.kind: level");
    try {
      make_regen().validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("system: ") + e.what());
    }
  } else {
    require(target.kind != "level", "target.kind level needs a regenerative system");
    try {
      const auto m = make_system();
      make_target(schedule.front().size).check_compatible(m);
      require(m.lebesgue_invariant() || m.burn_in() > 0,
              "system.burn_in must be > 0 for maps without a closed-form invariant law");
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(std::string("system/target: ") + e.what());
    }
  }
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const auto& r = schedule[i];
    const std::string where = "schedule[" + std::to_string(i) + "]";
    if (regenerative()) {
      require(r.size >= 1 && r.size == std::floor(r.size), where + ".size: the level m must be a positive integer");
      require(!r.t && !r.L, where + ": regenerative runs take K only");
    } else {
      require(r.size > 0.0 && r.size < 0.5, where + ".size must lie in (0, 0.5)");
    }
    require(!r.K.empty() || r.t || r.L, where + ": nothing to measure (give K, t or L)");
    for (auto k : r.K) require(k >= 1 && k <= 100'000, where + ".K must lie in [1, 1e5]");
    if (r.t) require(*r.t > 0.0 && *r.t <= 100.0, where + ".t must lie in (0, 100]");
    if (r.L) require(*r.L >= 1, where + ".L must be >= 1");
    require(r.n_trials >= 1, where + ".n_trials must be >= 1");
    require(r.min_entries >= 100, where + ".min_entries must be >= 100");
    require(r.orbit_length >= 1000, where + ".orbit_length must be >= 1000");
    require(r.max_steps >= r.orbit_length, where + ".max_steps must be >= orbit_length");
  }
}

IntervalMap ExperimentConfig::base_map() const {
  if (system.map == "linear") return LinearMod1{system.a};
  if (system.map == "sine") return SineMod1{system.a, system.eps};
  throw ConfigError("system.map must be linear or sine");
}

MapSystem ExperimentConfig::make_system() const {
  MapSystem::Kind kind;
  if (system.kind == "interval") {
    const auto b = base_map();
    if (const auto* l = std::get_if<LinearMod1>(&b)) {
      kind = *l;
    } else {
      kind = std::get<SineMod1>(b);
    }
  } else if (system.kind == "torus") {
    kind = TorusAffine{system.a};
  } else if (system.kind == "cml") {
    kind = CoupledLattice{base_map(), system.n, system.gamma, system.weights};
  } else {
    throw ConfigError("system.kind " + system.kind + " is not a map");
  }
  if (system.backend == "auto") {
    MapSystem probe(kind);
    return MapSystem(kind, probe.backend(), system.burn_in);
  }
  return MapSystem(kind, backend_from_string(system.backend), system.burn_in);
}

TargetSet ExperimentConfig::make_target(double size) const {
  if (target.kind == "ball") return TargetSet::ball(target.center, size, target.periodic);
  if (target.kind == "torus_strip") return TargetSet::torus_strip(size);
  if (target.kind == "diagonal_strip") return TargetSet::diagonal_strip(size);
  throw ConfigError("target.kind must be ball, torus_strip, diagonal_strip or level");
}

RegenSpec ExperimentConfig::make_regen() const {
  if (system.rule == "smith") return RegenSpec::smith(system.gamma_exponent, system.k_cap);
  if (system.rule == "fixed_lengths") {
    try {
      return RegenSpec::fixed(ClusterSizeDist(system.lengths), system.gamma_exponent, system.k_cap);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("system.lengths: ") + e.what());
    }
  }
  throw ConfigError("system.rule must be smith or fixed_lengths");
}

}  // namespace rtlab
