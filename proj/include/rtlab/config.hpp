// Declarative experiment configuration (YAML).
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtlab/dynamics.hpp"
#include "rtlab/regenerative.hpp"
#include "rtlab/targets.hpp"

namespace rtlab {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SystemConfig {
  std::string kind = "interval";  // interval | torus | cml | regenerative
  // Interval maps and lattice base maps.
  std::string map = "linear";     // linear | sine
  int a = 2;
  double eps = 0.1;
  // Lattice.
  int n = 2;
  double gamma = 0.0;
  std::vector<double> weights;
  std::string backend = "auto";   // auto | exact_digit | float64 | float64_dither
  std::uint64_t burn_in = 0;
  // Regenerative processes.
  std::string rule = "smith";     // smith | fixed_lengths
  std::vector<double> lengths;
  double gamma_exponent = 2.0;
  std::uint64_t k_cap = 100'000;

  bool operator==(const SystemConfig&) const = default;
};

struct TargetConfig {
  std::string kind = "ball";  // ball | torus_strip | diagonal_strip | level
  std::vector<double> center;
  bool periodic = false;

  bool operator==(const TargetConfig&) const = default;
};

/// One run: the target size (rho, nu or the level m) and what to measure.
struct ScheduleRow {
  double size = 0.0;
  std::vector<std::uint64_t> K;     // cluster statistics per window half-length
  std::optional<std::uint64_t> L;   // entry-time ratio horizon
  std::optional<double> t;          // counting law at Kac time t
  std::uint64_t n_trials = 10'000;  // counting / entry-time trials, regenerative streams
  std::uint64_t min_entries = 10'000;
  std::uint64_t orbit_length = 200'000;
  std::uint64_t max_steps = 10'000'000'000ull;

  bool operator==(const ScheduleRow&) const = default;
};

struct OutputConfig {
  std::string dir = "out";
  std::vector<std::string> formats{"csv", "json"};

  bool operator==(const OutputConfig&) const = default;
};

struct PredictConfig {
  int k_max = 12;
  double tol = 1e-12;

  bool operator==(const PredictConfig&) const = default;
};

struct ExperimentConfig {
  std::string name = "experiment";
  SystemConfig system;
  TargetConfig target;
  std::vector<ScheduleRow> schedule;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  double threshold = 0.01;  // compare: minimum chi-square p-value
  OutputConfig outputs;
  PredictConfig predict;

  bool operator==(const ExperimentConfig&) const = default;

  /// Parse and validate; unknown keys are errors.
  static ExperimentConfig parse(const std::string& yaml);
  static ExperimentConfig load(const std::string& path);
  /// Every field, defaults included. Results never depend on `workers`, so
  /// it can be left out where output must be identical across worker counts.
  std::string to_yaml(bool include_workers = true) const;
  void validate() const;

  bool regenerative() const { return system.kind == "regenerative"; }
  MapSystem make_system() const;
  TargetSet make_target(double size) const;
  RegenSpec make_regen() const;
  IntervalMap base_map() const;
};

}  // namespace rtlab
