// Experiment pipelines behind the command-line tool: analytic predictions,
// simulation of one schedule row, and prediction/simulation comparison.
#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtlab/config.hpp"
#include "rtlab/io.hpp"

namespace rtlab {

/// The configured system has no analytic prediction here.
class UnsupportedSystem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Files that cannot be compared (wrong schema, no common law).
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Prediction {
  std::string model;                 // e.g. "periodic point, period 1"
  std::vector<double> alpha_hat;     // index l-1
  std::vector<double> alpha;
  std::vector<double> lambda;
  double extremal_index = 1.0;
  std::optional<double> geometric_ratio;  // lambda_l proportional to r^(l-1)
  double quadrature_error = 0.0;
  std::vector<std::string> warnings;

  struct Counting {
    std::size_t row = 0;
    double t = 0.0;
    DiscreteDistribution law;
  };
  std::vector<Counting> counting;  // one per schedule row with t
};

/// Smallest p <= max_period with T^p x = x (to 1e-9), if any.
std::optional<int> period_of(const IntervalMap& map, double x, int max_period = 32);

Prediction predict(const ExperimentConfig& cfg);
Json to_json(const Prediction& p, const ExperimentConfig& cfg);

struct RowResult {
  std::size_t row = 0;
  double size = 0.0;
  double mu = 0.0, mu_se = 0.0;
  bool mu_exact = false;
  std::vector<ClusterStats> clusters;
  std::optional<CountingResult> counting;
  std::optional<EntryTimeRatio> entry;

  /// Some cluster statistic ran out of steps before min_entries.
  bool partial() const;
};

/// Runs every measurement of schedule row `row`. Seeds are derived from
/// cfg.seed and the row index only.
RowResult simulate_row(const ExperimentConfig& cfg, std::size_t row);
Json to_json(const RowResult& r);

struct Comparison {
  GofReport gof;
  bool has_chi_square = false;
  std::optional<double> cluster_tv;  // prediction lambda vs simulated lambda_hat
  std::size_t row = 0;
};

/// Counting-law comparison of two result files (prediction or simulation).
Comparison compare(const Json& a, const Json& b, std::optional<std::size_t> row = std::nullopt);
Json to_json(const Comparison& c);

}  // namespace rtlab
