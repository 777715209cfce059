// Empirical return-time and cluster statistics.
//
// Everything here is driven by indicator traces: the hits of U along a
// stationary orbit (or a symbolic stream) of fixed length. Trials are indexed,
// generated independently and reduced with integer counts in index order, so
// results never depend on the worker count.
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "rtlab/distributions.hpp"
#include "rtlab/dynamics.hpp"
#include "rtlab/targets.hpp"
#include "rtlab/window_counts.hpp"

namespace rtlab {

/// Produces the trace of trial `i`. Must be deterministic and thread-safe.
using TraceSource = std::function<IndicatorTrace(std::uint64_t trial)>;

/// Stream purposes, so different estimators never share random streams.
enum class Purpose : std::uint64_t { orbit = 1, counting = 2, records = 3, entry = 4, overlap = 5 };

/// Hits of `target` along T^0 s, ..., T^(length-1) s for s = sample_stationary(map, seed, stream).
IndicatorTrace orbit_trace(const MapSystem& map, const TargetSet& target, std::uint64_t length,
                           std::uint64_t seed, std::uint64_t stream);

/// Trial i -> orbit_trace on stream substream(i, purpose).
TraceSource orbit_trace_source(MapSystem map, TargetSet target, std::uint64_t length,
                               std::uint64_t seed, Purpose purpose = Purpose::orbit);

/// i.i.d. Bernoulli(mu) indicators; the reference process with no clustering.
TraceSource bernoulli_trace_source(double mu, std::uint64_t length, std::uint64_t seed);

struct ClusterOptions {
  std::vector<std::uint64_t> Ks{50};
  /// Stop once the largest K has this many conditioning entries ...
  std::uint64_t min_entries = 10'000;
  /// ... or once this many positions were scanned.
  std::uint64_t max_steps = 10'000'000'000ull;
  /// ... or once this many trials ran (0: no limit).
  std::uint64_t max_trials = 0;
  /// Trials per round; fixed so that the stopping point is worker-independent.
  std::uint64_t round_size = 32;
  unsigned workers = 1;
};

/// Minimum number of events behind an estimate reported as confident.
inline constexpr std::uint64_t kConfidentEvents = 30;

struct ClusterStats {
  std::uint64_t K = 0;
  std::uint64_t n_entries = 0;       // conditioning events I_0 = 1
  std::uint64_t n_windows = 0;       // centred windows scanned
  std::uint64_t n_windows_hit = 0;   // ... with Z >= 1
  std::uint64_t n_trials = 0;        // independent orbits / streams (batches)
  std::uint64_t steps = 0;
  std::vector<std::uint64_t> w_at_least;  // index l-1: #{W >= l}
  std::vector<std::uint64_t> z_counts;    // index l-1: #{Z = l}
  std::vector<double> alpha_hat, alpha_hat_se;    // index l-1: alpha_hat_l(K)
  std::vector<double> lambda_hat, lambda_hat_se;  // index l-1: lambda_l(K)
  double extremal_index = 0.0;  // 1 - alpha_hat_2
  double extremal_index_se = 0.0;
  /// Largest l whose alpha_hat and lambda_hat both rest on >= 30 events.
  std::size_t l_confident = 0;
  /// False when trace gaps were compressed (n_windows then only bounds the truth).
  bool windows_exact = true;
  /// The step budget ran out before min_entries.
  bool insufficient = false;
};

/// One ClusterStats per entry of opts.Ks, all from the same traces.
std::vector<ClusterStats> cluster_statistics(const TraceSource& source, const ClusterOptions& opts);

ClusterStats cluster_statistics(const MapSystem& map, const TargetSet& target, std::uint64_t K,
                                std::uint64_t min_entries, std::uint64_t max_steps,
                                std::uint64_t orbit_length, std::uint64_t seed, unsigned workers = 1);

/// Horizon N = floor(t / mu), rejected above 1e12.
std::uint64_t kac_horizon(double t, double mu);

/// xi = number of n in [0, N] with T^n s0 in U, N = floor(t / mu).
std::uint64_t count_visits(const MapSystem& map, const TargetSet& target, OrbitState s0, double t,
                           double mu);

struct CountingResult {
  std::uint64_t horizon = 0;              // N
  double mu = 0.0;
  std::vector<std::uint64_t> counts;      // counts[k] = #{trials with xi = k}
  std::uint64_t n_trials = 0;
  double mean = 0.0, mean_se = 0.0;       // sample mean of xi and its error
  DiscreteDistribution law() const { return DiscreteDistribution::from_counts(counts); }
};

/// Empirical law of xi over n_trials stationary starts.
CountingResult counting_distribution(const MapSystem& map, const TargetSet& target, double t,
                                     double mu, std::uint64_t n_trials, std::uint64_t seed,
                                     unsigned workers = 1);

/// Same from any trace source; traces must have length N + 1.
CountingResult counting_distribution(const TraceSource& source, std::uint64_t horizon, double mu,
                                     std::uint64_t n_trials, unsigned workers = 1);

struct ReturnTimeRecord {
  std::uint64_t trial = 0;
  std::uint64_t entry_index = 0;
  /// tau, tau^2 - tau, ...: successive return gaps within max_gap of the entry.
  std::vector<std::uint64_t> gaps;
  /// Still inside U at the max_gap horizon, so the record is cut short.
  bool censored = false;
};

/// Records for the first n_entries hits (in trial order) whose max_gap
/// horizon lies inside their orbit.
std::vector<ReturnTimeRecord> return_time_records(const TraceSource& source, std::uint64_t n_entries,
                                                  std::uint64_t max_gap, unsigned workers = 1,
                                                  std::uint64_t round_size = 32);

/// alpha_hat_l(K) re-aggregated from records (needs max_gap >= K), with
/// trial-batched standard errors.
struct RecordAlphaHat {
  std::vector<double> alpha_hat, alpha_hat_se;
  std::uint64_t n_entries = 0;
};
RecordAlphaHat alpha_hat_from_records(const std::vector<ReturnTimeRecord>& records, std::uint64_t K);

struct EntryTimeRatio {
  double ratio = 0.0;     // P(tau_U <= L) / (L mu)
  double std_error = 0.0;
  std::uint64_t hits = 0;  // trials with tau_U <= L
  std::uint64_t n_trials = 0;
  bool zero_hits = false;
};

/// tau_U(x) = min{j >= 1 : T^j x in U} for stationary x.
EntryTimeRatio entry_time_ratio(const MapSystem& map, const TargetSet& target, std::uint64_t L,
                                double mu, std::uint64_t n_trials, std::uint64_t seed,
                                unsigned workers = 1);

struct OverlapEstimate {
  double r2 = 0.0;
  double std_error = 0.0;
  std::vector<double> terms;  // terms[j] for n = j + 2
  std::uint64_t n_trials = 0;
};

/// R_2 = sum_{n=2}^{delta} P(Z >= 1 and Z o T^{(2K+1) n} >= 1), Z = I_0 + ... + I_{2K}.
/// Traces must have length >= (2K+1)(delta+1).
OverlapEstimate r2_overlap(const TraceSource& source, std::uint64_t K, std::uint64_t delta,
                           std::uint64_t n_trials, unsigned workers = 1);

OverlapEstimate r2_overlap(const MapSystem& map, const TargetSet& target, std::uint64_t K,
                           std::uint64_t delta, std::uint64_t n_trials, std::uint64_t seed,
                           unsigned workers = 1);

}  // namespace rtlab
