// Symbolic regenerative processes: i.i.d. symbols Y ~ gamma repeated in
// blocks, observed through U_m = {X_0 > m} under the left shift.
//
// Two block rules: Smith's (symbol k repeats k+1 times with probability 1/k,
// otherwise once) and fixed block-length laws independent of the symbol.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "rtlab/distributions.hpp"
#include "rtlab/estimators.hpp"
#include "rtlab/rng.hpp"

namespace rtlab {

enum class BlockRule { smith, fixed_lengths };

struct RegenSpec {
  BlockRule rule = BlockRule::smith;
  /// Block-length law for fixed_lengths (lambda_j = P(block length = j)).
  ClusterSizeDist lengths = ClusterSizeDist::point_mass_one();
  /// gamma_k proportional to k^-exponent on 1..k_cap, renormalised.
  double gamma_exponent = 2.0;
  std::uint64_t k_cap = 100'000;

  static RegenSpec smith(double gamma_exponent = 2.0, std::uint64_t k_cap = 100'000);
  static RegenSpec fixed(ClusterSizeDist lengths, double gamma_exponent = 2.0,
                         std::uint64_t k_cap = 100'000);

  void validate() const;
  /// E[block length]; 2 for Smith whatever gamma is.
  double mean_block_length() const;
};

/// Precomputed tables for drawing symbols and blocks.
class RegenSampler {
 public:
  explicit RegenSampler(RegenSpec spec);

  const RegenSpec& spec() const { return spec_; }
  double gamma(std::uint64_t k) const;
  /// P(Y > m).
  double tail(std::uint64_t m) const;
  /// E[1 / Y | Y > m].
  double mean_inverse_above(std::uint64_t m) const;

  std::uint64_t symbol(CounterRng& rng) const;
  std::uint64_t symbol_above(std::uint64_t m, CounterRng& rng) const;
  std::uint64_t symbol_at_most(std::uint64_t m, CounterRng& rng) const;
  std::uint64_t block_length(std::uint64_t symbol, CounterRng& rng) const;

  struct Block {
    std::uint64_t symbol = 0;
    std::uint64_t length = 0;
  };
  /// The block covering a stationary index: length-biased in (symbol, length).
  Block covering_block(CounterRng& rng) const;

 private:
  // Draws k with u in (surv_[k+1], surv_[k]], where surv_[k] = P(Y >= k).
  std::uint64_t invert(double u) const;

  RegenSpec spec_;
  std::vector<double> surv_;  // index 1..k_cap+1
  std::vector<double> biased_lengths_;  // cumulative l * lambda_l / E
};

struct SymbolStream {
  std::vector<std::uint64_t> symbols;
  /// Block heads N_i in increasing order; the first is <= 0.
  std::vector<std::int64_t> block_heads;
};

/// Stationary sample X_0..X_{length-1}: index 0 sits at a uniform phase of a
/// length-biased block, later blocks are i.i.d.
SymbolStream generate_stationary(const RegenSpec& spec, std::uint64_t length, std::uint64_t seed,
                                 std::uint64_t stream = 0);
SymbolStream generate_stationary(const RegenSampler& sampler, std::uint64_t length, CounterRng& rng);

/// Indicator of {X > m} along the stream.
IndicatorTrace level_trace(const SymbolStream& stream, std::uint64_t m);

/// Sparse indicator traces of U_m: `u_blocks` blocks inside U_m per trace.
/// Blocks outside U_m are simulated only where they separate two U_m blocks
/// by less than 2 * K_max + 1 positions; longer gaps are shortened to that
/// length, which leaves every window of half-length <= K_max unchanged.
TraceSource regen_trace_source(const RegenSpec& spec, std::uint64_t m, std::uint64_t K_max,
                               std::uint64_t u_blocks, std::uint64_t seed);

struct RegenRun {
  std::vector<std::uint64_t> Ks{10};
  std::uint64_t n_streams = 256;
  std::uint64_t u_blocks = 1024;
  std::uint64_t seed = 1;
  unsigned workers = 1;
};

/// Window statistics of U_m over run.n_streams sparse traces. Throws if U_m is
/// empty under the truncation.
std::vector<ClusterStats> regen_cluster_stats(const RegenSpec& spec, std::uint64_t m,
                                              const RegenRun& run);
ClusterStats regen_cluster_stats(const RegenSpec& spec, std::uint64_t m, std::uint64_t K,
                                 std::uint64_t n_streams, std::uint64_t seed, unsigned workers = 1);

/// One "index,symbol,block_head" line per position.
void write_stream_csv(std::ostream& os, const SymbolStream& stream);

}  // namespace rtlab
