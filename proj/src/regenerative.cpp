#include "rtlab/regenerative.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <ostream>
#include <stdexcept>

namespace rtlab {

RegenSpec RegenSpec::smith(double gamma_exponent, std::uint64_t k_cap) {
  RegenSpec s;
  s.rule = BlockRule::smith;
  s.gamma_exponent = gamma_exponent;
  s.k_cap = k_cap;
  return s;
}

RegenSpec RegenSpec::fixed(ClusterSizeDist lengths, double gamma_exponent, std::uint64_t k_cap) {
  RegenSpec s;
  s.rule = BlockRule::fixed_lengths;
  s.lengths = std::move(lengths);
  s.gamma_exponent = gamma_exponent;
  s.k_cap = k_cap;
  return s;
}

void RegenSpec::validate() const {
  if (k_cap < 1 || k_cap > (1u << 26)) throw std::invalid_argument("RegenSpec: k_cap must lie in [1, 2^26]");
  if (!(gamma_exponent > 0.0) || !std::isfinite(gamma_exponent)) {
    throw std::invalid_argument("RegenSpec: gamma exponent must be positive");
  }
  if (!std::isfinite(mean_block_length())) {
    throw std::invalid_argument("RegenSpec: infinite mean block length");
  }
}

double RegenSpec::mean_block_length() const {
  return rule == BlockRule::smith ? 2.0 : lengths.mean();
}

RegenSampler::RegenSampler(RegenSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  surv_.assign(spec_.k_cap + 2, 0.0);
  for (std::uint64_t k = spec_.k_cap; k >= 1; --k) {
    surv_[k] = surv_[k + 1] + std::pow(static_cast<double>(k), -spec_.gamma_exponent);
  }
  const double z = surv_[1];
  for (double& v : surv_) v /= z;
  surv_[1] = 1.0;
  if (spec_.rule == BlockRule::fixed_lengths) {
    const auto& lam = spec_.lengths.lambdas();
    const double e = spec_.lengths.mean();
    double acc = 0.0;
    for (std::size_t l = 1; l <= lam.size(); ++l) {
      acc += static_cast<double>(l) * lam[l - 1] / e;
      biased_lengths_.push_back(acc);
    }
    biased_lengths_.back() = 1.0;
  }
}

double RegenSampler::gamma(std::uint64_t k) const {
  return k >= 1 && k <= spec_.k_cap ? surv_[k] - surv_[k + 1] : 0.0;
}

double RegenSampler::tail(std::uint64_t m) const { return m >= spec_.k_cap ? 0.0 : surv_[m + 1]; }

double RegenSampler::mean_inverse_above(std::uint64_t m) const {
  double num = 0.0;
  for (std::uint64_t k = spec_.k_cap; k > m; --k) num += gamma(k) / static_cast<double>(k);
  return num / tail(m);
}

std::uint64_t RegenSampler::invert(double u) const {
  // surv_ is decreasing on [1, k_cap+1]; find the largest k with surv_[k] >= u.
  const auto first = surv_.begin() + 1;
  const auto it = std::upper_bound(first, surv_.end(), u, [](double x, double s) { return x > s; });
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(it - surv_.begin()) - 1);
}

std::uint64_t RegenSampler::symbol(CounterRng& rng) const { return invert(1.0 - rng.uniform()); }

std::uint64_t RegenSampler::symbol_above(std::uint64_t m, CounterRng& rng) const {
  const double t = tail(m);
  if (!(t > 0.0)) throw std::invalid_argument("symbol_above: P(Y > m) = 0");
  return std::max(m + 1, invert(t * (1.0 - rng.uniform())));
}

std::uint64_t RegenSampler::symbol_at_most(std::uint64_t m, CounterRng& rng) const {
  const double t = tail(m);
  return std::min(m, invert(t + (1.0 - t) * (1.0 - rng.uniform())));
}

std::uint64_t RegenSampler::block_length(std::uint64_t symbol, CounterRng& rng) const {
  if (spec_.rule == BlockRule::smith) {
    return rng.uniform_below(symbol) == 0 ? symbol + 1 : 1;
  }
  const auto& lam = spec_.lengths.lambdas();
  double u = rng.uniform();
  for (std::size_t l = 1; l < lam.size(); ++l) {
    if (u < lam[l - 1]) return l;
    u -= lam[l - 1];
  }
  return lam.size();
}

RegenSampler::Block RegenSampler::covering_block(CounterRng& rng) const {
  Block b;
  if (spec_.rule == BlockRule::smith) {
    // Weight gamma_k * l * P(l | k); summing over l gives 2 gamma_k, so the
    // symbol keeps its law and the length is 1 w.p. (1 - 1/k) / 2.
    b.symbol = symbol(rng);
    const double k = static_cast<double>(b.symbol);
    b.length = rng.uniform() < (1.0 - 1.0 / k) / 2.0 ? 1 : b.symbol + 1;
    return b;
  }
  b.symbol = symbol(rng);
  const double u = rng.uniform();
  b.length = static_cast<std::uint64_t>(
                 std::upper_bound(biased_lengths_.begin(), biased_lengths_.end(), u) - biased_lengths_.begin()) +
             1;
  b.length = std::min<std::uint64_t>(b.length, biased_lengths_.size());
  return b;
}

SymbolStream generate_stationary(const RegenSampler& sampler, std::uint64_t length, CounterRng& rng) {
  if (length < 1) throw std::invalid_argument("generate_stationary: length must be >= 1");
  SymbolStream out;
  out.symbols.reserve(length);
  auto b = sampler.covering_block(rng);
  const auto phase = rng.uniform_below(b.length);
  std::int64_t head = -static_cast<std::int64_t>(phase);
  std::uint64_t remaining = b.length - phase;
  while (true) {
    out.block_heads.push_back(head);
    const auto take = std::min<std::uint64_t>(remaining, length - out.symbols.size());
    out.symbols.insert(out.symbols.end(), take, b.symbol);
    if (out.symbols.size() == length) break;
    head = static_cast<std::int64_t>(out.symbols.size());
    b.symbol = sampler.symbol(rng);
    b.length = sampler.block_length(b.symbol, rng);
    remaining = b.length;
  }
  return out;
}

SymbolStream generate_stationary(const RegenSpec& spec, std::uint64_t length, std::uint64_t seed,
                                 std::uint64_t stream) {
  const RegenSampler sampler(spec);
  CounterRng rng(seed, stream);
  return generate_stationary(sampler, length, rng);
}

IndicatorTrace level_trace(const SymbolStream& stream, std::uint64_t m) {
  IndicatorTrace t;
  t.length = stream.symbols.size();
  for (std::uint64_t i = 0; i < t.length; ++i) {
    if (stream.symbols[i] > m) t.push_hit(i);
  }
  return t;
}

TraceSource regen_trace_source(const RegenSpec& spec, std::uint64_t m, std::uint64_t K_max,
                               std::uint64_t u_blocks, std::uint64_t seed) {
  auto sampler = std::make_shared<const RegenSampler>(spec);
  const double pi = sampler->tail(m);
  if (!(pi > 0.0)) throw std::invalid_argument("regen_trace_source: U_m has zero measure under the truncation");
  if (u_blocks < 1) throw std::invalid_argument("regen_trace_source: need at least one block in U_m");
  const std::uint64_t far = 2 * K_max + 1;
  const double log_stay = std::log1p(-pi);
  return [sampler, m, far, u_blocks, seed, pi, log_stay](std::uint64_t trial) {
    CounterRng rng(seed, substream(trial, static_cast<std::uint64_t>(Purpose::orbit)));
    IndicatorTrace t;
    t.positions_exact = false;
    // Start after a long quiet stretch: the blocks are i.i.d., so every later
    // U_m block sees the exact process behind it.
    std::uint64_t pos = far;
    for (std::uint64_t b = 0; b < u_blocks; ++b) {
      const auto k = sampler->symbol_above(m, rng);
      const auto len = sampler->block_length(k, rng);
      t.push_run(pos, len);
      pos += len;
      // Blocks outside U_m before the next one: Geometric(pi) failures.
      const double g = pi >= 1.0 ? 0.0 : std::floor(std::log(1.0 - rng.uniform()) / log_stay);
      std::uint64_t gap = 0;
      if (g >= static_cast<double>(far)) {
        gap = far;
      } else {
        for (auto n = static_cast<std::uint64_t>(g); n > 0 && gap < far; --n) {
          gap += sampler->block_length(sampler->symbol_at_most(m, rng), rng);
        }
        gap = std::min(gap, far);
      }
      pos += gap;
    }
    t.length = pos;
    return t;
  };
}

std::vector<ClusterStats> regen_cluster_stats(const RegenSpec& spec, std::uint64_t m, const RegenRun& run) {
  if (run.Ks.empty()) throw std::invalid_argument("regen_cluster_stats: no window sizes");
  if (run.n_streams < 1) throw std::invalid_argument("regen_cluster_stats: n_streams must be >= 1");
  const auto K_max = *std::max_element(run.Ks.begin(), run.Ks.end());
  ClusterOptions o;
  o.Ks = run.Ks;
  o.min_entries = ~std::uint64_t{0};
  o.max_steps = ~std::uint64_t{0};
  o.max_trials = run.n_streams;
  o.workers = run.workers;
  return cluster_statistics(regen_trace_source(spec, m, K_max, run.u_blocks, run.seed), o);
}

ClusterStats regen_cluster_stats(const RegenSpec& spec, std::uint64_t m, std::uint64_t K,
                                 std::uint64_t n_streams, std::uint64_t seed, unsigned workers) {
  RegenRun run;
  run.Ks = {K};
  run.n_streams = n_streams;
  run.seed = seed;
  run.workers = workers;
  return regen_cluster_stats(spec, m, run).front();
}

void write_stream_csv(std::ostream& os, const SymbolStream& stream) {
  os << "index,symbol,block_head\n";
  std::size_t h = 0;
  for (std::size_t i = 0; i < stream.symbols.size(); ++i) {
    while (h + 1 < stream.block_heads.size() && stream.block_heads[h + 1] <= static_cast<std::int64_t>(i)) ++h;
    os << i << ',' << stream.symbols[i] << ',' << stream.block_heads[h] << '\n';
  }
}

}  // namespace rtlab
