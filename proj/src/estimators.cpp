#include "rtlab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rtlab/parallel.hpp"

namespace rtlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Batch-means error of a ratio sum(a_i) / sum(b_i) over independent trials i,
// from exact integer moments. Trials with a_i = 0 add nothing to the
// per-numerator sums, so the denominator moments are kept once and shared.
struct Denominator {
  unsigned __int128 b = 0, bb = 0;
  void add(std::uint64_t y) {
    b += y;
    bb += static_cast<unsigned __int128>(y) * y;
  }
};

struct Numerator {
  unsigned __int128 a = 0, aa = 0, ab = 0;
  void add(std::uint64_t x, std::uint64_t y) {
    a += x;
    aa += static_cast<unsigned __int128>(x) * x;
    ab += static_cast<unsigned __int128>(x) * y;
  }
};

// Delta method: n/(n-1) * sum (a_i - r b_i)^2 / B^2.
double ratio_std_error(const Numerator& num, const Denominator& den, std::uint64_t trials) {
  if (trials < 2 || den.b == 0) return kNaN;
  const long double B = static_cast<long double>(den.b);
  const long double r = static_cast<long double>(num.a) / B;
  long double s = static_cast<long double>(num.aa) - 2.0L * r * static_cast<long double>(num.ab) +
                  r * r * static_cast<long double>(den.bb);
  s = std::max(s, 0.0L);
  const long double n = static_cast<long double>(trials);
  return static_cast<double>(std::sqrt(n / (n - 1.0L) * s) / B);
}

void add_numerator(std::vector<Numerator>& m, std::size_t index, std::uint64_t x, std::uint64_t y) {
  if (x == 0) return;
  if (m.size() <= index) m.resize(index + 1);
  m[index].add(x, y);
}

struct KAccumulator {
  WindowCounts total;
  Denominator entries, windows_hit;
  std::vector<Numerator> w_num;  // index l: #{W >= l}
  std::vector<Numerator> z_num;  // index l: #{Z = l}
  bool exact = true;

  void add_trial(const WindowCounts& c, bool positions_exact) {
    total.merge(c);
    exact = exact && positions_exact;
    entries.add(c.entries);
    const std::uint64_t hit = c.windows_hit();
    windows_hit.add(hit);
    // Suffix sums give #{W >= l} for every l in one pass.
    std::uint64_t at_least = 0;
    for (std::size_t l = c.w_counts.size(); l-- > 1;) {
      at_least += c.w_counts[l];
      add_numerator(w_num, l, at_least, c.entries);
    }
    for (std::size_t l = 1; l < c.z_counts.size(); ++l) add_numerator(z_num, l, c.z_counts[l], hit);
  }

  double alpha_se(std::size_t l, std::uint64_t trials) const {
    return ratio_std_error(l < w_num.size() ? w_num[l] : Numerator{}, entries, trials);
  }
  double lambda_se(std::size_t l, std::uint64_t trials) const {
    return ratio_std_error(l < z_num.size() ? z_num[l] : Numerator{}, windows_hit, trials);
  }
};

ClusterStats finalize(const KAccumulator& acc, std::uint64_t trials, bool insufficient) {
  const WindowCounts& t = acc.total;
  ClusterStats s;
  s.K = t.K;
  s.n_entries = t.entries;
  s.n_windows = t.windows;
  s.n_windows_hit = t.windows_hit();
  s.n_trials = trials;
  s.steps = t.steps;
  s.windows_exact = acc.exact;
  s.insufficient = insufficient;

  std::size_t top = 1;
  for (std::size_t l = 1; l < t.w_counts.size(); ++l)
    if (t.w_counts[l] > 0) top = std::max(top, l);
  for (std::size_t l = 1; l < t.z_counts.size(); ++l)
    if (t.z_counts[l] > 0) top = std::max(top, l);

  for (std::size_t l = 1; l <= top; ++l) {
    const std::uint64_t wl = t.w_at_least(l);
    s.w_at_least.push_back(wl);
    s.z_counts.push_back(l < t.z_counts.size() ? t.z_counts[l] : 0);
    if (t.entries > 0) {
      s.alpha_hat.push_back(static_cast<double>(wl) / static_cast<double>(t.entries));
      s.alpha_hat_se.push_back(l == 1 ? 0.0 : acc.alpha_se(l, trials));
    }
    if (s.n_windows_hit > 0) {
      s.lambda_hat.push_back(static_cast<double>(s.z_counts.back()) /
                             static_cast<double>(s.n_windows_hit));
      s.lambda_hat_se.push_back(acc.lambda_se(l, trials));
    }
  }
  if (t.entries == 0) {
    s.alpha_hat = {1.0};
    s.alpha_hat_se = {0.0};
    s.extremal_index = kNaN;
    s.extremal_index_se = kNaN;
  } else {
    s.extremal_index = 1.0 - (s.alpha_hat.size() > 1 ? s.alpha_hat[1] : 0.0);
    s.extremal_index_se = s.alpha_hat_se.size() > 1 ? s.alpha_hat_se[1] : 0.0;
  }
  while (s.l_confident < top) {
    const std::size_t l = s.l_confident + 1;
    if (s.w_at_least[l - 1] < kConfidentEvents || s.z_counts[l - 1] < kConfidentEvents) break;
    s.l_confident = l;
  }
  return s;
}

}  // namespace

IndicatorTrace orbit_trace(const MapSystem& map, const TargetSet& target, std::uint64_t length,
                           std::uint64_t seed, std::uint64_t stream) {
  target.check_compatible(map);
  IndicatorTrace trace;
  trace.length = length;
  if (length == 0) return trace;
  OrbitState s = sample_stationary(map, seed, stream);
  std::visit(
      [&](const auto& u) {
        map.with_stepper([&](auto stepper) {
          if (u.contains(s.coords)) trace.push_hit(0);
          for (std::uint64_t i = 1; i < length; ++i) {
            stepper(s);
            if (u.contains(s.coords)) trace.push_hit(i);
          }
          return 0;
        });
      },
      target.kind());
  return trace;
}

TraceSource orbit_trace_source(MapSystem map, TargetSet target, std::uint64_t length,
                               std::uint64_t seed, Purpose purpose) {
  target.check_compatible(map);
  return [map = std::move(map), target = std::move(target), length, seed,
          purpose](std::uint64_t trial) {
    return orbit_trace(map, target, length, seed,
                       substream(trial, static_cast<std::uint64_t>(purpose)));
  };
}

TraceSource bernoulli_trace_source(double mu, std::uint64_t length, std::uint64_t seed) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("bernoulli_trace_source: mu outside [0,1]");
  return [mu, length, seed](std::uint64_t trial) {
    CounterRng rng(seed, substream(trial, 0xbe));
    IndicatorTrace t;
    t.length = length;
    for (std::uint64_t i = 0; i < length; ++i)
      if (rng.bernoulli(mu)) t.push_hit(i);
    return t;
  };
}

std::vector<ClusterStats> cluster_statistics(const TraceSource& source, const ClusterOptions& opts) {
  if (opts.Ks.empty()) throw std::invalid_argument("cluster_statistics: no window sizes");
  if (opts.round_size == 0) throw std::invalid_argument("cluster_statistics: round_size must be >= 1");
  const std::size_t nk = opts.Ks.size();
  std::vector<KAccumulator> acc(nk);
  for (std::size_t j = 0; j < nk; ++j) acc[j].total.K = opts.Ks[j];
  const auto k_largest = static_cast<std::size_t>(
      std::max_element(opts.Ks.begin(), opts.Ks.end()) - opts.Ks.begin());

  std::uint64_t trials = 0;
  std::uint64_t steps = 0;
  bool insufficient = false;
  std::vector<std::vector<WindowCounts>> slot(opts.round_size, std::vector<WindowCounts>(nk));
  std::vector<char> exact(opts.round_size, 1);
  std::vector<std::uint64_t> lengths(opts.round_size, 0);
  while (true) {
    const std::uint64_t round =
        opts.max_trials > 0 ? std::min(opts.round_size, opts.max_trials - trials) : opts.round_size;
    parallel_for(0, round, opts.workers, [&](std::uint64_t i) {
      const IndicatorTrace trace = source(trials + i);
      lengths[i] = trace.length;
      exact[i] = trace.positions_exact ? 1 : 0;
      for (std::size_t j = 0; j < nk; ++j) slot[i][j] = window_counts(trace, opts.Ks[j]);
    });
    std::uint64_t round_steps = 0;
    for (std::uint64_t i = 0; i < round; ++i) {
      for (std::size_t j = 0; j < nk; ++j) acc[j].add_trial(slot[i][j], exact[i] != 0);
      round_steps += lengths[i];
    }
    if (round_steps == 0) throw std::invalid_argument("cluster_statistics: empty traces");
    trials += round;
    steps += round_steps;
    if (acc[k_largest].total.entries >= opts.min_entries) break;
    if (opts.max_trials > 0 && trials >= opts.max_trials) break;
    if (steps >= opts.max_steps) {
      insufficient = true;
      break;
    }
  }
  std::vector<ClusterStats> out;
  out.reserve(nk);
  for (std::size_t j = 0; j < nk; ++j) {
    out.push_back(finalize(acc[j], trials, insufficient && acc[j].total.entries < opts.min_entries));
  }
  return out;
}

ClusterStats cluster_statistics(const MapSystem& map, const TargetSet& target, std::uint64_t K,
                                std::uint64_t min_entries, std::uint64_t max_steps,
                                std::uint64_t orbit_length, std::uint64_t seed, unsigned workers) {
  if (K < 1) throw std::invalid_argument("cluster_statistics: K must be >= 1");
  if (min_entries < 100) throw std::invalid_argument("cluster_statistics: min_entries must be >= 100");
  ClusterOptions opts;
  opts.Ks = {K};
  opts.min_entries = min_entries;
  opts.max_steps = max_steps;
  opts.workers = workers;
  return cluster_statistics(orbit_trace_source(map, target, orbit_length, seed), opts).front();
}

std::uint64_t kac_horizon(double t, double mu) {
  if (!(mu > 0.0) || !(t > 0.0)) throw std::invalid_argument("kac_horizon: t and mu must be positive");
  const double n = std::floor(t / mu);
  if (n > 1e12) throw std::overflow_error("kac_horizon: N = floor(t/mu) exceeds 1e12");
  return static_cast<std::uint64_t>(n);
}

std::uint64_t count_visits(const MapSystem& map, const TargetSet& target, OrbitState s0, double t,
                           double mu) {
  const std::uint64_t n = kac_horizon(t, mu);
  std::uint64_t xi = 0;
  orbit_visitor(map, std::move(s0), n, [&](std::uint64_t, const OrbitState& s) {
    xi += target.contains(s.coords) ? 1 : 0;
  });
  return xi;
}

CountingResult counting_distribution(const TraceSource& source, std::uint64_t horizon, double mu,
                                     std::uint64_t n_trials, unsigned workers) {
  if (n_trials < 1) throw std::invalid_argument("counting_distribution: n_trials must be >= 1");
  std::vector<std::uint64_t> xi(n_trials, 0);
  parallel_for(0, n_trials, workers, [&](std::uint64_t i) {
    const IndicatorTrace t = source(i);
    if (t.length != horizon + 1) throw std::logic_error("counting_distribution: trace length is not N+1");
    xi[i] = t.hits();
  });
  CountingResult r;
  r.horizon = horizon;
  r.mu = mu;
  r.n_trials = n_trials;
  unsigned __int128 sum = 0, sum_sq = 0;
  for (auto x : xi) {
    if (x >= r.counts.size()) r.counts.resize(x + 1, 0);
    ++r.counts[x];
    sum += x;
    sum_sq += static_cast<unsigned __int128>(x) * x;
  }
  const long double n = static_cast<long double>(n_trials);
  const long double m = static_cast<long double>(sum) / n;
  r.mean = static_cast<double>(m);
  if (n_trials > 1) {
    const long double var = (static_cast<long double>(sum_sq) - n * m * m) / (n - 1.0L);
    r.mean_se = static_cast<double>(std::sqrt(std::max(var, 0.0L) / n));
  }
  return r;
}

CountingResult counting_distribution(const MapSystem& map, const TargetSet& target, double t,
                                     double mu, std::uint64_t n_trials, std::uint64_t seed,
                                     unsigned workers) {
  const std::uint64_t n = kac_horizon(t, mu);
  return counting_distribution(orbit_trace_source(map, target, n + 1, seed, Purpose::counting), n, mu,
                               n_trials, workers);
}

namespace {

std::vector<ReturnTimeRecord> records_of(const IndicatorTrace& trace, std::uint64_t trial,
                                         std::uint64_t max_gap, std::uint64_t limit) {
  std::vector<ReturnTimeRecord> out;
  if (trace.length <= max_gap) return out;
  const std::uint64_t last_entry = trace.length - 1 - max_gap;
  const auto& runs = trace.runs;
  for (std::size_t j = 0; j < runs.size() && out.size() < limit; ++j) {
    for (std::uint64_t h = runs[j].start; h < runs[j].end() && h <= last_entry && out.size() < limit;
         ++h) {
      ReturnTimeRecord rec;
      rec.trial = trial;
      rec.entry_index = h;
      const std::uint64_t horizon = h + max_gap;
      std::uint64_t prev = h;
      for (std::size_t q = j; q < runs.size() && runs[q].start <= horizon; ++q) {
        const std::uint64_t from = std::max(runs[q].start, h + 1);
        const std::uint64_t to = std::min(runs[q].end() - 1, horizon);
        for (std::uint64_t p = from; p <= to && from <= to; ++p) {
          rec.gaps.push_back(p - prev);
          prev = p;
        }
      }
      rec.censored = trace.at(horizon);
      out.push_back(std::move(rec));
    }
  }
  return out;
}

}  // namespace

std::vector<ReturnTimeRecord> return_time_records(const TraceSource& source, std::uint64_t n_entries,
                                                  std::uint64_t max_gap, unsigned workers,
                                                  std::uint64_t round_size) {
  if (n_entries < 1) throw std::invalid_argument("return_time_records: n_entries must be >= 1");
  if (max_gap < 1) throw std::invalid_argument("return_time_records: max_gap must be >= 1");
  std::vector<ReturnTimeRecord> out;
  std::vector<std::vector<ReturnTimeRecord>> slot(round_size);
  std::vector<std::uint64_t> lengths(round_size);
  for (std::uint64_t base = 0; out.size() < n_entries; base += round_size) {
    parallel_for(0, round_size, workers, [&](std::uint64_t i) {
      const IndicatorTrace t = source(base + i);
      lengths[i] = t.length;
      slot[i] = records_of(t, base + i, max_gap, n_entries);
    });
    std::uint64_t steps = 0;
    for (std::uint64_t i = 0; i < round_size && out.size() < n_entries; ++i) {
      steps += lengths[i];
      for (auto& r : slot[i]) {
        if (out.size() == n_entries) break;
        out.push_back(std::move(r));
      }
    }
    if (steps == 0) throw std::invalid_argument("return_time_records: empty traces");
  }
  return out;
}

RecordAlphaHat alpha_hat_from_records(const std::vector<ReturnTimeRecord>& records, std::uint64_t K) {
  RecordAlphaHat out;
  out.n_entries = records.size();
  if (records.empty()) return out;
  std::vector<std::uint64_t> at_least(K + 2, 0);
  std::vector<Numerator> moments(K + 2);
  Denominator entries;
  std::vector<std::uint64_t> trial_counts(K + 2, 0);
  std::uint64_t trial_entries = 0;
  std::uint64_t trials = 0;
  auto flush = [&] {
    for (std::uint64_t l = 2; l <= K + 1; ++l) moments[l].add(trial_counts[l], trial_entries);
    entries.add(trial_entries);
    std::fill(trial_counts.begin(), trial_counts.end(), 0);
    trial_entries = 0;
    ++trials;
  };
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (i > 0 && r.trial != records[i - 1].trial) flush();
    std::uint64_t w = 1, cum = 0;
    for (auto g : r.gaps) {
      cum += g;
      if (cum > K) break;
      ++w;
    }
    for (std::uint64_t l = 1; l <= w; ++l) {
      ++at_least[l];
      ++trial_counts[l];
    }
    ++trial_entries;
  }
  flush();
  const double n = static_cast<double>(records.size());
  for (std::uint64_t l = 1; l <= K + 1; ++l) {
    out.alpha_hat.push_back(static_cast<double>(at_least[l]) / n);
    out.alpha_hat_se.push_back(l == 1 ? 0.0 : ratio_std_error(moments[l], entries, trials));
  }
  return out;
}

EntryTimeRatio entry_time_ratio(const MapSystem& map, const TargetSet& target, std::uint64_t L,
                                double mu, std::uint64_t n_trials, std::uint64_t seed,
                                unsigned workers) {
  if (L < 1) throw std::invalid_argument("entry_time_ratio: L must be >= 1");
  if (!(mu > 0.0)) throw std::invalid_argument("entry_time_ratio: mu must be positive");
  if (n_trials < 1) throw std::invalid_argument("entry_time_ratio: n_trials must be >= 1");
  target.check_compatible(map);
  std::vector<char> hit(n_trials, 0);
  parallel_for(0, n_trials, workers, [&](std::uint64_t i) {
    OrbitState s = sample_stationary(map, seed, substream(i, static_cast<std::uint64_t>(Purpose::entry)));
    map.with_stepper([&](auto stepper) {
      for (std::uint64_t j = 1; j <= L; ++j) {
        stepper(s);
        if (target.contains(s.coords)) {
          hit[i] = 1;
          break;
        }
      }
      return 0;
    });
  });
  EntryTimeRatio r;
  r.n_trials = n_trials;
  for (char h : hit) r.hits += h ? 1 : 0;
  r.zero_hits = r.hits == 0;
  const double p = static_cast<double>(r.hits) / static_cast<double>(n_trials);
  const double scale = static_cast<double>(L) * mu;
  r.ratio = p / scale;
  r.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(n_trials)) / scale;
  return r;
}

OverlapEstimate r2_overlap(const TraceSource& source, std::uint64_t K, std::uint64_t delta,
                           std::uint64_t n_trials, unsigned workers) {
  if (delta < 2) throw std::invalid_argument("r2_overlap: delta must be >= 2");
  if (n_trials < 1) throw std::invalid_argument("r2_overlap: n_trials must be >= 1");
  const std::uint64_t block = 2 * K + 1;
  // joint[i][n-2] for trial i.
  std::vector<std::vector<char>> joint(n_trials);
  parallel_for(0, n_trials, workers, [&](std::uint64_t i) {
    const IndicatorTrace t = source(i);
    if (t.length < block * (delta + 1)) throw std::logic_error("r2_overlap: trace too short");
    std::vector<char> any(delta + 1, 0);
    for (const auto& r : t.runs) {
      const std::uint64_t first = r.start / block;
      const std::uint64_t last = (r.end() - 1) / block;
      for (std::uint64_t b = first; b <= std::min(last, delta); ++b) any[b] = 1;
    }
    joint[i].assign(delta - 1, 0);
    if (any[0]) {
      for (std::uint64_t n = 2; n <= delta; ++n) joint[i][n - 2] = any[n];
    }
  });
  OverlapEstimate est;
  est.n_trials = n_trials;
  std::vector<std::uint64_t> term_counts(delta - 1, 0);
  unsigned __int128 sum = 0, sum_sq = 0;
  for (const auto& row : joint) {
    std::uint64_t s = 0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      term_counts[j] += row[j] ? 1 : 0;
      s += row[j] ? 1 : 0;
    }
    sum += s;
    sum_sq += static_cast<unsigned __int128>(s) * s;
  }
  const long double n = static_cast<long double>(n_trials);
  for (auto c : term_counts) est.terms.push_back(static_cast<double>(c / n));
  const long double m = static_cast<long double>(sum) / n;
  est.r2 = static_cast<double>(m);
  if (n_trials > 1) {
    const long double var = (static_cast<long double>(sum_sq) - n * m * m) / (n - 1.0L);
    est.std_error = static_cast<double>(std::sqrt(std::max(var, 0.0L) / n));
  }
  return est;
}

OverlapEstimate r2_overlap(const MapSystem& map, const TargetSet& target, std::uint64_t K,
                           std::uint64_t delta, std::uint64_t n_trials, std::uint64_t seed,
                           unsigned workers) {
  const std::uint64_t length = (2 * K + 1) * (delta + 1);
  return r2_overlap(orbit_trace_source(map, target, length, seed, Purpose::overlap), K, delta, n_trials,
                    workers);
}

}  // namespace rtlab
