#include <cmath>
#include <sstream>

#include "doctest.h"
#include "rtlab/regenerative.hpp"
#include "rtlab/stats.hpp"

using namespace rtlab;

namespace {

const ClusterSizeDist kLengths({0.5, 0.3, 0.2});

bool blocks_intact(const SymbolStream& s) {
  const auto n = static_cast<std::int64_t>(s.symbols.size());
  if (s.block_heads.empty() || s.block_heads.front() > 0) return false;
  for (std::size_t b = 0; b < s.block_heads.size(); ++b) {
    const std::int64_t lo = std::max<std::int64_t>(0, s.block_heads[b]);
    const std::int64_t hi = b + 1 < s.block_heads.size() ? s.block_heads[b + 1] : n;
    if (hi <= lo) return false;
    for (std::int64_t i = lo; i < hi; ++i) {
      if (s.symbols[i] != s.symbols[lo]) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("RegenSpec") {
  CHECK(RegenSpec::smith().mean_block_length() == 2.0);
  CHECK(RegenSpec::fixed(kLengths).mean_block_length() == doctest::Approx(1.7));
  CHECK_THROWS(RegenSpec::smith(0.0).validate());
  CHECK_THROWS(RegenSpec::smith(2.0, 0).validate());

  const RegenSampler s(RegenSpec::smith(2.0, 1000));
  double total = 0.0;
  for (std::uint64_t k = 1; k <= 1000; ++k) total += s.gamma(k);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.gamma(2) / s.gamma(1) == doctest::Approx(0.25));
  CHECK(s.gamma(1001) == 0.0);
  CHECK(s.tail(1000) == 0.0);
  CHECK(s.tail(0) == 1.0);
}

TEST_CASE("symbol draws follow the truncated power law") {
  const RegenSampler s(RegenSpec::smith(2.0, 1000));
  CounterRng rng(3, 0);
  const int n = 200'000;
  std::vector<int> c(4, 0);
  int above = 0, at_most_bad = 0;
  for (int i = 0; i < n; ++i) {
    const auto k = s.symbol(rng);
    if (k <= 3) ++c[k];
    above += s.symbol_above(10, rng) > 10 ? 1 : 0;
    at_most_bad += s.symbol_at_most(10, rng) > 10 ? 1 : 0;
  }
  for (std::uint64_t k = 1; k <= 3; ++k) {
    const double p = s.gamma(k);
    CHECK(std::abs(c[k] / double(n) - p) < 4.0 * std::sqrt(p * (1 - p) / n));
  }
  CHECK(above == n);
  CHECK(at_most_bad == 0);
}

TEST_CASE("generate_stationary") {
  SUBCASE("unit blocks give an i.i.d. stream") {
    const auto st = generate_stationary(RegenSpec::fixed(ClusterSizeDist::point_mass_one()), 1000, 5);
    REQUIRE(st.symbols.size() == 1000);
    REQUIRE(st.block_heads.size() == 1000);
    for (std::size_t i = 0; i < 1000; ++i) CHECK(st.block_heads[i] == static_cast<std::int64_t>(i));
  }
  SUBCASE("block integrity") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      CHECK(blocks_intact(generate_stationary(RegenSpec::fixed(kLengths), 50, seed)));
      CHECK(blocks_intact(generate_stationary(RegenSpec::smith(2.0, 50), 300, seed)));
    }
  }
  SUBCASE("the block covering index 0 is length-biased") {
    // Two-stage oracle: P(length l) = l lambda_l / sum s lambda_s.
    const RegenSampler s(RegenSpec::fixed(kLengths));
    const int n = 100'000;
    std::vector<int> c(4, 0);
    for (int i = 0; i < n; ++i) {
      CounterRng rng(11, i);
      const auto st = generate_stationary(s, 8, rng);
      const auto len = st.block_heads.size() > 1 ? st.block_heads[1] - st.block_heads[0] : 0;
      REQUIRE(len >= 1);
      ++c[len];
    }
    const double e = 1.7;
    for (int l = 1; l <= 3; ++l) {
      const double p = l * kLengths.at(l) / e;
      CHECK(std::abs(c[l] / double(n) - p) < 3.0 * std::sqrt(p * (1 - p) / n));
    }
  }
  SUBCASE("phase of index 0 is uniform within its block") {
    const RegenSampler s(RegenSpec::fixed(ClusterSizeDist({0.0, 0.0, 1.0})));
    std::vector<int> c(3, 0);
    for (int i = 0; i < 30'000; ++i) {
      CounterRng rng(12, i);
      ++c[-generate_stationary(s, 4, rng).block_heads[0]];
    }
    for (int v : c) CHECK(std::abs(v - 10'000) < 3.0 * std::sqrt(30'000 * (1.0 / 3) * (2.0 / 3)));
  }
  SUBCASE("Smith: P(block of X_0 has length 1 | X_0 = k) = p_k / (p_k + (k+1) q_k)") {
    const RegenSampler s(RegenSpec::smith(2.0, 1000));
    const int n = 200'000;
    std::vector<int> seen(6, 0), single(6, 0);
    for (int i = 0; i < n; ++i) {
      CounterRng rng(13, i);
      const auto st = generate_stationary(s, 8, rng);
      const auto k = st.symbols[0];
      if (k > 5) continue;
      ++seen[k];
      single[k] += st.block_heads.size() > 1 && st.block_heads[0] == 0 && st.block_heads[1] == 1 ? 1 : 0;
    }
    for (int k = 2; k <= 5; ++k) {
      const double p = 1.0 - 1.0 / k, q = 1.0 / k;
      const double want = p / (p + (k + 1) * q);
      const double se = std::sqrt(want * (1 - want) / seen[k]);
      CHECK(std::abs(single[k] / double(seen[k]) - want) < 3.0 * se);
    }
  }
  SUBCASE("CSV dump") {
    SymbolStream st{{4, 4, 1}, {-1, 2}};
    std::ostringstream os;
    write_stream_csv(os, st);
    CHECK(os.str() == "index,symbol,block_head\n0,4,-1\n1,4,-1\n2,1,2\n");
  }
}

TEST_CASE("sparse traces match dense streams on every window") {
  // Same window statistics from the compressed U_m trace as from full streams.
  const auto spec = RegenSpec::fixed(kLengths, 1.0, 200);
  const std::uint64_t m = 20, K = 3;
  ClusterOptions o;
  o.Ks = {K};
  o.min_entries = 60'000;
  const auto sparse = cluster_statistics(regen_trace_source(spec, m, K, 2000, 4), o).front();
  const RegenSampler sampler(spec);
  const TraceSource dense = [&](std::uint64_t i) {
    CounterRng rng(9, i);
    return level_trace(generate_stationary(sampler, 100'000, rng), m);
  };
  const auto full = cluster_statistics(dense, o).front();
  CHECK_FALSE(sparse.windows_exact);
  for (std::size_t l = 1; l <= 3; ++l) {
    CHECK(std::abs(sparse.alpha_hat[l - 1] - full.alpha_hat[l - 1]) <
          3.0 * std::hypot(sparse.alpha_hat_se[l - 1], full.alpha_hat_se[l - 1]) + 1e-12);
    CHECK(std::abs(sparse.lambda_hat[l - 1] - full.lambda_hat[l - 1]) <
          3.0 * std::hypot(sparse.lambda_hat_se[l - 1], full.lambda_hat_se[l - 1]));
  }
}

TEST_CASE("regen_cluster_stats") {
  SUBCASE("zero-measure U_m is rejected") {
    CHECK_THROWS(regen_cluster_stats(RegenSpec::smith(2.0, 100), 100, 10, 4, 1));
  }
  SUBCASE("fixed lengths: alpha_k = sum_{l>=k} lambda_l / sum s lambda_s") {
    const auto s = regen_cluster_stats(RegenSpec::fixed(kLengths), 1000, 10, 64, 2);
    CHECK(std::abs(s.extremal_index - 1.0 / 1.7) < 0.02);
    const auto seq = lambda_from_alpha_hat(s.alpha_hat, AlphaTail::zero);
    const double want[] = {1.0 / 1.7, 0.5 / 1.7, 0.2 / 1.7};
    for (int k = 0; k < 3; ++k) CHECK(std::abs(seq.alpha[k] - want[k]) < 0.02);
  }
  SUBCASE("mean cluster size is the reciprocal extremal index") {
    RegenRun run;
    run.Ks = {1000};
    run.n_streams = 128;
    run.seed = 3;
    const auto s = regen_cluster_stats(RegenSpec::fixed(kLengths, 3.0), 1000, run).front();
    double mean = 0.0;
    for (std::size_t l = 1; l <= s.z_counts.size(); ++l) mean += l * s.lambda_hat[l - 1];
    const double inv_ei = 1.0 / s.extremal_index;
    // delta method for both sides, from the reported standard errors
    const double se_mean = std::sqrt(static_cast<double>(s.lambda_hat.size())) * s.lambda_hat_se[0];
    const double se_inv = s.extremal_index_se / (s.extremal_index * s.extremal_index);
    CHECK(std::abs(mean - inv_ei) <= 2.0 * std::hypot(se_mean, se_inv));
  }
  SUBCASE("Smith: alpha_hat stays at 1/2 while lambda_hat mass escapes") {
    const auto spec = RegenSpec::smith(3.0);
    const RegenSampler sampler(spec);
    for (std::uint64_t m : {100, 1000}) {
      CAPTURE(m);
      RegenRun run;
      run.Ks = {10, 100};
      run.n_streams = 64;
      run.seed = 5;
      const auto st = regen_cluster_stats(spec, m, run);
      for (const auto& s : st) {
        CAPTURE(s.K);
        if (s.K * 10 <= m) {
          for (int k = 2; k <= 4; ++k) CHECK(std::abs(s.alpha_hat[k - 1] - 0.5) < 0.03);
        }
        const double bound = 1.0 / s.K + 2.0 * sampler.mean_inverse_above(m);
        CHECK(1.0 - s.lambda_hat[0] <= bound + 3.0 * s.lambda_hat_se[0]);
      }
      // Edge windows of long blocks only thin out once K << m.
      if (m >= 1000) CHECK(st[1].lambda_hat[1] < st[0].lambda_hat[1]);
    }
  }
  SUBCASE("worker independence") {
    RegenRun run;
    run.Ks = {10};
    run.n_streams = 40;
    run.workers = 1;
    const auto a = regen_cluster_stats(RegenSpec::smith(3.0), 1000, run).front();
    run.workers = 5;
    const auto b = regen_cluster_stats(RegenSpec::smith(3.0), 1000, run).front();
    CHECK(a.z_counts == b.z_counts);
    CHECK(a.w_at_least == b.w_at_least);
    CHECK(a.n_trials == 40);
  }
}
