#include <cmath>

#include "doctest.h"
#include "rtlab/estimators.hpp"
#include "rtlab/stats.hpp"

using namespace rtlab;

namespace {

const double kGeneric = 0.41421356237309503;  // sqrt(2) - 1, not periodic under 2x

ClusterStats stats_for(const MapSystem& map, const TargetSet& u, std::uint64_t K, std::uint64_t entries,
                       std::uint64_t seed = 1, unsigned workers = 1) {
  ClusterOptions o;
  o.Ks = {K};
  o.min_entries = entries;
  o.workers = workers;
  return cluster_statistics(orbit_trace_source(map, u, 200'000, seed), o).front();
}

}  // namespace

TEST_CASE("count_visits") {
  SUBCASE("orbit parked on a fixed point inside U") {
    const MapSystem m(LinearMod1{3}, Backend::float64);
    CHECK(count_visits(m, TargetSet::ball({0.5}, 1e-3), m.make_state({0.5}), 0.5, 2e-3) == 251);
  }
  SUBCASE("orbit disjoint from U") {
    const MapSystem m(LinearMod1{2}, Backend::float64);
    CHECK(count_visits(m, TargetSet::ball({0.5}, 0.01), m.make_state({0.0}), 1.0, 0.02) == 0);
  }
  SUBCASE("horizon guard") {
    const MapSystem m(LinearMod1{2});
    CHECK_THROWS_AS(count_visits(m, TargetSet::ball({0.5}, 1e-14), m.make_state({0.1}), 1.0, 1e-13),
                    std::overflow_error);
    CHECK(kac_horizon(1.0, 2e-3) == 500);
  }
}

TEST_CASE("counting_distribution") {
  const MapSystem doubling(LinearMod1{2});
  SUBCASE("stationarity: E xi = (N+1) mu, generic ball") {
    const auto u = TargetSet::ball({0.3217}, 1e-3);
    const double mu = *exact_measure(u, doubling);
    const auto r = counting_distribution(doubling, u, 1.0, mu, 100'000, 3);
    CHECK(r.horizon == kac_horizon(1.0, mu));
    CHECK(std::abs(r.mean - (r.horizon + 1) * mu) < 3.0 * r.mean_se);
  }
  SUBCASE("stationarity for every built-in Lebesgue system") {
    const std::vector<std::pair<MapSystem, TargetSet>> cases{
        {MapSystem(LinearMod1{3}), TargetSet::ball({0.5}, 0.01)},
        {MapSystem(TorusAffine{2}), TargetSet::torus_strip(0.01)},
        {MapSystem(TorusAffine{3}), TargetSet::ball({0.2, 0.6}, 0.05, true)},
        {MapSystem(CoupledLattice{LinearMod1{2}, 2, 0.0, {}}), TargetSet::diagonal_strip(0.01)},
        {MapSystem(CoupledLattice{LinearMod1{3}, 3, 0.0, {}}), TargetSet::diagonal_strip(0.05)},
    };
    for (const auto& [map, u] : cases) {
      CAPTURE(map.name());
      CAPTURE(u.name());
      const double mu = *exact_measure(u, map);
      const auto r = counting_distribution(map, u, 1.0, mu, 20'000, 9);
      CHECK(std::abs(r.mean - (r.horizon + 1) * mu) < 3.0 * r.mean_se);
    }
  }
  SUBCASE("N = 0 gives a Bernoulli(mu) law") {
    const auto u = TargetSet::ball({0.5}, 0.05);
    const auto r = counting_distribution(doubling, u, 0.05, 0.1, 50'000, 4);
    CHECK(r.horizon == 0);
    REQUIRE(r.counts.size() == 2);
    const double p = r.counts[1] / 5e4;
    CHECK(std::abs(p - 0.1) < 3.0 * std::sqrt(0.09 / 5e4));
  }
  SUBCASE("torus strip: Polya-Aeppli(1/2, 1/2) at t = 1") {
    const MapSystem torus(TorusAffine{2});
    const auto u = TargetSet::torus_strip(1e-3);
    const auto r = counting_distribution(torus, u, 1.0, *exact_measure(u, torus), 100'000, 5);
    CHECK(total_variation(r.law(), polya_aeppli_pmf_auto(0.5, 0.5)) < 0.02);
  }
  SUBCASE("non-periodic centre: Poisson(1) at t = 1") {
    const auto u = TargetSet::ball({kGeneric}, 1e-3);
    const auto r = counting_distribution(doubling, u, 1.0, *exact_measure(u, doubling), 100'000, 6);
    CHECK(total_variation(r.law(), polya_aeppli_pmf_auto(1.0, 0.0)) < 0.02);
  }
  SUBCASE("same seed, any worker count") {
    const auto u = TargetSet::ball({0.25}, 0.01);
    const auto a = counting_distribution(doubling, u, 1.0, 0.02, 3000, 8, 1);
    const auto b = counting_distribution(doubling, u, 1.0, 0.02, 3000, 8, 3);
    CHECK(a.counts == b.counts);
  }
}

TEST_CASE("cluster_statistics") {
  SUBCASE("alpha_hat is a tail sequence") {
    const auto s = stats_for(MapSystem(TorusAffine{2}), TargetSet::torus_strip(1e-2), 20, 5000);
    CHECK(s.alpha_hat[0] == 1.0);
    for (std::size_t l = 1; l < s.alpha_hat.size(); ++l) CHECK(s.alpha_hat[l] <= s.alpha_hat[l - 1]);
    double total = 0.0;
    for (double x : s.lambda_hat) total += x;
    CHECK(total == doctest::Approx(1.0));
    CHECK(s.n_entries >= 5000);
    CHECK_FALSE(s.insufficient);
    CHECK(s.l_confident >= 4);
  }
  SUBCASE("torus strip: alpha_hat_{k+1} = 2^-k") {
    const auto s = stats_for(MapSystem(TorusAffine{2}), TargetSet::torus_strip(1e-3), 10, 50'000);
    for (int k = 1; k <= 4; ++k) CHECK(std::abs(s.alpha_hat[k] - std::ldexp(1.0, -k)) < 0.01);
  }
  SUBCASE("fixed point of 3x mod 1: p = 1/3") {
    const auto s = stats_for(MapSystem(LinearMod1{3}), TargetSet::ball({0.5}, 1e-3), 2, 50'000);
    CHECK(std::abs(s.alpha_hat[1] - 1.0 / 3.0) < 0.01);
    CHECK(std::abs(s.extremal_index - 2.0 / 3.0) < 0.01);
  }
  SUBCASE("non-periodic centre: no clustering") {
    const auto s = stats_for(MapSystem(LinearMod1{2}), TargetSet::ball({kGeneric}, 1e-3), 2, 20'000);
    CHECK(s.lambda_hat[0] > 0.99);
  }
  SUBCASE("i.i.d. indicators: Z^K given Z^K >= 1 is a zero-truncated binomial") {
    const double mu = 0.01;
    const std::uint64_t K = 5;
    ClusterOptions o;
    o.Ks = {K};
    o.min_entries = 100'000;
    const auto s = cluster_statistics(bernoulli_trace_source(mu, 100'000, 2), o).front();
    const double hit = 1.0 - std::pow(1.0 - mu, 2 * K + 1);
    const double lam1 = (2 * K + 1) * mu * std::pow(1.0 - mu, 2 * K) / hit;
    CHECK(std::abs(s.lambda_hat[0] - lam1) < 3.0 * s.lambda_hat_se[0]);
    const double a2 = 1.0 - std::pow(1.0 - mu, K);
    CHECK(std::abs(s.alpha_hat[1] - a2) < 3.0 * s.alpha_hat_se[1]);
  }
  SUBCASE("step budget exhaustion is flagged") {
    ClusterOptions o;
    o.Ks = {5};
    o.min_entries = 1'000'000;
    o.max_steps = 1'000'000;
    const auto s = cluster_statistics(bernoulli_trace_source(1e-4, 100'000, 2), o).front();
    CHECK(s.insufficient);
    CHECK(s.steps >= 1'000'000);
  }
  SUBCASE("bit-identical across worker counts") {
    const MapSystem cml(CoupledLattice{LinearMod1{2}, 2, 0.1, {}}, Backend::float64, 64);
    const auto u = TargetSet::diagonal_strip(1e-2);
    const auto a = stats_for(cml, u, 10, 3000, 4, 1);
    const auto b = stats_for(cml, u, 10, 3000, 4, 4);
    CHECK(a.w_at_least == b.w_at_least);
    CHECK(a.z_counts == b.z_counts);
    CHECK(a.alpha_hat_se == b.alpha_hat_se);
    CHECK(a.lambda_hat_se == b.lambda_hat_se);
  }
  SUBCASE("argument checks") {
    const MapSystem m(LinearMod1{2});
    CHECK_THROWS(cluster_statistics(m, TargetSet::ball({0.5}, 0.01), 0, 1000, 1000, 1000, 1));
    CHECK_THROWS(cluster_statistics(m, TargetSet::ball({0.5}, 0.01), 5, 10, 1000, 1000, 1));
  }
}

TEST_CASE("window and tail estimators agree up to the window-edge bias") {
  // Runs of hits with span J are seen by 2K+J centred windows, which biases
  // lambda_hat_l(K) by at most (2 + l + EJ) / (2K + 1).
  const MapSystem torus(TorusAffine{2});
  const auto u = TargetSet::torus_strip(1e-3);
  ClusterOptions o;
  o.Ks = {5, 20};
  o.min_entries = 50'000;
  const auto st = cluster_statistics(orbit_trace_source(torus, u, 200'000, 12), o);
  std::vector<double> gap;
  for (const auto& s : st) {
    const auto seq = lambda_from_alpha_hat(s.alpha_hat, AlphaTail::zero);
    const double span = 1.0 / s.extremal_index;
    double worst = 0.0;
    for (std::size_t l = 1; l <= 4; ++l) {
      const double d = std::abs(s.lambda_hat[l - 1] - seq.lambda[l - 1]);
      const double allowance = 2.0 * std::hypot(s.lambda_hat_se[l - 1], s.alpha_hat_se[1]) +
                               (2.0 + l + span) / (2.0 * s.K + 1.0);
      CHECK(d < allowance);
      worst = std::max(worst, d);
    }
    gap.push_back(worst);
  }
  CHECK(gap[1] < gap[0]);
}

TEST_CASE("return_time_records") {
  SUBCASE("fixed point: unit gaps, censored") {
    const MapSystem m(LinearMod1{3}, Backend::float64);
    const auto u = TargetSet::ball({0.5}, 1e-3);
    TraceSource src = [&](std::uint64_t) {
      IndicatorTrace t;
      t.length = 100;
      orbit_visitor(m, m.make_state({0.5}), 99, [&](std::uint64_t i, const OrbitState& s) {
        if (u.contains(s.coords)) t.push_hit(i);
      });
      return t;
    };
    const auto recs = return_time_records(src, 10, 20);
    REQUIRE(recs.size() == 10);
    for (const auto& r : recs) {
      CHECK(r.gaps == std::vector<std::uint64_t>(20, 1));
      CHECK(r.censored);
    }
  }
  SUBCASE("torus strip: unit gaps half of the time") {
    const MapSystem torus(TorusAffine{2});
    const auto recs =
        return_time_records(orbit_trace_source(torus, TargetSet::torus_strip(1e-3), 100'000, 3), 20'000, 50);
    std::uint64_t unit = 0;
    for (const auto& r : recs) unit += !r.gaps.empty() && r.gaps[0] == 1 ? 1 : 0;
    const double f = unit / 2e4;
    CHECK(std::abs(f - 0.5) < 4.0 * std::sqrt(0.25 / 2e4) + 0.01);
  }
  SUBCASE("re-aggregation reproduces cluster_statistics") {
    const MapSystem torus(TorusAffine{2});
    const std::uint64_t K = 10;
    const auto src = orbit_trace_source(torus, TargetSet::torus_strip(1e-2), 50'000, 5);
    ClusterOptions o;
    o.Ks = {K};
    o.min_entries = 20'000;
    const auto cs = cluster_statistics(src, o).front();
    const auto recs = return_time_records(src, cs.n_entries, 2 * K + 1);
    const auto ra = alpha_hat_from_records(recs, K);
    for (std::size_t l = 2; l <= 5; ++l) {
      const double sigma = std::hypot(cs.alpha_hat_se[l - 1], ra.alpha_hat_se[l - 1]);
      CHECK(std::abs(cs.alpha_hat[l - 1] - ra.alpha_hat[l - 1]) <= 2.0 * sigma);
    }
  }
}

TEST_CASE("entry_time_ratio") {
  SUBCASE("L = 1 is one by invariance") {
    const MapSystem m(LinearMod1{2});
    const auto u = TargetSet::ball({0.3}, 0.05);
    const auto r = entry_time_ratio(m, u, 1, 0.1, 100'000, 3);
    CHECK(std::abs(r.ratio - 1.0) < 3.0 * r.std_error);
  }
  SUBCASE("zero hits are flagged") {
    const MapSystem m(LinearMod1{2});
    const auto r = entry_time_ratio(m, TargetSet::ball({0.3}, 1e-9), 1, 2e-9, 1000, 3);
    CHECK(r.zero_hits);
    CHECK(r.ratio == 0.0);
  }
}

TEST_CASE("r2_overlap") {
  SUBCASE("i.i.d. closed form") {
    const double mu = 0.01;
    const std::uint64_t K = 3, delta = 6;
    const auto est = r2_overlap(bernoulli_trace_source(mu, (2 * K + 1) * (delta + 1), 4), K, delta, 200'000);
    const double q = 1.0 - std::pow(1.0 - mu, 2 * K + 1);
    CHECK(std::abs(est.r2 - (delta - 1) * q * q) < 3.0 * est.std_error);
  }
  SUBCASE("delta = 2 is the single joint probability") {
    const MapSystem torus(TorusAffine{2});
    const auto u = TargetSet::torus_strip(0.02);
    const std::uint64_t K = 4;
    const auto est = r2_overlap(torus, u, K, 2, 20'000, 6);
    REQUIRE(est.terms.size() == 1);
    CHECK(est.r2 == est.terms[0]);
    // Recompute directly on the same streams.
    const auto src = orbit_trace_source(torus, u, 27, 6, Purpose::overlap);
    std::uint64_t both = 0;
    for (std::uint64_t i = 0; i < 20'000; ++i) {
      const auto t = src(i);
      bool z0 = false, z2 = false;
      for (std::uint64_t j = 0; j < 9; ++j) z0 = z0 || t.at(j);
      for (std::uint64_t j = 18; j < 27; ++j) z2 = z2 || t.at(j);
      both += z0 && z2 ? 1 : 0;
    }
    CHECK(est.r2 == both / 2e4);
  }
  SUBCASE("vanishes as the target shrinks") {
    const MapSystem torus(TorusAffine{2});
    double prev = 1.0;
    for (double rho : {1e-2, 1e-3, 1e-4}) {
      const auto est = r2_overlap(torus, TargetSet::torus_strip(rho), 5, 10, 50'000, 7);
      CHECK(est.r2 < prev);
      prev = est.r2;
    }
  }
}
