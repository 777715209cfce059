#include <random>

#include "doctest.h"
#include "rtlab/window_counts.hpp"

using namespace rtlab;

namespace {

// Direct O(length * K) evaluation on the dense indicator.
WindowCounts brute_force(const std::vector<int>& ind, std::uint64_t K) {
  WindowCounts out;
  out.K = K;
  out.steps = ind.size();
  out.z_counts.assign(2 * K + 2, 0);
  out.w_counts.assign(K + 2, 0);
  const std::int64_t n = static_cast<std::int64_t>(ind.size());
  const auto k = static_cast<std::int64_t>(K);
  for (std::int64_t i = k; i + k <= n - 1; ++i) {
    ++out.windows;
    int z = 0;
    for (std::int64_t j = i - k; j <= i + k; ++j) z += ind[j];
    if (z > 0) ++out.z_counts[z];
  }
  for (std::int64_t h = 0; h < n; ++h) {
    if (!ind[h] || (n - 1) - h < 2 * k + 1) continue;
    int w = 0;
    for (std::int64_t j = h; j <= h + k; ++j) w += ind[j];
    ++out.entries;
    ++out.w_counts[w];
  }
  return out;
}

IndicatorTrace to_trace(const std::vector<int>& ind) {
  IndicatorTrace t;
  t.length = ind.size();
  for (std::size_t i = 0; i < ind.size(); ++i)
    if (ind[i]) t.push_hit(i);
  return t;
}

}  // namespace

TEST_CASE("run-based window counts match brute force on random indicators") {
  std::mt19937_64 gen(7);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t n = 1 + gen() % 400;
    const double p = std::uniform_real_distribution<double>(0.0, 0.6)(gen);
    const bool bursty = rep % 2 == 0;
    std::vector<int> ind(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const double q = bursty && i > 0 && ind[i - 1] ? 0.8 : p;
      ind[i] = std::bernoulli_distribution(q)(gen) ? 1 : 0;
    }
    const std::uint64_t K = gen() % 12;
    const auto fast = window_counts(to_trace(ind), K);
    const auto slow = brute_force(ind, K);
    CHECK(fast.windows == slow.windows);
    CHECK(fast.entries == slow.entries);
    CHECK(fast.z_counts == slow.z_counts);
    CHECK(fast.w_counts == slow.w_counts);
  }
}

TEST_CASE("long runs use the bulk path") {
  std::vector<int> ind(5000, 0);
  for (int i = 100; i < 3000; ++i) ind[i] = 1;
  for (int i = 3005; i < 3007; ++i) ind[i] = 1;
  for (std::uint64_t K : {0u, 1u, 10u, 50u}) {
    const auto fast = window_counts(to_trace(ind), K);
    const auto slow = brute_force(ind, K);
    CHECK(fast.z_counts == slow.z_counts);
    CHECK(fast.w_counts == slow.w_counts);
  }
}

TEST_CASE("merge adds counts") {
  std::vector<int> a(50, 0), b(70, 0);
  a[10] = a[11] = 1;
  b[20] = b[25] = b[26] = 1;
  auto ca = window_counts(to_trace(a), 3);
  const auto cb = window_counts(to_trace(b), 3);
  const auto windows = ca.windows + cb.windows;
  ca.merge(cb);
  CHECK(ca.windows == windows);
  CHECK(ca.entries == 5);
  CHECK(ca.w_at_least(1) == 5);
  CHECK(ca.w_at_least(2) == 2);  // 10->11 and 25->26
}

TEST_CASE("trace membership and run merging") {
  IndicatorTrace t;
  t.length = 20;
  t.push_hit(3);
  t.push_hit(4);
  t.push_run(5, 2);
  t.push_run(10, 1);
  CHECK(t.runs.size() == 2);
  CHECK(t.hits() == 5);
  CHECK(t.at(6));
  CHECK_FALSE(t.at(7));
  CHECK(t.at(10));
  CHECK_THROWS(t.push_run(8, 1));
}
