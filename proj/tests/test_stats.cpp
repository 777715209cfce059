#include <cmath>
#include <random>

#include "doctest.h"
#include "rtlab/stats.hpp"

using namespace rtlab;

namespace {

std::vector<double> geometric_alpha_hat(double p, int terms) {
  std::vector<double> a{1.0};
  for (int l = 1; l < terms; ++l) a.push_back(a.back() * p);
  return a;
}

DiscreteDistribution point_mass(std::size_t k) {
  DiscreteDistribution d;
  d.probs.assign(k + 1, 0.0);
  d.probs[k] = 1.0;
  return d;
}

DiscreteDistribution sample_law(const DiscreteDistribution& model, std::uint64_t n, std::mt19937_64& gen) {
  std::discrete_distribution<std::size_t> draw(model.probs.begin(), model.probs.end());
  std::vector<std::uint64_t> counts(model.size(), 0);
  for (std::uint64_t i = 0; i < n; ++i) ++counts[draw(gen)];
  return DiscreteDistribution::from_counts(counts);
}

}  // namespace

TEST_CASE("lambda_from_alpha_hat examples") {
  SUBCASE("halving sequence") {
    const auto s = lambda_from_alpha_hat(geometric_alpha_hat(0.5, 30));
    CHECK(s.extremal_index == doctest::Approx(0.5).epsilon(1e-15));
    for (int k = 1; k <= 10; ++k) {
      CHECK(s.alpha[k - 1] == doctest::Approx(std::ldexp(1.0, -k)).epsilon(1e-14));
      CHECK(s.lambda[k - 1] == doctest::Approx(std::ldexp(1.0, -k)).epsilon(1e-14));
    }
    CHECK(s.mean_cluster_size == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("no returns: pure Poisson clusters") {
    const auto s = lambda_from_alpha_hat({1.0, 0.0, 0.0, 0.0});
    CHECK(s.lambda[0] == 1.0);
    for (std::size_t l = 1; l < s.lambda.size(); ++l) CHECK(s.lambda[l] == 0.0);
    CHECK(s.extremal_index == 1.0);
  }
  SUBCASE("geometric alpha_hat gives Polya-Aeppli clusters") {
    for (double p : {0.1, 1.0 / 3.0, 0.8}) {
      const auto s = lambda_from_alpha_hat(geometric_alpha_hat(p, 12));
      for (int k = 1; k <= 12; ++k) {
        CHECK(s.lambda[k - 1] == doctest::Approx((1 - p) * std::pow(p, k - 1)).epsilon(1e-12));
      }
    }
  }
  SUBCASE("finite window tail") {
    // W^K <= K + 1: alpha_hat vanishes past the data, no envelope.
    const auto s = lambda_from_alpha_hat({1.0, 0.5, 0.5, 0.5}, AlphaTail::zero);
    CHECK(s.extremal_index == 0.5);
    CHECK(s.lambda[0] == doctest::Approx(1.0));
    CHECK(s.lambda[1] == 0.0);
    CHECK(s.lambda[3] == doctest::Approx(1.0));
    CHECK(s.mean_cluster_size * s.extremal_index == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("rejections") {
    CHECK_THROWS_AS(lambda_from_alpha_hat({1.0, 0.3, 0.4}), std::invalid_argument);
    CHECK_THROWS_AS(lambda_from_alpha_hat({1.0, 1.0, 1.0}, AlphaTail::zero), std::invalid_argument);
    CHECK_THROWS_AS(lambda_from_alpha_hat({0.9, 0.3}), std::invalid_argument);
    CHECK_THROWS_AS(lambda_from_alpha_hat({1.0, 0.5, 0.5}), std::invalid_argument);
  }
}

TEST_CASE("mean cluster size is the reciprocal extremal index") {
  // Valid sequences come from a cluster law: a random head followed by a
  // geometric tail, pushed through alpha_k = alpha_1 sum_{l>=k} lambda_l and
  // alpha_hat_k = sum_{j>=k} alpha_j.
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  for (int rep = 0; rep < 100; ++rep) {
    const int head = 1 + static_cast<int>(gen() % 8);
    const double r = std::uniform_real_distribution<double>(0.0, 0.9)(gen);
    const int n = 3000;
    std::vector<double> lam(n, 0.0);
    for (int l = 0; l < head; ++l) lam[l] = u(gen);
    const double c = u(gen);
    for (int l = head; l < n; ++l) lam[l] = c * std::pow(r, l - head + 1);
    std::vector<double> tail_lam(n + 1, 0.0), alpha(n + 1, 0.0), alpha_hat(n + 1, 0.0);
    for (int l = n; l-- > 0;) tail_lam[l] = tail_lam[l + 1] + lam[l];
    for (int l = n; l-- > 0;) alpha_hat[l] = alpha_hat[l + 1] + tail_lam[l];
    const int L = head + 2 + static_cast<int>(gen() % 5);
    std::vector<double> a(alpha_hat.begin(), alpha_hat.begin() + L);
    for (auto& x : a) x /= alpha_hat[0];
    a[0] = 1.0;
    const auto s = lambda_from_alpha_hat(a);
    CHECK(std::abs(s.mean_cluster_size * s.extremal_index - 1.0) < 1e-9);
    double total = s.lambda_tail;
    for (int l = 0; l < L; ++l) {
      CHECK(s.lambda[l] == doctest::Approx(lam[l] / tail_lam[0]).epsilon(1e-9));
      total += s.lambda[l];
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("round trip through the compound Poisson kernel") {
  const double s = 1.3;
  for (double p : {0.25, 0.5}) {
    const auto seq = lambda_from_alpha_hat(geometric_alpha_hat(p, 80));
    std::vector<double> lam(seq.lambda);
    // Fold the tiny envelope tail into the last term so the law sums to one.
    lam.back() += seq.lambda_tail;
    const auto cp = compound_poisson_pmf(CompoundSpec{s, ClusterSizeDist(lam)}, 60);
    const auto pa = polya_aeppli_pmf(s, p, 60);
    for (std::size_t k = 0; k <= 60; ++k) CHECK(std::abs(cp.probs[k] - pa.probs[k]) < 1e-10);
  }
}

TEST_CASE("total variation") {
  const auto pois = polya_aeppli_pmf_auto(1.0, 0.0);
  const auto pa = polya_aeppli_pmf_auto(1.0, 0.5);
  CHECK(total_variation(pois, pois) == 0.0);
  CHECK(total_variation(point_mass(0), point_mass(1)) == 1.0);
  SUBCASE("term-wise oracle") {
    double brute = 0.0;
    for (int k = 0; k < 200; ++k) {
      const double a = k < static_cast<int>(pois.size()) ? pois.probs[k] : 0.0;
      const double b = k < static_cast<int>(pa.size()) ? pa.probs[k] : 0.0;
      brute += a > b ? a - b : b - a;
    }
    brute = 0.5 * brute + 0.5 * std::abs(pois.tail_mass - pa.tail_mass);
    CHECK(std::abs(total_variation(pois, pa) - brute) < 1e-12);
    CHECK(total_variation(pois, pa) > 0.05);
  }
  SUBCASE("symmetry and triangle inequality") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto random_law = [&] {
      DiscreteDistribution d;
      d.probs.resize(1 + gen() % 12);
      double sum = 0.0;
      for (auto& p : d.probs) sum += (p = u(gen));
      for (auto& p : d.probs) p /= sum;
      return d;
    };
    for (int rep = 0; rep < 200; ++rep) {
      const auto a = random_law(), b = random_law(), c = random_law();
      CHECK(total_variation(a, b) == total_variation(b, a));
      CHECK(total_variation(a, c) <= total_variation(a, b) + total_variation(b, c) + 1e-15);
    }
  }
}

TEST_CASE("chi-square survival function") {
  CHECK(chi_square_survival(3.841459, 1) == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(chi_square_survival(52.191, 31) == doctest::Approx(0.010000949727).epsilon(1e-8));
  CHECK(chi_square_survival(10.0, 4) == doctest::Approx(0.04042768199451279).epsilon(1e-10));
  CHECK(chi_square_survival(0.0, 3) == 1.0);
}

TEST_CASE("chi_square_gof") {
  const auto model = polya_aeppli_pmf_auto(1.0, 0.5);
  SUBCASE("exact agreement") {
    const auto rep = chi_square_gof(model, 100'000, model);
    CHECK(rep.chi_square == 0.0);
    CHECK(rep.p_value == 1.0);
    CHECK(rep.tv_distance == 0.0);
  }
  SUBCASE("calibrated under the null") {
    std::mt19937_64 gen(17);
    int rejections = 0;
    for (int rep = 0; rep < 200; ++rep) {
      const auto emp = sample_law(model, 100'000, gen);
      rejections += chi_square_gof(emp, 100'000, model).p_value < 0.05 ? 1 : 0;
    }
    CHECK(rejections >= 4);
    CHECK(rejections <= 18);
  }
  SUBCASE("power against a Poisson sample") {
    std::mt19937_64 gen(23);
    const auto emp = sample_law(polya_aeppli_pmf_auto(1.0, 0.0), 100'000, gen);
    CHECK(chi_square_gof(emp, 100'000, model).p_value < 1e-6);
  }
  SUBCASE("bins pooled to expected counts of at least five") {
    const auto rep = chi_square_gof(model, 1000, model);
    CHECK(rep.dof + 1 == static_cast<int>(rep.bin_edges.size()));
  }
  SUBCASE("degenerate input rejected") {
    CHECK_THROWS_AS(chi_square_gof(point_mass(0), 100, point_mass(0)), std::invalid_argument);
  }
}
