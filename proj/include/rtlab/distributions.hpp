// Truncated pmfs of compound Poisson, Polya-Aeppli and compound binomial laws.
#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtlab {

/// Default bound on the probability mass dropped by truncation.
inline constexpr double kDefaultTailTolerance = 1e-12;

/// Thrown when a requested truncation index leaves more than the configured
/// tail mass unaccounted for.
class TruncationError : public std::runtime_error {
 public:
  TruncationError(const std::string& what, double tail_mass)
      : std::runtime_error(what), tail_mass_(tail_mass) {}
  double tail_mass() const { return tail_mass_; }

 private:
  double tail_mass_;
};

/// pmf over {0, 1, ..., size()-1} plus the mass beyond the truncation index.
struct DiscreteDistribution {
  std::vector<double> probs;
  double tail_mass = 0.0;

  std::size_t size() const { return probs.size(); }
  double operator[](std::size_t k) const { return k < probs.size() ? probs[k] : 0.0; }
  double total() const;
  double mean() const;

  /// Build from raw counts (empirical law, tail_mass = 0).
  static DiscreteDistribution from_counts(const std::vector<std::uint64_t>& counts);
};

/// Cluster-size law lambda_l = P(X = l), l >= 1. Index 0 of `lambdas()` is l = 1.
class ClusterSizeDist {
 public:
  ClusterSizeDist() = default;
  /// Validates non-negativity and sum to one within 1e-12.
  explicit ClusterSizeDist(std::vector<double> lambdas);

  /// (1-p) p^(l-1), truncated once the remaining mass drops below `tol` and
  /// renormalised.
  static ClusterSizeDist geometric(double p, double tol = 1e-15);
  static ClusterSizeDist point_mass_one() { return ClusterSizeDist({1.0}); }

  const std::vector<double>& lambdas() const { return lambdas_; }
  std::size_t max_size() const { return lambdas_.size(); }
  /// lambda_l for l >= 1, zero outside the support.
  double at(std::size_t l) const { return l >= 1 && l <= lambdas_.size() ? lambdas_[l - 1] : 0.0; }
  double mean() const;
  double generating_function(double z) const;

 private:
  std::vector<double> lambdas_;
};

struct CompoundSpec {
  double intensity = 1.0;
  ClusterSizeDist clusters;

  void validate() const;
};

/// Law of W = X_1 + ... + X_P with P ~ Poisson(s), via the l-weighted
/// (Panjer) recursion. Throws TruncationError if mass beyond k_max exceeds tol.
DiscreteDistribution compound_poisson_pmf(const CompoundSpec& spec, std::size_t k_max,
                                          double tol = kDefaultTailTolerance);

/// Smallest truncation that brings the tail below tol.
DiscreteDistribution compound_poisson_pmf_auto(const CompoundSpec& spec,
                                               double tol = kDefaultTailTolerance);

/// Closed-form Polya-Aeppli pmf (compound Poisson with geometric clusters),
/// evaluated with log-space binomials.
DiscreteDistribution polya_aeppli_pmf(double s, double p, std::size_t k_max,
                                      double tol = kDefaultTailTolerance);
DiscreteDistribution polya_aeppli_pmf_auto(double s, double p, double tol = kDefaultTailTolerance);

/// Law of Y_1 + ... + Y_Q with Q ~ Binomial(n_trials, p), computed as the
/// n_trials-th power of the per-block polynomial (1-p) + p * phi_Y(z).
DiscreteDistribution compound_binomial_pmf(std::uint64_t n_trials, double p,
                                           const ClusterSizeDist& clusters, std::size_t k_max,
                                           double tol = kDefaultTailTolerance);

/// sum_k z^k probs[k] for z in [0, 1].
double generating_function_eval(const DiscreteDistribution& dist, double z);

}  // namespace rtlab
