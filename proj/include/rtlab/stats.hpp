// Conversions among the alpha_hat / alpha / lambda sequences, and
// goodness-of-fit comparisons of discrete laws.
#pragma once

#include <cstdint>
#include <vector>

#include "rtlab/distributions.hpp"

namespace rtlab {

/// How alpha_hat continues past the last supplied index.
enum class AlphaTail {
  /// Geometric envelope through the last two supplied terms.
  geometric,
  /// alpha_hat is exactly zero beyond the supplied terms (finite windows:
  /// W^K never exceeds K + 1).
  zero,
};

struct AlphaSequences {
  std::vector<double> alpha_hat;  // index l-1
  std::vector<double> alpha;      // alpha_l = alpha_hat_l - alpha_hat_{l+1}
  std::vector<double> lambda;     // lambda_l = (alpha_l - alpha_{l+1}) / alpha_1
  double extremal_index = 0.0;    // alpha_1
  double envelope_ratio = 0.0;    // tail ratio r (0 for AlphaTail::zero)
  double lambda_tail = 0.0;       // sum of lambda_l beyond the supplied terms
  double mean_cluster_size = 0.0; // sum l lambda_l, tail included in closed form
};

/// Rejects alpha_hat_1 != 1, increasing sequences and alpha_1 = 0; a geometric
/// envelope with ratio >= 1 has no finite mean and is rejected too.
AlphaSequences lambda_from_alpha_hat(const std::vector<double>& alpha_hat,
                                     AlphaTail tail = AlphaTail::geometric);

/// 1/2 sum |d1 - d2| + 1/2 |tail1 - tail2|.
double total_variation(const DiscreteDistribution& d1, const DiscreteDistribution& d2);

struct GofReport {
  double tv_distance = 0.0;
  double chi_square = 0.0;
  int dof = 0;
  double p_value = 1.0;
  std::uint64_t n = 0;
  std::vector<std::uint64_t> bin_edges;  // first k of each merged bin
};

/// Pearson test of n draws with empirical law `empirical` against `model`.
/// Adjacent bins are pooled until each holds model mass >= 5/n; the last
/// bin absorbs the model tail. Throws when fewer than two bins remain.
GofReport chi_square_gof(const DiscreteDistribution& empirical, std::uint64_t n,
                         const DiscreteDistribution& model);

/// Upper tail P(chi2_dof > x).
double chi_square_survival(double x, int dof);

}  // namespace rtlab
