// Quadrature predictions for returns of a coupled lattice to its diagonal.
//
// For the lattice built on a 1-d expanding map T, the limiting return
// probabilities to a shrinking strip around the diagonal are
//   alpha_hat_{k+1} = int h(x) |DT^k(x)|^{-(n-1)} dx / ((1-gamma)^{k(n-1)} int h(x) dx),
// with h the invariant density on the diagonal. For constant |DT| = a this is
// ((1-gamma) a)^{-k(n-1)}, i.e. geometric cluster sizes.
#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtlab/interval_map.hpp"

namespace rtlab {

/// x -> invariant density at the diagonal point (x, ..., x).
using DiagonalDensity = std::function<double(double)>;

/// h = 1: every built-in lattice with a linear base map.
DiagonalDensity lebesgue_diagonal();
/// h((x)^n) = h_hat(x)^n for the uncoupled product.
DiagonalDensity product_diagonal(std::function<double(double)> h_hat, int n);

/// Thrown when T^k has more branches than the partition budget allows.
class PartitionBudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kPartitionBudget = std::size_t{1} << 22;

/// Sorted endpoints 0 = e_0 < ... < e_m = 1 of the branch intervals of T^k.
std::vector<double> branch_endpoints(const IntervalMap& map, int k,
                                     std::size_t budget = kPartitionBudget);

struct QuadratureOptions {
  double tol = 1e-12;  // absolute error target for each integral
  std::size_t budget = kPartitionBudget;
  unsigned workers = 1;
};

struct AlphaHatIntegral {
  double value = 1.0;
  double numerator = 0.0;    // int h |DT^k|^{-(n-1)}
  double denominator = 0.0;  // int h
  double error = 0.0;        // bound on |value - exact|
  std::size_t intervals = 0;
};

/// (1 - gamma) min |DT| <= 1: the transverse direction is no longer expanded.
bool expansion_lost(const IntervalMap& map, double gamma);

AlphaHatIntegral alpha_hat_integral(const IntervalMap& map, const DiagonalDensity& h, int n,
                                    double gamma, int k, const QuadratureOptions& opts = {});

struct CmlPrediction {
  std::vector<double> alpha_hat;  // index j: alpha_hat_{j+1}, j = 0..k_max
  std::vector<double> alphas;     // index l-1: alpha_l
  std::vector<double> lambdas;    // index l-1: lambda_l
  double extremal_index = 0.0;    // alpha_1 = 1 - alpha_hat_2
  double quadrature_error = 0.0;
  std::vector<std::string> warnings;
};

CmlPrediction cml_prediction(const IntervalMap& map, const DiagonalDensity& h, int n, double gamma,
                             int k_max, const QuadratureOptions& opts = {});

/// Uncoupled product: alpha_1 = int h_hat^n (1 - |DT|^{-(n-1)}) / int h_hat^n.
double product_extremal_index(const IntervalMap& map, const std::function<double(double)>& h_hat,
                              int n, const QuadratureOptions& opts = {});

}  // namespace rtlab
