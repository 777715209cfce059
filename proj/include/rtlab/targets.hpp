// Shrinking target sets and their measures.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rtlab/dynamics.hpp"

namespace rtlab {

/// Distance on the circle R/Z.
inline double circle_distance(double a, double b) {
  const double d = std::abs(a - b);
  return std::min(d, 1.0 - d);
}

/// Closed ball. Sup-metric; circle distance per coordinate when `periodic`
/// (torus), plain |.| otherwise (interval).
struct Ball {
  std::vector<double> center;
  double rho = 0.0;
  bool periodic = false;

  bool contains(std::span<const double> x) const {
    for (std::size_t i = 0; i < center.size(); ++i) {
      const double d = periodic ? circle_distance(x[i], center[i]) : std::abs(x[i] - center[i]);
      if (d > rho) return false;
    }
    return true;
  }
};

/// Neighbourhood {(x, y) : dist_circle(y, 0) <= rho} of the invariant line y = 0.
struct TorusStrip {
  double rho = 0.0;
  bool contains(std::span<const double> x) const { return x[1] <= rho || 1.0 - x[1] <= rho; }
};

/// {x : max_ij |x_i - x_j| <= nu}.
struct DiagonalStrip {
  double nu = 0.0;
  bool contains(std::span<const double> x) const {
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    return *hi - *lo <= nu;
  }
};

class TargetSet {
 public:
  using Kind = std::variant<Ball, TorusStrip, DiagonalStrip>;

  explicit TargetSet(Kind kind);
  static TargetSet ball(std::vector<double> center, double rho, bool periodic = false) {
    return TargetSet(Ball{std::move(center), rho, periodic});
  }
  static TargetSet torus_strip(double rho) { return TargetSet(TorusStrip{rho}); }
  static TargetSet diagonal_strip(double nu) { return TargetSet(DiagonalStrip{nu}); }

  const Kind& kind() const { return kind_; }
  /// Radius-like size parameter (rho or nu).
  double size() const;
  /// Same kind and centre with a different size.
  TargetSet resized(double size) const;
  std::string name() const;

  bool contains(std::span<const double> x) const {
    return std::visit([x](const auto& t) { return t.contains(x); }, kind_);
  }

  /// Checks that the target lives in the state space of `map`.
  void check_compatible(const MapSystem& map) const;

 private:
  Kind kind_;
};

struct MeasureEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t n_samples = 0;
  bool exact = false;
};

/// Lebesgue closed form when `map` preserves Lebesgue measure and the target
/// admits one; nullopt otherwise.
std::optional<double> exact_measure(const TargetSet& target, const MapSystem& map);

/// mu(U): the closed form when available, else the Monte Carlo hit frequency
/// over sample_stationary draws on streams derived from `seed`.
MeasureEstimate measure(const TargetSet& target, const MapSystem& map, std::uint64_t n_samples,
                        std::uint64_t seed, unsigned workers = 1);

/// Always Monte Carlo, even when a closed form exists.
MeasureEstimate measure_monte_carlo(const TargetSet& target, const MapSystem& map,
                                    std::uint64_t n_samples, std::uint64_t seed,
                                    unsigned workers = 1);

}  // namespace rtlab
