// One-dimensional piecewise expanding maps of [0,1) onto itself.
#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace rtlab {

/// x -> a x mod 1, a >= 2. Lebesgue measure is invariant.
struct LinearMod1 {
  int a = 2;

  double apply(double x) const {
    const double y = static_cast<double>(a) * x;
    return y - std::floor(y);
  }
  double derivative(double) const { return static_cast<double>(a); }
  int branches() const { return a; }
};

/// x -> a x + eps sin(2 pi x) mod 1. Full branches, non-constant derivative;
/// expanding as long as a - 2 pi |eps| > 1.
struct SineMod1 {
  int a = 2;
  double eps = 0.1;

  double lift(double x) const {
    return static_cast<double>(a) * x + eps * std::sin(2.0 * std::numbers::pi * x);
  }
  double apply(double x) const {
    const double y = lift(x);
    return y - std::floor(y);
  }
  double derivative(double x) const {
    return std::abs(static_cast<double>(a) +
                    2.0 * std::numbers::pi * eps * std::cos(2.0 * std::numbers::pi * x));
  }
  int branches() const { return a; }
};

using IntervalMap = std::variant<LinearMod1, SineMod1>;

/// Raised when a derivative or membership query lands exactly on a branch
/// endpoint (a discontinuity of the map or of one of its iterates).
class SingularPoint : public std::runtime_error {
 public:
  explicit SingularPoint(const std::string& what) : std::runtime_error(what) {}
};

void validate(const IntervalMap& map);
double apply(const IntervalMap& map, double x);
double derivative(const IntervalMap& map, double x);
int branch_count(const IntervalMap& map);
/// Interior breakpoints 0 < c_1 < ... < c_{q-1} < 1 where the mod-1 branch changes.
std::vector<double> breakpoints(const IntervalMap& map);
/// The unique x in branch `branch` (0-based) with T(x) = y, for y in [0,1].
double inverse_branch(const IntervalMap& map, int branch, double y);
/// Lower bound of |T'| over [0,1].
double min_derivative(const IntervalMap& map);
bool lebesgue_invariant(const IntervalMap& map);
std::string describe(const IntervalMap& map);

/// |DT^k(x)| by the chain rule. Throws SingularPoint if any of x, T x, ...,
/// T^{k-1} x is an interior breakpoint.
double derivative_along(const IntervalMap& map, double x, int k);

}  // namespace rtlab
