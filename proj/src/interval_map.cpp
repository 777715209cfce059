#include "rtlab/interval_map.hpp"

#include <algorithm>
#include <sstream>

namespace rtlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Solves lift(x) = target on [lo, hi] for the increasing sine lift.
double solve_lift(const SineMod1& m, double target, double lo, double hi) {
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (m.lift(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return m.lift(hi) - target <= target - m.lift(lo) ? hi : lo;
}

}  // namespace

void validate(const IntervalMap& map) {
  std::visit(overloaded{[](const LinearMod1& m) {
                          if (m.a < 2) throw std::invalid_argument("linear_mod1 needs a >= 2");
                        },
                        [](const SineMod1& m) {
                          if (m.a < 2) throw std::invalid_argument("sine map needs a >= 2");
                          if (m.a - 2.0 * std::numbers::pi * std::abs(m.eps) <= 1.0) {
                            throw std::invalid_argument(
                                "sine map not uniformly expanding: need a - 2 pi |eps| > 1");
                          }
                        }},
             map);
}

double apply(const IntervalMap& map, double x) {
  return std::visit([x](const auto& m) { return m.apply(x); }, map);
}

double derivative(const IntervalMap& map, double x) {
  return std::visit([x](const auto& m) { return m.derivative(x); }, map);
}

int branch_count(const IntervalMap& map) {
  return std::visit([](const auto& m) { return m.branches(); }, map);
}

double inverse_branch(const IntervalMap& map, int branch, double y) {
  return std::visit(
      overloaded{[&](const LinearMod1& m) { return (y + branch) / static_cast<double>(m.a); },
                 [&](const SineMod1& m) {
                   // lift is increasing with lift(0)=0, lift(1)=a.
                   return solve_lift(m, y + branch, 0.0, 1.0);
                 }},
      map);
}

std::vector<double> breakpoints(const IntervalMap& map) {
  std::vector<double> out;
  const int q = branch_count(map);
  for (int j = 1; j < q; ++j) {
    out.push_back(inverse_branch(map, j, 0.0));
  }
  return out;
}

double min_derivative(const IntervalMap& map) {
  return std::visit(overloaded{[](const LinearMod1& m) { return static_cast<double>(m.a); },
                               [](const SineMod1& m) {
                                 return m.a - 2.0 * std::numbers::pi * std::abs(m.eps);
                               }},
                    map);
}

bool lebesgue_invariant(const IntervalMap& map) {
  return std::holds_alternative<LinearMod1>(map);
}

std::string describe(const IntervalMap& map) {
  std::ostringstream os;
  std::visit(overloaded{[&](const LinearMod1& m) { os << m.a << "x mod 1"; },
                        [&](const SineMod1& m) {
                          os << m.a << "x + " << m.eps << " sin(2 pi x) mod 1";
                        }},
             map);
  return os.str();
}

double derivative_along(const IntervalMap& map, double x, int k) {
  if (k < 0) throw std::invalid_argument("derivative_along: k must be >= 0");
  if (!(x >= 0.0 && x < 1.0)) throw std::invalid_argument("derivative_along: x outside [0,1)");
  const auto cuts = breakpoints(map);
  double d = 1.0;
  for (int j = 0; j < k; ++j) {
    if (std::binary_search(cuts.begin(), cuts.end(), x)) {
      std::ostringstream os;
      os << "derivative_along: T^" << j << "(x) = " << x << " is a branch endpoint";
      throw SingularPoint(os.str());
    }
    d *= derivative(map, x);
    x = apply(map, x);
  }
  return d;
}

}  // namespace rtlab
