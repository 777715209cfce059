// Concrete dynamical systems and streaming orbit iteration.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rtlab/interval_map.hpp"
#include "rtlab/rng.hpp"

namespace rtlab {

enum class Backend { exact_digit, float64, float64_dither };

std::string to_string(Backend b);
Backend backend_from_string(const std::string& s);

/// Sliding window of base-a digits realising a point of [0,1) exactly in law
/// under a x mod 1: stepping shifts the window by one digit and appends a
/// fresh i.i.d. digit.
class DigitWindow {
 public:
  DigitWindow() = default;
  explicit DigitWindow(int base);

  int base() const { return base_; }
  int width() const { return width_; }
  std::uint64_t raw() const { return value_; }

  /// Uniform draw of the whole window.
  void randomize(CounterRng& rng);
  /// Set the window to the leading digits of x in [0,1).
  void assign(double x);

  void shift(CounterRng& rng) {
    const std::uint64_t d = next_digit(rng);
    if (base_ == 2) {
      value_ = (value_ << 1) | d;
    } else {
      value_ = (value_ % high_) * static_cast<std::uint64_t>(base_) + d;
    }
  }

  double value() const {
    if (base_ == 2) {
      return static_cast<double>(value_ >> 11) * 0x1.0p-53;
    }
    const double v = static_cast<double>(static_cast<long double>(value_) / modulus_);
    return v < 1.0 ? v : std::nextafter(1.0, 0.0);
  }

 private:
  std::uint64_t next_digit(CounterRng& rng) {
    if (buffered_ == 0) {
      buffer_ = base_ == 2 ? rng.next_u64() : rng.uniform_below(word_modulus_);
      buffered_ = width_;
    }
    --buffered_;
    if (base_ == 2) {
      const std::uint64_t d = buffer_ & 1u;
      buffer_ >>= 1;
      return d;
    }
    const std::uint64_t d = buffer_ % static_cast<std::uint64_t>(base_);
    buffer_ /= static_cast<std::uint64_t>(base_);
    return d;
  }

  int base_ = 2;
  int width_ = 64;
  std::uint64_t value_ = 0;
  std::uint64_t high_ = 0;           // base^(width-1)
  std::uint64_t word_modulus_ = 0;   // base^width (unused for base 2)
  long double modulus_ = 0x1.0p64L;  // base^width
  std::uint64_t buffer_ = 0;
  int buffered_ = 0;
};

/// Current point of an orbit. Single-owner; digit windows are used only by the
/// exact-digit backend and mirror coords[] after every step.
struct OrbitState {
  std::vector<double> coords;
  std::vector<DigitWindow> digits;  // one per coordinate when digit-backed, else empty
  CounterRng rng;
};

struct TorusAffine {
  int a = 2;  // matrix [[1,1],[0,a]] acting mod 1
};

/// x_i -> (1-gamma) T(x_i) + gamma sum_j p_j T(x_j).
struct CoupledLattice {
  IntervalMap base = LinearMod1{2};
  int n = 2;
  double gamma = 0.0;
  std::vector<double> weights;  // p_j, defaults to uniform when empty
};

class MapSystem {
 public:
  using Kind = std::variant<LinearMod1, SineMod1, TorusAffine, CoupledLattice>;

  /// Backend defaults to exact_digit wherever the map admits it.
  explicit MapSystem(Kind kind);
  MapSystem(Kind kind, Backend backend, std::uint64_t burn_in = 0);

  const Kind& kind() const { return kind_; }
  Backend backend() const { return backend_; }
  std::uint64_t burn_in() const { return burn_in_; }
  int dimension() const;
  /// Whether Lebesgue measure on [0,1)^n is invariant.
  bool lebesgue_invariant() const;
  /// Whether coordinate i is carried by a digit window.
  bool digit_backed() const { return backend_ == Backend::exact_digit; }
  /// The 1-d map driving the expanding direction (base map of a lattice,
  /// y-direction of the torus).
  IntervalMap expanding_map() const;
  std::string name() const;

  /// |DT| along the expanding direction at the point.
  double branch_derivative(std::span<const double> x) const;

  /// State at explicit coordinates; digits beyond the window come from the
  /// (master_seed, stream) random stream.
  OrbitState make_state(std::vector<double> coords, std::uint64_t master_seed = 0,
                        std::uint64_t stream = 0) const;

  void step(OrbitState& s) const;

  /// Calls f(stepper) with a concrete callable `stepper(OrbitState&)`, so hot
  /// loops avoid per-step dispatch.
  template <class F>
  decltype(auto) with_stepper(F&& f) const;

 private:
  void validate() const;

  Kind kind_;
  Backend backend_;
  std::uint64_t burn_in_;
};

namespace detail {

constexpr double kDitherAmplitude = 0x1.0p-40;

inline double wrap_unit(double x) {
  x -= std::floor(x);
  return x < 1.0 ? x : 0.0;
}

template <class M>
struct IntervalFloatStepper {
  M map;
  bool dither;
  void operator()(OrbitState& s) const {
    double x = map.apply(s.coords[0]);
    if (dither) x = wrap_unit(x + (2.0 * s.rng.uniform() - 1.0) * kDitherAmplitude);
    s.coords[0] = x;
  }
};

struct LinearDigitStepper {
  void operator()(OrbitState& s) const {
    s.digits[0].shift(s.rng);
    s.coords[0] = s.digits[0].value();
  }
};

struct TorusStepper {
  int a;
  bool digits;
  bool dither;
  void operator()(OrbitState& s) const {
    double x = s.coords[0] + s.coords[1];
    x = x < 1.0 ? x : x - 1.0;
    if (digits) {
      s.digits[1].shift(s.rng);
      s.coords[1] = s.digits[1].value();
    } else {
      double y = static_cast<double>(a) * s.coords[1];
      y -= std::floor(y);
      if (dither) {
        x = wrap_unit(x + (2.0 * s.rng.uniform() - 1.0) * kDitherAmplitude);
        y = wrap_unit(y + (2.0 * s.rng.uniform() - 1.0) * kDitherAmplitude);
      }
      s.coords[1] = y;
    }
    s.coords[0] = x;
  }
};

template <class M>
struct LatticeStepper {
  M base;
  double gamma;
  std::span<const double> weights;
  bool dither;
  void operator()(OrbitState& s) const {
    const std::size_t n = s.coords.size();
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s.coords[i] = base.apply(s.coords[i]);
      mean += weights[i] * s.coords[i];
    }
    const double keep = 1.0 - gamma;
    const double pull = gamma * mean;
    for (std::size_t i = 0; i < n; ++i) {
      double x = keep * s.coords[i] + pull;
      if (dither) x += (2.0 * s.rng.uniform() - 1.0) * kDitherAmplitude;
      s.coords[i] = x >= 0.0 && x < 1.0 ? x : wrap_unit(x);
    }
  }
};

struct LatticeDigitStepper {
  void operator()(OrbitState& s) const {
    for (std::size_t i = 0; i < s.coords.size(); ++i) {
      s.digits[i].shift(s.rng);
      s.coords[i] = s.digits[i].value();
    }
  }
};

}  // namespace detail

template <class F>
decltype(auto) MapSystem::with_stepper(F&& f) const {
  const bool dither = backend_ == Backend::float64_dither;
  const bool exact = backend_ == Backend::exact_digit;
  return std::visit(
      [&](const auto& k) -> decltype(auto) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, LinearMod1>) {
          if (exact) return f(detail::LinearDigitStepper{});
          return f(detail::IntervalFloatStepper<LinearMod1>{k, dither});
        } else if constexpr (std::is_same_v<K, SineMod1>) {
          return f(detail::IntervalFloatStepper<SineMod1>{k, dither});
        } else if constexpr (std::is_same_v<K, TorusAffine>) {
          return f(detail::TorusStepper{k.a, exact, dither});
        } else {
          if (exact) return f(detail::LatticeDigitStepper{});
          return std::visit(
              [&](const auto& base) -> decltype(auto) {
                using B = std::decay_t<decltype(base)>;
                return f(detail::LatticeStepper<B>{base, k.gamma, k.weights, dither});
              },
              k.base);
        }
      },
      kind_);
}

/// Streams T^0 s0, ..., T^n_steps s0 through visit(index, state) and returns
/// the final state. O(1) memory.
template <class Visit>
OrbitState orbit_visitor(const MapSystem& map, OrbitState s0, std::uint64_t n_steps,
                         Visit&& visit) {
  map.with_stepper([&](auto stepper) {
    visit(std::uint64_t{0}, std::as_const(s0));
    for (std::uint64_t i = 1; i <= n_steps; ++i) {
      stepper(s0);
      visit(i, std::as_const(s0));
    }
    return 0;
  });
  return s0;
}

/// Draw from the invariant measure, deterministic in (master_seed, trial).
/// Lebesgue-invariant systems are sampled exactly; others need a burn-in.
OrbitState sample_stationary(const MapSystem& map, std::uint64_t master_seed, std::uint64_t trial);

/// |DT^k(x)| along the expanding 1-d map of the system.
double derivative_along(const MapSystem& map, double x, int k);

}  // namespace rtlab
