#include "rtlab/dynamics.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace rtlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool supports_digits(const MapSystem::Kind& kind) {
  return std::visit(overloaded{[](const LinearMod1&) { return true; },
                               [](const SineMod1&) { return false; },
                               [](const TorusAffine&) { return true; },
                               [](const CoupledLattice& c) {
                                 return c.gamma == 0.0 &&
                                        std::holds_alternative<LinearMod1>(c.base);
                               }},
                    kind);
}

int digit_base(const MapSystem::Kind& kind) {
  return std::visit(overloaded{[](const LinearMod1& m) { return m.a; },
                               [](const SineMod1& m) { return m.a; },
                               [](const TorusAffine& t) { return t.a; },
                               [](const CoupledLattice& c) { return branch_count(c.base); }},
                    kind);
}

}  // namespace

std::string to_string(Backend b) {
  switch (b) {
    case Backend::exact_digit:
      return "exact_digit";
    case Backend::float64:
      return "float64";
    case Backend::float64_dither:
      return "float64_dither";
  }
  return "unknown";
}

Backend backend_from_string(const std::string& s) {
  if (s == "exact_digit") return Backend::exact_digit;
  if (s == "float64") return Backend::float64;
  if (s == "float64_dither") return Backend::float64_dither;
  throw std::invalid_argument("unknown backend '" + s + "'");
}

// ---------------------------------------------------------------------------
// DigitWindow

DigitWindow::DigitWindow(int base) : base_(base) {
  if (base < 2) throw std::invalid_argument("DigitWindow: base must be >= 2");
  if (base == 2) {
    width_ = 64;
    modulus_ = 0x1.0p64L;
    return;
  }
  // Largest width with base^width < 2^64.
  unsigned __int128 m = 1;
  int w = 0;
  while (m * static_cast<unsigned __int128>(base) <= (static_cast<unsigned __int128>(1) << 64) - 1) {
    m *= static_cast<unsigned __int128>(base);
    ++w;
  }
  width_ = w;
  word_modulus_ = static_cast<std::uint64_t>(m);
  high_ = word_modulus_ / static_cast<std::uint64_t>(base);
  modulus_ = static_cast<long double>(word_modulus_);
}

void DigitWindow::randomize(CounterRng& rng) {
  value_ = base_ == 2 ? rng.next_u64() : rng.uniform_below(word_modulus_);
}

void DigitWindow::assign(double x) {
  if (!(x >= 0.0 && x < 1.0)) throw std::invalid_argument("DigitWindow::assign: x outside [0,1)");
  // Digit-by-digit expansion avoids rounding up to the modulus.
  std::uint64_t v = 0;
  long double r = x;
  for (int i = 0; i < width_; ++i) {
    r *= base_;
    auto d = static_cast<std::uint64_t>(r);
    if (d >= static_cast<std::uint64_t>(base_)) d = static_cast<std::uint64_t>(base_) - 1;
    r -= static_cast<long double>(d);
    v = base_ == 2 ? (v << 1) | d : v * static_cast<std::uint64_t>(base_) + d;
  }
  value_ = v;
}

// ---------------------------------------------------------------------------
// MapSystem

MapSystem::MapSystem(Kind kind)
    : MapSystem(kind, supports_digits(kind) ? Backend::exact_digit : Backend::float64, 0) {}

MapSystem::MapSystem(Kind kind, Backend backend, std::uint64_t burn_in)
    : kind_(std::move(kind)), backend_(backend), burn_in_(burn_in) {
  if (auto* c = std::get_if<CoupledLattice>(&kind_); c && c->weights.empty() && c->n > 0) {
    c->weights.assign(static_cast<std::size_t>(c->n), 1.0 / c->n);
  }
  validate();
}

void MapSystem::validate() const {
  std::visit(overloaded{[](const LinearMod1& m) { rtlab::validate(IntervalMap{m}); },
                        [](const SineMod1& m) { rtlab::validate(IntervalMap{m}); },
                        [](const TorusAffine& t) {
                          if (t.a < 2) throw std::invalid_argument("torus_affine needs a >= 2");
                        },
                        [](const CoupledLattice& c) {
                          rtlab::validate(c.base);
                          if (c.n < 1) throw std::invalid_argument("cml needs n >= 1");
                          if (!(c.gamma >= 0.0 && c.gamma <= 1.0)) {
                            throw std::invalid_argument("cml needs gamma in [0,1]");
                          }
                          if (c.weights.size() != static_cast<std::size_t>(c.n)) {
                            throw std::invalid_argument("cml weights must have length n");
                          }
                          double sum = 0.0;
                          for (double w : c.weights) {
                            if (!(w >= 0.0)) throw std::invalid_argument("cml weights must be >= 0");
                            sum += w;
                          }
                          if (std::abs(sum - 1.0) > 1e-12) {
                            throw std::invalid_argument("cml weights must sum to 1");
                          }
                        }},
             kind_);
  if (backend_ == Backend::exact_digit && !supports_digits(kind_)) {
    throw std::invalid_argument("exact_digit backend needs a full-branch linear map (" + name() +
                                ")");
  }
}

int MapSystem::dimension() const {
  return std::visit(overloaded{[](const TorusAffine&) { return 2; },
                               [](const CoupledLattice& c) { return c.n; },
                               [](const auto&) { return 1; }},
                    kind_);
}

bool MapSystem::lebesgue_invariant() const {
  return std::visit(overloaded{[](const LinearMod1&) { return true; },
                               [](const SineMod1&) { return false; },
                               [](const TorusAffine&) { return true; },
                               [](const CoupledLattice& c) {
                                 return (c.gamma == 0.0 || c.n == 1) &&
                                        rtlab::lebesgue_invariant(c.base);
                               }},
                    kind_);
}

IntervalMap MapSystem::expanding_map() const {
  return std::visit(overloaded{[](const LinearMod1& m) { return IntervalMap{m}; },
                               [](const SineMod1& m) { return IntervalMap{m}; },
                               [](const TorusAffine& t) { return IntervalMap{LinearMod1{t.a}}; },
                               [](const CoupledLattice& c) { return c.base; }},
                    kind_);
}

std::string MapSystem::name() const {
  std::ostringstream os;
  std::visit(overloaded{[&](const LinearMod1& m) { os << "linear_mod1(a=" << m.a << ")"; },
                        [&](const SineMod1& m) {
                          os << "custom_piecewise(a=" << m.a << ", eps=" << m.eps << ")";
                        },
                        [&](const TorusAffine& t) { os << "torus_affine(a=" << t.a << ")"; },
                        [&](const CoupledLattice& c) {
                          os << "cml(base=" << describe(c.base) << ", n=" << c.n
                             << ", gamma=" << c.gamma << ")";
                        }},
             kind_);
  return os.str();
}

double MapSystem::branch_derivative(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(dimension())) {
    throw std::invalid_argument("branch_derivative: wrong dimension");
  }
  const auto m = expanding_map();
  if (std::holds_alternative<TorusAffine>(kind_)) return derivative(m, x[1]);
  return derivative(m, x[0]);
}

OrbitState MapSystem::make_state(std::vector<double> coords, std::uint64_t master_seed,
                                 std::uint64_t stream) const {
  if (coords.size() != static_cast<std::size_t>(dimension())) {
    throw std::invalid_argument("make_state: wrong dimension");
  }
  for (double c : coords) {
    if (!(c >= 0.0 && c < 1.0)) throw std::invalid_argument("make_state: coordinate outside [0,1)");
  }
  OrbitState s;
  s.rng = CounterRng(master_seed, stream);
  if (digit_backed()) {
    s.digits.assign(coords.size(), DigitWindow(digit_base(kind_)));
    for (std::size_t i = 0; i < coords.size(); ++i) {
      s.digits[i].assign(coords[i]);
    }
    if (std::holds_alternative<TorusAffine>(kind_)) {
      coords[1] = s.digits[1].value();
    } else {
      for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = s.digits[i].value();
    }
  }
  s.coords = std::move(coords);
  return s;
}

void MapSystem::step(OrbitState& s) const {
  with_stepper([&](auto stepper) {
    stepper(s);
    return 0;
  });
}

OrbitState sample_stationary(const MapSystem& map, std::uint64_t master_seed, std::uint64_t trial) {
  const bool exact_law = map.lebesgue_invariant();
  if (!exact_law && map.burn_in() == 0) {
    throw std::invalid_argument("sample_stationary: " + map.name() +
                                " has no closed-form invariant law; configure burn_in");
  }
  OrbitState s;
  s.rng = CounterRng(master_seed, trial);
  const auto dim = static_cast<std::size_t>(map.dimension());
  s.coords.resize(dim);
  if (map.digit_backed()) {
    const int base = branch_count(map.expanding_map());
    s.digits.assign(dim, DigitWindow(base));
    const bool torus = std::holds_alternative<TorusAffine>(map.kind());
    for (std::size_t i = 0; i < dim; ++i) {
      if (torus && i == 0) {
        s.coords[0] = s.rng.uniform();
      } else {
        s.digits[i].randomize(s.rng);
        s.coords[i] = s.digits[i].value();
      }
    }
  } else {
    for (auto& c : s.coords) c = s.rng.uniform();
  }
  if (!exact_law) {
    map.with_stepper([&](auto stepper) {
      for (std::uint64_t i = 0; i < map.burn_in(); ++i) stepper(s);
      return 0;
    });
  }
  return s;
}

double derivative_along(const MapSystem& map, double x, int k) {
  return derivative_along(map.expanding_map(), x, k);
}

}  // namespace rtlab
