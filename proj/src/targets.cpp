#include "rtlab/targets.hpp"

#include <sstream>
#include <stdexcept>

#include "rtlab/parallel.hpp"

namespace rtlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr std::uint64_t kMeasurePurpose = 0x6d75;  // "mu"

// Length of [c - rho, c + rho] intersected with [0, 1].
double clipped_interval(double c, double rho) {
  // Unclipped: exactly 2 rho rather than the rounded difference of endpoints.
  if (c - rho >= 0.0 && c + rho <= 1.0) return 2.0 * rho;
  return std::max(0.0, std::min(1.0, c + rho) - std::max(0.0, c - rho));
}

}  // namespace

TargetSet::TargetSet(Kind kind) : kind_(std::move(kind)) {
  const double s = size();
  if (!(s >= 0.0) || !std::isfinite(s)) {
    throw std::invalid_argument("target size must be a non-negative number");
  }
  if (const auto* b = std::get_if<Ball>(&kind_); b && b->center.empty()) {
    throw std::invalid_argument("ball target needs a centre");
  }
}

double TargetSet::size() const {
  return std::visit(overloaded{[](const Ball& b) { return b.rho; },
                               [](const TorusStrip& t) { return t.rho; },
                               [](const DiagonalStrip& d) { return d.nu; }},
                    kind_);
}

TargetSet TargetSet::resized(double s) const {
  return std::visit(overloaded{[&](Ball b) {
                                 b.rho = s;
                                 return TargetSet(std::move(b));
                               },
                               [&](TorusStrip) { return TargetSet(TorusStrip{s}); },
                               [&](DiagonalStrip) { return TargetSet(DiagonalStrip{s}); }},
                    kind_);
}

std::string TargetSet::name() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{[&](const Ball& b) {
                          os << "ball(center=(";
                          for (std::size_t i = 0; i < b.center.size(); ++i) {
                            os << (i ? "," : "") << b.center[i];
                          }
                          os << "), rho=" << b.rho << ")";
                        },
                        [&](const TorusStrip& t) { os << "torus_strip(rho=" << t.rho << ")"; },
                        [&](const DiagonalStrip& d) { os << "diagonal_strip(nu=" << d.nu << ")"; }},
             kind_);
  return os.str();
}

void TargetSet::check_compatible(const MapSystem& map) const {
  const auto dim = static_cast<std::size_t>(map.dimension());
  std::visit(overloaded{[&](const Ball& b) {
                          if (b.center.size() != dim) {
                            throw std::invalid_argument("ball centre dimension does not match " +
                                                        map.name());
                          }
                        },
                        [&](const TorusStrip&) {
                          if (!std::holds_alternative<TorusAffine>(map.kind())) {
                            throw std::invalid_argument("torus_strip needs the torus_affine map");
                          }
                        },
                        [&](const DiagonalStrip&) {
                          if (dim < 2) {
                            throw std::invalid_argument("diagonal_strip needs dimension >= 2");
                          }
                        }},
             kind_);
}

std::optional<double> exact_measure(const TargetSet& target, const MapSystem& map) {
  target.check_compatible(map);
  if (!map.lebesgue_invariant()) return std::nullopt;
  return std::visit(
      overloaded{[](const Ball& b) -> std::optional<double> {
                   double m = 1.0;
                   for (double c : b.center) {
                     m *= b.periodic ? std::min(1.0, 2.0 * b.rho) : clipped_interval(c, b.rho);
                   }
                   return m;
                 },
                 [](const TorusStrip& t) -> std::optional<double> {
                   return std::min(1.0, 2.0 * t.rho);
                 },
                 [&](const DiagonalStrip& d) -> std::optional<double> {
                   // Range of n i.i.d. uniforms: P(max - min <= nu) = n nu^(n-1) - (n-1) nu^n.
                   if (d.nu >= 1.0) return 1.0;
                   const double n = map.dimension();
                   return n * std::pow(d.nu, n - 1.0) - (n - 1.0) * std::pow(d.nu, n);
                 }},
      target.kind());
}

MeasureEstimate measure_monte_carlo(const TargetSet& target, const MapSystem& map,
                                    std::uint64_t n_samples, std::uint64_t seed, unsigned workers) {
  if (n_samples < 1) throw std::invalid_argument("measure: n_samples must be >= 1");
  target.check_compatible(map);
  std::uint64_t hits = 0;
  if (map.lebesgue_invariant()) {
    // Independent exact draws, accumulated in fixed-size chunks.
    constexpr std::uint64_t chunk = 1u << 14;
    const std::uint64_t n_chunks = (n_samples + chunk - 1) / chunk;
    std::vector<std::uint64_t> chunk_hits(n_chunks, 0);
    parallel_for(0, n_chunks, workers, [&](std::uint64_t c) {
      const std::uint64_t lo = c * chunk;
      const std::uint64_t hi = std::min(n_samples, lo + chunk);
      std::uint64_t h = 0;
      for (std::uint64_t i = lo; i < hi; ++i) {
        const auto s = sample_stationary(map, seed, substream(i, kMeasurePurpose));
        h += target.contains(s.coords) ? 1 : 0;
      }
      chunk_hits[c] = h;
    });
    for (auto h : chunk_hits) hits += h;
  } else {
    // Ergodic averages along burnt-in orbits; the error is taken from batch
    // means across orbits.
    const std::uint64_t n_orbits = std::min<std::uint64_t>(n_samples, 256);
    const std::uint64_t per = n_samples / n_orbits;
    std::vector<std::uint64_t> orbit_hits(n_orbits, 0);
    parallel_for(0, n_orbits, workers, [&](std::uint64_t o) {
      auto s = sample_stationary(map, seed, substream(o, kMeasurePurpose));
      std::uint64_t h = 0;
      orbit_visitor(map, std::move(s), per - 1, [&](std::uint64_t, const OrbitState& st) {
        h += target.contains(st.coords) ? 1 : 0;
      });
      orbit_hits[o] = h;
    });
    MeasureEstimate est;
    est.n_samples = per * n_orbits;
    for (auto h : orbit_hits) hits += h;
    est.mean = static_cast<double>(hits) / static_cast<double>(est.n_samples);
    double var = 0.0;
    for (auto h : orbit_hits) {
      const double d = static_cast<double>(h) / static_cast<double>(per) - est.mean;
      var += d * d;
    }
    const double naive = std::sqrt(est.mean * (1.0 - est.mean) / static_cast<double>(est.n_samples));
    est.std_error =
        n_orbits > 1 ? std::max(naive, std::sqrt(var / static_cast<double>(n_orbits - 1) /
                                                 static_cast<double>(n_orbits)))
                     : naive;
    return est;
  }
  MeasureEstimate est;
  est.n_samples = n_samples;
  est.mean = static_cast<double>(hits) / static_cast<double>(n_samples);
  est.std_error = std::sqrt(est.mean * (1.0 - est.mean) / static_cast<double>(n_samples));
  return est;
}

MeasureEstimate measure(const TargetSet& target, const MapSystem& map, std::uint64_t n_samples,
                        std::uint64_t seed, unsigned workers) {
  if (n_samples < 1) throw std::invalid_argument("measure: n_samples must be >= 1");
  if (auto m = exact_measure(target, map)) {
    return MeasureEstimate{*m, 0.0, n_samples, true};
  }
  return measure_monte_carlo(target, map, n_samples, seed, workers);
}

}  // namespace rtlab
