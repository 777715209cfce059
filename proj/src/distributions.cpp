#include "rtlab/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rtlab {

namespace {

constexpr std::size_t kAutoTruncationCap = 1u << 20;

double tail_of(const std::vector<double>& probs) {
  // Summing smallest-first keeps the complement accurate near 1.
  double sum = 0.0;
  for (auto it = probs.rbegin(); it != probs.rend(); ++it) {
    sum += *it;
  }
  return std::max(0.0, 1.0 - sum);
}

void check_tail(const DiscreteDistribution& d, std::size_t k_max, double tol, const char* who) {
  if (d.tail_mass > tol) {
    std::ostringstream os;
    os << who << ": truncation at k_max=" << k_max << " leaves tail mass " << d.tail_mass
       << " above tolerance " << tol;
    throw TruncationError(os.str(), d.tail_mass);
  }
}

double log_choose(std::size_t n, std::size_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

// Truncated product of two polynomials with non-negative coefficients.
std::vector<double> mul_truncated(const std::vector<double>& a, const std::vector<double>& b,
                                  std::size_t k_max) {
  std::vector<double> out(std::min(k_max + 1, a.size() + b.size() - 1), 0.0);
  for (std::size_t i = 0; i < a.size() && i < out.size(); ++i) {
    if (a[i] == 0.0) continue;
    const std::size_t jmax = std::min(b.size(), out.size() - i);
    for (std::size_t j = 0; j < jmax; ++j) {
      out[i + j] += a[i] * b[j];
    }
  }
  return out;
}

}  // namespace

double DiscreteDistribution::total() const {
  return std::accumulate(probs.begin(), probs.end(), 0.0) + tail_mass;
}

double DiscreteDistribution::mean() const {
  double m = 0.0;
  for (std::size_t k = 1; k < probs.size(); ++k) {
    m += static_cast<double>(k) * probs[k];
  }
  return m;
}

DiscreteDistribution DiscreteDistribution::from_counts(const std::vector<std::uint64_t>& counts) {
  const std::uint64_t n = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (n == 0) {
    throw std::invalid_argument("from_counts: no observations");
  }
  DiscreteDistribution d;
  d.probs.reserve(counts.size());
  for (auto c : counts) {
    d.probs.push_back(static_cast<double>(c) / static_cast<double>(n));
  }
  return d;
}

ClusterSizeDist::ClusterSizeDist(std::vector<double> lambdas) : lambdas_(std::move(lambdas)) {
  if (lambdas_.empty()) {
    throw std::invalid_argument("ClusterSizeDist: empty support");
  }
  double sum = 0.0;
  for (double l : lambdas_) {
    if (!(l >= 0.0) || l > 1.0) {
      throw std::invalid_argument("ClusterSizeDist: lambda outside [0,1]");
    }
    sum += l;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "ClusterSizeDist: lambdas sum to " << sum << ", expected 1";
    throw std::invalid_argument(os.str());
  }
  while (lambdas_.size() > 1 && lambdas_.back() == 0.0) {
    lambdas_.pop_back();
  }
}

ClusterSizeDist ClusterSizeDist::geometric(double p, double tol) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw std::invalid_argument("geometric clusters need 0 <= p < 1");
  }
  std::vector<double> l;
  double remaining = 1.0;
  double term = 1.0 - p;
  while (remaining > tol && l.size() < kAutoTruncationCap) {
    l.push_back(term);
    remaining -= term;
    term *= p;
  }
  const double sum = std::accumulate(l.begin(), l.end(), 0.0);
  for (double& v : l) v /= sum;
  return ClusterSizeDist(std::move(l));
}

double ClusterSizeDist::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < lambdas_.size(); ++i) {
    m += static_cast<double>(i + 1) * lambdas_[i];
  }
  return m;
}

double ClusterSizeDist::generating_function(double z) const {
  double acc = 0.0;
  for (auto it = lambdas_.rbegin(); it != lambdas_.rend(); ++it) {
    acc = acc * z + *it;
  }
  return acc * z;
}

void CompoundSpec::validate() const {
  if (!(intensity > 0.0) || !std::isfinite(intensity)) {
    throw std::invalid_argument("CompoundSpec: intensity must be positive");
  }
  if (clusters.lambdas().empty()) {
    throw std::invalid_argument("CompoundSpec: cluster law missing");
  }
}

namespace {

// Fills probs[k] for k in [probs.size(), k_end).
void panjer_extend(const CompoundSpec& spec, std::vector<double>& probs, std::size_t k_end) {
  const auto& lam = spec.clusters.lambdas();
  const double s = spec.intensity;
  if (probs.empty()) {
    probs.push_back(std::exp(-s));
  }
  for (std::size_t k = probs.size(); k < k_end; ++k) {
    const std::size_t lmax = std::min(k, lam.size());
    double acc = 0.0;
    for (std::size_t l = 1; l <= lmax; ++l) {
      acc += static_cast<double>(l) * lam[l - 1] * probs[k - l];
    }
    probs.push_back(s / static_cast<double>(k) * acc);
  }
}

}  // namespace

DiscreteDistribution compound_poisson_pmf(const CompoundSpec& spec, std::size_t k_max, double tol) {
  spec.validate();
  DiscreteDistribution d;
  d.probs.reserve(k_max + 1);
  panjer_extend(spec, d.probs, k_max + 1);
  d.tail_mass = tail_of(d.probs);
  check_tail(d, k_max, tol, "compound_poisson_pmf");
  return d;
}

DiscreteDistribution compound_poisson_pmf_auto(const CompoundSpec& spec, double tol) {
  spec.validate();
  DiscreteDistribution d;
  // Start beyond the mean, then grow geometrically.
  std::size_t k_end = static_cast<std::size_t>(spec.intensity * spec.clusters.mean()) + 16;
  while (true) {
    panjer_extend(spec, d.probs, k_end);
    d.tail_mass = tail_of(d.probs);
    if (d.tail_mass <= tol) break;
    if (k_end >= kAutoTruncationCap) {
      check_tail(d, k_end - 1, tol, "compound_poisson_pmf");
    }
    k_end = std::min(kAutoTruncationCap, k_end * 2);
  }
  // Trim to the smallest k_max that still satisfies the tolerance.
  double dropped = d.tail_mass;
  while (d.probs.size() > 1 && dropped + d.probs.back() <= tol) {
    dropped += d.probs.back();
    d.probs.pop_back();
  }
  d.tail_mass = tail_of(d.probs);
  return d;
}

DiscreteDistribution polya_aeppli_pmf(double s, double p, std::size_t k_max, double tol) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw std::invalid_argument("polya_aeppli_pmf: s must be positive");
  }
  if (!(p >= 0.0 && p < 1.0)) {
    throw std::invalid_argument("polya_aeppli_pmf: p must lie in [0,1)");
  }
  DiscreteDistribution d;
  d.probs.assign(k_max + 1, 0.0);
  d.probs[0] = std::exp(-s);
  const double log_s = std::log(s);
  const double log_q = std::log1p(-p);
  for (std::size_t k = 1; k <= k_max; ++k) {
    if (p == 0.0) {
      // Only j = k survives: plain Poisson.
      d.probs[k] = std::exp(-s + static_cast<double>(k) * log_s - std::lgamma(k + 1.0));
      continue;
    }
    const double log_p = std::log(p);
    double acc = 0.0;
    for (std::size_t j = 1; j <= k; ++j) {
      const double lt = -s + static_cast<double>(k - j) * log_p + static_cast<double>(j) * log_q +
                        static_cast<double>(j) * log_s - std::lgamma(j + 1.0) +
                        log_choose(k - 1, j - 1);
      acc += std::exp(lt);
    }
    d.probs[k] = acc;
  }
  d.tail_mass = tail_of(d.probs);
  check_tail(d, k_max, tol, "polya_aeppli_pmf");
  return d;
}

DiscreteDistribution polya_aeppli_pmf_auto(double s, double p, double tol) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw std::invalid_argument("polya_aeppli_pmf: p must lie in [0,1)");
  }
  // The recursion is cheap; use it to find the truncation index.
  const auto ref = compound_poisson_pmf_auto(CompoundSpec{s, ClusterSizeDist::geometric(p)}, tol);
  // Rounding in the two evaluations differs slightly near the cut.
  for (std::size_t k_max = ref.size() - 1;; k_max += 4) {
    auto d = polya_aeppli_pmf(s, p, k_max, 1.0);
    if (d.tail_mass <= tol) return d;
    if (k_max >= kAutoTruncationCap) check_tail(d, k_max, tol, "polya_aeppli_pmf");
  }
}

DiscreteDistribution compound_binomial_pmf(std::uint64_t n_trials, double p,
                                           const ClusterSizeDist& clusters, std::size_t k_max,
                                           double tol) {
  if (n_trials < 1) {
    throw std::invalid_argument("compound_binomial_pmf: need at least one block");
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("compound_binomial_pmf: p must lie in [0,1]");
  }
  std::vector<double> block(std::min(k_max + 1, clusters.max_size() + 1), 0.0);
  block[0] = 1.0 - p;
  for (std::size_t l = 1; l < block.size(); ++l) {
    block[l] = p * clusters.at(l);
  }
  std::vector<double> result{1.0};
  std::uint64_t e = n_trials;
  while (e > 0) {
    if (e & 1u) result = mul_truncated(result, block, k_max);
    e >>= 1;
    if (e > 0) block = mul_truncated(block, block, k_max);
  }
  DiscreteDistribution d;
  d.probs = std::move(result);
  d.probs.resize(k_max + 1, 0.0);
  d.tail_mass = tail_of(d.probs);
  check_tail(d, k_max, tol, "compound_binomial_pmf");
  return d;
}

double generating_function_eval(const DiscreteDistribution& dist, double z) {
  if (!(z >= 0.0 && z <= 1.0)) {
    throw std::invalid_argument("generating_function_eval: z must lie in [0,1]");
  }
  double acc = 0.0;
  for (auto it = dist.probs.rbegin(); it != dist.probs.rend(); ++it) {
    acc = acc * z + *it;
  }
  return acc;
}

}  // namespace rtlab
