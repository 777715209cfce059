#include "rtlab/cml_theory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "rtlab/parallel.hpp"
#include "rtlab/stats.hpp"

namespace rtlab {

namespace {

using Gauss16 = boost::math::quadrature::gauss<double, 16>;

constexpr int kMaxDepth = 40;

struct Piece {
  double value = 0.0;
  double error = 0.0;
};

// GL16 on [a, b], halving until the two-panel sum agrees with the one-panel
// value to within tol * (b - a) / width.
template <class F>
Piece integrate_piece(const F& f, double a, double b, double tol_density, int depth = 0) {
  const double whole = Gauss16::integrate(f, a, b);
  const double mid = 0.5 * (a + b);
  const double halves = Gauss16::integrate(f, a, mid) + Gauss16::integrate(f, mid, b);
  const double diff = std::abs(whole - halves);
  if (diff <= tol_density * (b - a) || depth >= kMaxDepth) {
    return {halves, diff};
  }
  const Piece l = integrate_piece(f, a, mid, tol_density, depth + 1);
  const Piece r = integrate_piece(f, mid, b, tol_density, depth + 1);
  return {l.value + r.value, l.error + r.error};
}

// Indexed tree sum: the same grouping for every worker count.
double pairwise_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  if (hi - lo <= 8) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += v[i];
    return s;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

struct Totals {
  double value = 0.0;
  double error = 0.0;
};

template <class F>
Totals integrate_partition(const F& f, const std::vector<double>& edges, const QuadratureOptions& opts) {
  const std::size_t m = edges.size() - 1;
  std::vector<double> values(m), errors(m);
  parallel_for(0, m, opts.workers, [&](std::uint64_t i) {
    const Piece p = integrate_piece(f, edges[i], edges[i + 1], opts.tol);
    values[i] = p.value;
    errors[i] = p.error;
  });
  return {pairwise_sum(values, 0, m), pairwise_sum(errors, 0, m)};
}

void check_args(int n, double gamma, int k) {
  if (n < 2) throw std::invalid_argument("cml_theory: lattice size n must be >= 2");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("cml_theory: gamma must lie in [0,1)");
  if (k < 0) throw std::invalid_argument("cml_theory: k must be >= 0");
}

}  // namespace

DiagonalDensity lebesgue_diagonal() {
  return [](double) { return 1.0; };
}

DiagonalDensity product_diagonal(std::function<double(double)> h_hat, int n) {
  return [h_hat = std::move(h_hat), n](double x) { return std::pow(h_hat(x), n); };
}

std::vector<double> branch_endpoints(const IntervalMap& map, int k, std::size_t budget) {
  if (k < 0) throw std::invalid_argument("branch_endpoints: k must be >= 0");
  const int q = branch_count(map);
  const double count = std::pow(static_cast<double>(q), k);
  if (count > static_cast<double>(budget)) {
    std::ostringstream os;
    os << "branch_endpoints: T^" << k << " of " << describe(map) << " has " << count
       << " branches, above the partition budget " << budget;
    throw PartitionBudgetError(os.str());
  }
  // Full branches: the endpoints of T^k are the T-preimages of those of T^{k-1}.
  std::vector<double> e{0.0, 1.0};
  for (int j = 0; j < k; ++j) {
    std::vector<double> next;
    next.reserve(static_cast<std::size_t>(q) * (e.size() - 1) + 1);
    for (int b = 0; b < q; ++b) {
      for (std::size_t i = 0; i + 1 < e.size(); ++i) next.push_back(inverse_branch(map, b, e[i]));
    }
    next.push_back(1.0);
    e = std::move(next);
  }
  return e;
}

bool expansion_lost(const IntervalMap& map, double gamma) {
  return (1.0 - gamma) * min_derivative(map) <= 1.0;
}

AlphaHatIntegral alpha_hat_integral(const IntervalMap& map, const DiagonalDensity& h, int n,
                                    double gamma, int k, const QuadratureOptions& opts) {
  check_args(n, gamma, k);
  validate(map);
  AlphaHatIntegral out;
  if (k == 0) return out;
  const auto edges = branch_endpoints(map, k, opts.budget);
  out.intervals = edges.size() - 1;
  const double power = static_cast<double>(n - 1);
  const Totals num = integrate_partition(
      [&](double x) { return h(x) * std::pow(derivative_along(map, x, k), -power); }, edges, opts);
  const Totals den = integrate_partition(h, edges, opts);
  if (!(den.value > 0.0)) throw std::invalid_argument("alpha_hat_integral: density integrates to zero");
  out.numerator = num.value;
  out.denominator = den.value;
  const double scale = std::pow(1.0 - gamma, -static_cast<double>(k) * power);
  out.value = num.value / den.value * scale;
  out.error = scale * (num.error + num.value / den.value * den.error) / den.value;
  return out;
}

CmlPrediction cml_prediction(const IntervalMap& map, const DiagonalDensity& h, int n, double gamma,
                             int k_max, const QuadratureOptions& opts) {
  if (k_max < 1) throw std::invalid_argument("cml_prediction: k_max must be >= 1");
  CmlPrediction p;
  double err = 0.0;
  for (int k = 0; k <= k_max; ++k) {
    const auto a = alpha_hat_integral(map, h, n, gamma, k, opts);
    p.alpha_hat.push_back(a.value);
    err = std::max(err, a.error);
  }
  p.extremal_index = 1.0 - p.alpha_hat[1];
  if (expansion_lost(map, gamma)) {
    std::ostringstream os;
    os << "(1 - gamma) min|DT| = " << (1.0 - gamma) * min_derivative(map)
       << " <= 1: transverse expansion lost, the formula is outside its validity range";
    p.warnings.push_back(os.str());
  }
  try {
    const auto seq = lambda_from_alpha_hat(p.alpha_hat, AlphaTail::geometric);
    p.alphas = seq.alpha;
    p.lambdas = seq.lambda;
    p.extremal_index = seq.extremal_index;
  } catch (const std::invalid_argument& e) {
    p.warnings.push_back(std::string("cluster law not assembled: ") + e.what());
  }
  // Second differences of alpha_hat divided by alpha_1.
  p.quadrature_error = p.extremal_index > 0.0 ? 4.0 * err / p.extremal_index : err;
  return p;
}

double product_extremal_index(const IntervalMap& map, const std::function<double(double)>& h_hat,
                              int n, const QuadratureOptions& opts) {
  check_args(n, 0.0, 1);
  validate(map);
  const auto edges = branch_endpoints(map, 1, opts.budget);
  const double power = static_cast<double>(n - 1);
  const Totals num = integrate_partition(
      [&](double x) {
        return std::pow(h_hat(x), n) * (1.0 - std::pow(derivative(map, x), -power));
      },
      edges, opts);
  const Totals den = integrate_partition([&](double x) { return std::pow(h_hat(x), n); }, edges, opts);
  return num.value / den.value;
}

}  // namespace rtlab
