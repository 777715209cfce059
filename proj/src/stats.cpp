#include "rtlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace rtlab {

AlphaSequences lambda_from_alpha_hat(const std::vector<double>& alpha_hat, AlphaTail tail) {
  if (alpha_hat.empty() || std::abs(alpha_hat[0] - 1.0) > 1e-12) {
    throw std::invalid_argument("lambda_from_alpha_hat: alpha_hat_1 must equal 1");
  }
  for (std::size_t l = 1; l < alpha_hat.size(); ++l) {
    if (!(alpha_hat[l] >= 0.0) || alpha_hat[l] > alpha_hat[l - 1]) {
      throw std::invalid_argument("lambda_from_alpha_hat: alpha_hat must be non-increasing in [0,1]");
    }
  }
  const std::size_t L = alpha_hat.size();
  double r = 0.0;
  if (tail == AlphaTail::geometric && L >= 2 && alpha_hat[L - 1] > 0.0) {
    r = alpha_hat[L - 1] / alpha_hat[L - 2];
    if (r >= 1.0) {
      throw std::invalid_argument(
          "lambda_from_alpha_hat: flat tail, sum l alpha_hat_l diverges");
    }
  }
  // alpha_hat continued one step past the data.
  auto ah = [&](std::size_t l) {  // 1-based
    if (l <= L) return alpha_hat[l - 1];
    return alpha_hat[L - 1] * std::pow(r, static_cast<double>(l - L));
  };

  AlphaSequences out;
  out.alpha_hat = alpha_hat;
  out.envelope_ratio = r;
  for (std::size_t l = 1; l <= L + 1; ++l) out.alpha.push_back(ah(l) - ah(l + 1));
  const double a1 = out.alpha[0];
  if (!(a1 > 0.0)) throw std::invalid_argument("lambda_from_alpha_hat: extremal index is zero");
  out.extremal_index = a1;
  for (std::size_t l = 1; l <= L; ++l) out.lambda.push_back((out.alpha[l - 1] - out.alpha[l]) / a1);
  out.alpha.pop_back();

  // Beyond L the envelope gives lambda_{L+j} = c r^j with c = alpha_hat_L (1-r)^2 / a1.
  double mean = 0.0;
  for (std::size_t l = L; l-- > 0;) mean += static_cast<double>(l + 1) * out.lambda[l];
  if (r > 0.0) {
    const double c = alpha_hat[L - 1] * (1.0 - r) * (1.0 - r) / a1;
    const double q = 1.0 - r;
    out.lambda_tail = c * r / q;
    mean += c * (static_cast<double>(L) * r / q + r / (q * q));
  }
  out.mean_cluster_size = mean;
  return out;
}

double total_variation(const DiscreteDistribution& d1, const DiscreteDistribution& d2) {
  const std::size_t n = std::max(d1.size(), d2.size());
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += std::abs(d1[k] - d2[k]);
  return 0.5 * s + 0.5 * std::abs(d1.tail_mass - d2.tail_mass);
}

double chi_square_survival(double x, int dof) {
  if (dof < 1) throw std::invalid_argument("chi_square_survival: dof must be >= 1");
  if (!(x > 0.0)) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

GofReport chi_square_gof(const DiscreteDistribution& empirical, std::uint64_t n,
                         const DiscreteDistribution& model) {
  if (n < 1) throw std::invalid_argument("chi_square_gof: n must be >= 1");
  GofReport rep;
  rep.n = n;
  rep.tv_distance = total_variation(empirical, model);

  const double nd = static_cast<double>(n);
  const double min_mass = 5.0 / nd;
  const std::size_t top = std::max(empirical.size(), model.size());
  struct Bin {
    std::uint64_t first;
    double model = 0.0, observed = 0.0;
  };
  std::vector<Bin> bins;
  Bin cur{0};
  for (std::size_t k = 0; k < top; ++k) {
    cur.model += model[k];
    cur.observed += empirical[k];
    if (cur.model >= min_mass) {
      bins.push_back(cur);
      cur = Bin{k + 1};
    }
  }
  cur.model += model.tail_mass;
  cur.observed += empirical.tail_mass;
  if (cur.model >= min_mass || bins.empty()) {
    bins.push_back(cur);
  } else {
    bins.back().model += cur.model;
    bins.back().observed += cur.observed;
  }
  if (bins.size() < 2) throw std::invalid_argument("chi_square_gof: fewer than two bins after merging");

  double stat = 0.0;
  for (const auto& b : bins) {
    const double e = nd * b.model;
    const double o = nd * b.observed;
    stat += (o - e) * (o - e) / e;
    rep.bin_edges.push_back(b.first);
  }
  // Round-off of exact matches.
  if (stat < 1e-18 * nd) stat = 0.0;
  rep.chi_square = stat;
  rep.dof = static_cast<int>(bins.size()) - 1;
  rep.p_value = chi_square_survival(stat, rep.dof);
  return rep;
}

}  // namespace rtlab
