#include "rtlab/io.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace rtlab {

namespace {

Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json numbers(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

}  // namespace

std::string format_double(double x) {
  if (!std::isfinite(x)) return "nan";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

Json to_json(const ClusterStats& s) {
  Json j;
  j["K"] = s.K;
  j["n_entries"] = s.n_entries;
  j["n_windows"] = s.n_windows;
  j["n_windows_hit"] = s.n_windows_hit;
  j["n_trials"] = s.n_trials;
  j["steps"] = s.steps;
  j["windows_exact"] = s.windows_exact;
  j["insufficient"] = s.insufficient;
  j["l_confident"] = s.l_confident;
  j["extremal_index"] = number(s.extremal_index);
  j["extremal_index_se"] = number(s.extremal_index_se);
  j["alpha_hat"] = numbers(s.alpha_hat);
  j["alpha_hat_se"] = numbers(s.alpha_hat_se);
  j["lambda_hat"] = numbers(s.lambda_hat);
  j["lambda_hat_se"] = numbers(s.lambda_hat_se);
  j["z_counts"] = s.z_counts;
  j["w_at_least"] = s.w_at_least;
  return j;
}

Json to_json(const CountingResult& r) {
  Json j;
  j["horizon"] = r.horizon;
  j["mu"] = number(r.mu);
  j["n_trials"] = r.n_trials;
  j["mean"] = number(r.mean);
  j["mean_se"] = number(r.mean_se);
  j["counts"] = r.counts;
  return j;
}

Json to_json(const EntryTimeRatio& r) {
  Json j;
  j["ratio"] = number(r.ratio);
  j["std_error"] = number(r.std_error);
  j["hits"] = r.hits;
  j["n_trials"] = r.n_trials;
  j["zero_hits"] = r.zero_hits;
  return j;
}

Json to_json(const DiscreteDistribution& d) {
  Json j;
  j["pmf"] = numbers(d.probs);
  j["tail_mass"] = number(d.tail_mass);
  return j;
}

Json to_json(const CmlPrediction& p) {
  Json j;
  j["alpha_hat"] = numbers(p.alpha_hat);
  j["alpha"] = numbers(p.alphas);
  j["lambda"] = numbers(p.lambdas);
  j["extremal_index"] = number(p.extremal_index);
  j["quadrature_error"] = number(p.quadrature_error);
  j["warnings"] = p.warnings;
  return j;
}

Json to_json(const GofReport& g) {
  Json j;
  j["tv_distance"] = number(g.tv_distance);
  j["chi_square"] = number(g.chi_square);
  j["dof"] = g.dof;
  j["p_value"] = number(g.p_value);
  j["n"] = g.n;
  j["bin_edges"] = g.bin_edges;
  return j;
}

void write_cluster_csv(std::ostream& os, const std::vector<ClusterStats>& stats) {
  os << "K,l,alpha_hat,alpha_hat_se,lambda_hat,lambda_hat_se,z_count,w_at_least\n";
  for (const auto& s : stats) {
    const std::size_t n = std::max(s.alpha_hat.size(), s.lambda_hat.size());
    for (std::size_t i = 0; i < n; ++i) {
      auto at = [i](const std::vector<double>& v) { return i < v.size() ? format_double(v[i]) : ""; };
      os << s.K << ',' << i + 1 << ',' << at(s.alpha_hat) << ',' << at(s.alpha_hat_se) << ','
         << at(s.lambda_hat) << ',' << at(s.lambda_hat_se) << ','
         << (i < s.z_counts.size() ? s.z_counts[i] : 0) << ','
         << (i < s.w_at_least.size() ? s.w_at_least[i] : 0) << '\n';
    }
  }
}

void write_counting_csv(std::ostream& os, const CountingResult& r) {
  os << "k,count,freq\n";
  for (std::size_t k = 0; k < r.counts.size(); ++k) {
    os << k << ',' << r.counts[k] << ','
       << format_double(static_cast<double>(r.counts[k]) / static_cast<double>(r.n_trials)) << '\n';
  }
}

void write_pmf_csv(std::ostream& os, const DiscreteDistribution& d) {
  os << "k,p\n";
  for (std::size_t k = 0; k < d.size(); ++k) os << k << ',' << format_double(d.probs[k]) << '\n';
}

void write_law_csv(std::ostream& os, const std::vector<double>& alpha_hat, const std::vector<double>& alpha,
                   const std::vector<double>& lambda) {
  os << "l,alpha_hat,alpha,lambda\n";
  const std::size_t n = std::max({alpha_hat.size(), alpha.size(), lambda.size()});
  for (std::size_t i = 0; i < n; ++i) {
    auto at = [i](const std::vector<double>& v) { return i < v.size() ? format_double(v[i]) : ""; };
    os << i + 1 << ',' << at(alpha_hat) << ',' << at(alpha) << ',' << at(lambda) << '\n';
  }
}

}  // namespace rtlab
