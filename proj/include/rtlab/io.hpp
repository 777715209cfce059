// JSON and CSV forms of results. Numbers are written with round-trip
// precision so that reruns compare byte for byte.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "rtlab/cml_theory.hpp"
#include "rtlab/distributions.hpp"
#include "rtlab/estimators.hpp"
#include "rtlab/stats.hpp"

namespace rtlab {

using Json = nlohmann::ordered_json;

Json to_json(const ClusterStats& s);
Json to_json(const CountingResult& r);
Json to_json(const EntryTimeRatio& r);
Json to_json(const DiscreteDistribution& d);
Json to_json(const CmlPrediction& p);
Json to_json(const GofReport& g);

/// Shortest text that parses back to the same double.
std::string format_double(double x);

/// K,l,alpha_hat,alpha_hat_se,lambda_hat,lambda_hat_se,z_count,w_at_least
void write_cluster_csv(std::ostream& os, const std::vector<ClusterStats>& stats);
/// k,count,freq
void write_counting_csv(std::ostream& os, const CountingResult& r);
/// k,p
void write_pmf_csv(std::ostream& os, const DiscreteDistribution& d);
/// l,alpha_hat,alpha,lambda (missing entries left blank)
void write_law_csv(std::ostream& os, const std::vector<double>& alpha_hat, const std::vector<double>& alpha,
                   const std::vector<double>& lambda);

}  // namespace rtlab
