#include "rtlab/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rtlab {

namespace {

constexpr std::uint64_t kMeasureSamples = 10'000'000;

Prediction geometric_prediction(double r, int k_max, std::string model) {
  Prediction p;
  p.model = std::move(model);
  p.geometric_ratio = r;
  for (int l = 1; l <= k_max + 1; ++l) p.alpha_hat.push_back(std::pow(r, l - 1));
  const auto seq = lambda_from_alpha_hat(p.alpha_hat, AlphaTail::geometric);
  p.alpha = seq.alpha;
  p.lambda = seq.lambda;
  p.extremal_index = seq.extremal_index;
  return p;
}

Prediction interval_prediction(const ExperimentConfig& cfg) {
  if (cfg.target.kind != "ball") throw UnsupportedSystem("interval maps: prediction needs a ball target");
  const auto map = cfg.base_map();
  const double x = cfg.target.center.at(0);
  if (const auto per = period_of(map, x)) {
    const double d = derivative_along(map, x, *per);
    std::ostringstream os;
    os << "periodic centre, period " << *per << ", |DT^p| = " << d;
    return geometric_prediction(1.0 / d, cfg.predict.k_max, os.str());
  }
  return geometric_prediction(0.0, cfg.predict.k_max, "non-periodic centre: Poisson");
}

Prediction cml_prediction_of(const ExperimentConfig& cfg) {
  if (cfg.target.kind != "diagonal_strip") throw UnsupportedSystem("lattices: prediction needs a diagonal_strip target");
  const auto base = cfg.base_map();
  if (!lebesgue_invariant(base)) {
    throw UnsupportedSystem("lattice prediction needs the invariant density on the diagonal; only linear base maps "
                            "(density 1) are supported");
  }
  QuadratureOptions q;
  q.tol = cfg.predict.tol;
  q.workers = cfg.workers;
  const auto c = cml_prediction(base, lebesgue_diagonal(), cfg.system.n, cfg.system.gamma, cfg.predict.k_max, q);
  Prediction p;
  p.model = "diagonal quadrature";
  p.alpha_hat = c.alpha_hat;
  p.alpha = c.alphas;
  p.lambda = c.lambdas;
  p.extremal_index = c.extremal_index;
  p.quadrature_error = c.quadrature_error;
  p.warnings = c.warnings;
  // Constant |DT|: clusters are geometric with ratio ((1 - gamma) a)^-(n-1).
  if (c.warnings.empty()) p.geometric_ratio = c.alpha_hat.size() > 1 ? c.alpha_hat[1] : 0.0;
  return p;
}

Prediction regen_prediction(const ExperimentConfig& cfg) {
  const auto spec = cfg.make_regen();
  Prediction p;
  const std::size_t n = static_cast<std::size_t>(cfg.predict.k_max) + 1;
  if (spec.rule == BlockRule::smith) {
    // alpha_hat_l = 1/2 for l >= 2 while the window limit puts all mass on 1.
    p.model = "Smith regenerative process";
    p.alpha_hat.assign(n, 0.5);
    p.alpha_hat[0] = 1.0;
    p.alpha.assign(n, 0.0);
    p.alpha[0] = 0.5;
    p.lambda = {1.0};
    p.extremal_index = 0.5;
    p.warnings.push_back("sum l alpha_hat_l diverges: lambda is not (alpha_l - alpha_{l+1}) / alpha_1 here");
    return p;
  }
  p.model = "regenerative process with fixed block-length law";
  const auto& lam = spec.lengths.lambdas();
  const double mean = spec.lengths.mean();
  // alpha_l = sum_{j >= l} lambda_j / mean, alpha_hat_l = sum_{j >= l} alpha_j.
  const std::size_t support = std::max(n, lam.size());
  std::vector<double> alpha(support + 1, 0.0), alpha_hat(support + 1, 0.0);
  for (std::size_t l = support; l >= 1; --l) {
    alpha[l - 1] = alpha[l] + (l <= lam.size() ? lam[l - 1] : 0.0) / mean;
    alpha_hat[l - 1] = alpha_hat[l] + alpha[l - 1];
  }
  p.alpha.assign(alpha.begin(), alpha.begin() + n);
  p.alpha_hat.assign(alpha_hat.begin(), alpha_hat.begin() + n);
  p.alpha_hat[0] = 1.0;
  p.lambda = lam;
  p.extremal_index = 1.0 / mean;
  return p;
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw SchemaError(std::string("missing field '") + key + "'");
  return j.at(key);
}

std::string schema_of(const Json& j) { return field(j, "schema").get<std::string>(); }

DiscreteDistribution pmf_from(const Json& j) {
  DiscreteDistribution d;
  for (const auto& v : field(j, "pmf")) d.probs.push_back(v.is_null() ? 0.0 : v.get<double>());
  d.tail_mass = field(j, "tail_mass").get<double>();
  return d;
}

struct Law {
  DiscreteDistribution dist;
  std::uint64_t n = 0;  // 0 for exact laws
  std::size_t row = 0;
  std::vector<double> lambda;
};

Law law_of(const Json& j, std::optional<std::size_t> row) {
  const auto schema = schema_of(j);
  Law law;
  if (schema == "rtlab/prediction/1") {
    const auto& cs = field(j, "counting");
    for (const auto& c : cs) {
      const auto r = field(c, "row").get<std::size_t>();
      if (row && r != *row) continue;
      law.dist = pmf_from(field(c, "law"));
      law.row = r;
      for (const auto& v : field(j, "lambda")) law.lambda.push_back(v.get<double>());
      return law;
    }
    throw SchemaError("prediction has no counting law" + (row ? " for row " + std::to_string(*row) : std::string()));
  }
  if (schema == "rtlab/simulation/1") {
    law.row = field(j, "row").get<std::size_t>();
    if (row && law.row != *row) throw SchemaError("simulation file is for row " + std::to_string(law.row));
    if (!j.contains("counting")) throw SchemaError("simulation has no counting law (no t in its schedule row)");
    const auto counts = field(j.at("counting"), "counts").get<std::vector<std::uint64_t>>();
    law.dist = DiscreteDistribution::from_counts(counts);
    law.n = field(j.at("counting"), "n_trials").get<std::uint64_t>();
    const auto& cl = field(j, "clusters");
    if (!cl.empty()) {
      for (const auto& v : field(cl.back(), "lambda_hat")) law.lambda.push_back(v.is_null() ? 0.0 : v.get<double>());
    }
    return law;
  }
  throw SchemaError("unknown schema '" + schema + "'");
}

double sequence_tv(const std::vector<double>& a, const std::vector<double>& b) {
  DiscreteDistribution x, y;
  x.probs = a;
  y.probs = b;
  const double ta = 1.0 - std::accumulate(a.begin(), a.end(), 0.0);
  const double tb = 1.0 - std::accumulate(b.begin(), b.end(), 0.0);
  x.tail_mass = std::max(0.0, ta);
  y.tail_mass = std::max(0.0, tb);
  return total_variation(x, y);
}

}  // namespace

std::optional<int> period_of(const IntervalMap& map, double x, int max_period) {
  double y = x;
  for (int p = 1; p <= max_period; ++p) {
    y = apply(map, y);
    if (circle_distance(x, y) < 1e-9) return p;
  }
  return std::nullopt;
}

Prediction predict(const ExperimentConfig& cfg) {
  Prediction p;
  const auto& kind = cfg.system.kind;
  if (kind == "torus") {
    if (cfg.target.kind != "torus_strip") throw UnsupportedSystem("torus: prediction needs a torus_strip target");
    p = geometric_prediction(1.0 / cfg.system.a, cfg.predict.k_max, "torus strip: geometric with ratio 1/a");
  } else if (kind == "interval") {
    p = interval_prediction(cfg);
  } else if (kind == "cml") {
    p = cml_prediction_of(cfg);
  } else {
    p = regen_prediction(cfg);
  }
  for (std::size_t i = 0; i < cfg.schedule.size(); ++i) {
    const auto& row = cfg.schedule[i];
    if (!row.t) continue;
    if (!p.geometric_ratio) throw UnsupportedSystem("counting law needs a geometric cluster law");
    p.counting.push_back({i, *row.t, polya_aeppli_pmf_auto(*row.t * p.extremal_index, *p.geometric_ratio)});
  }
  return p;
}

Json to_json(const Prediction& p, const ExperimentConfig& cfg) {
  Json j;
  j["schema"] = "rtlab/prediction/1";
  j["name"] = cfg.name;
  j["model"] = p.model;
  j["extremal_index"] = p.extremal_index;
  j["geometric_ratio"] = p.geometric_ratio ? Json(*p.geometric_ratio) : Json(nullptr);
  j["alpha_hat"] = p.alpha_hat;
  j["alpha"] = p.alpha;
  j["lambda"] = p.lambda;
  j["quadrature_error"] = p.quadrature_error;
  j["warnings"] = p.warnings;
  j["counting"] = Json::array();
  for (const auto& c : p.counting) {
    Json e;
    e["row"] = c.row;
    e["t"] = c.t;
    e["law"] = to_json(c.law);
    j["counting"].push_back(e);
  }
  return j;
}

bool RowResult::partial() const {
  return std::any_of(clusters.begin(), clusters.end(), [](const ClusterStats& s) { return s.insufficient; });
}

RowResult simulate_row(const ExperimentConfig& cfg, std::size_t i) {
  const auto& row = cfg.schedule.at(i);
  const std::uint64_t seed = cfg.seed + i;
  RowResult r;
  r.row = i;
  r.size = row.size;
  if (cfg.regenerative()) {
    const auto m = static_cast<std::uint64_t>(row.size);
    const auto spec = cfg.make_regen();
    r.mu = RegenSampler(spec).tail(m);
    r.mu_exact = true;
    RegenRun run;
    run.Ks = row.K;
    run.n_streams = row.n_trials;
    run.seed = seed;
    run.workers = cfg.workers;
    if (!row.K.empty()) r.clusters = regen_cluster_stats(spec, m, run);
    return r;
  }
  const auto map = cfg.make_system();
  const auto target = cfg.make_target(row.size);
  const auto mu = measure(target, map, kMeasureSamples, seed, cfg.workers);
  r.mu = mu.mean;
  r.mu_se = mu.std_error;
  r.mu_exact = mu.exact;
  if (!(r.mu > 0.0)) throw std::runtime_error("target has zero estimated measure");
  if (!row.K.empty()) {
    ClusterOptions o;
    o.Ks = row.K;
    o.min_entries = row.min_entries;
    o.max_steps = row.max_steps;
    o.workers = cfg.workers;
    r.clusters = cluster_statistics(orbit_trace_source(map, target, row.orbit_length, seed), o);
  }
  if (row.t) r.counting = counting_distribution(map, target, *row.t, r.mu, row.n_trials, seed, cfg.workers);
  if (row.L) r.entry = entry_time_ratio(map, target, *row.L, r.mu, row.n_trials, seed, cfg.workers);
  return r;
}

Json to_json(const RowResult& r) {
  Json j;
  j["schema"] = "rtlab/simulation/1";
  j["row"] = r.row;
  j["size"] = r.size;
  j["mu"] = r.mu;
  j["mu_se"] = r.mu_se;
  j["mu_exact"] = r.mu_exact;
  j["partial"] = r.partial();
  j["clusters"] = Json::array();
  for (const auto& s : r.clusters) j["clusters"].push_back(to_json(s));
  if (r.counting) j["counting"] = to_json(*r.counting);
  if (r.entry) j["entry_time"] = to_json(*r.entry);
  return j;
}

Comparison compare(const Json& a, const Json& b, std::optional<std::size_t> row) {
  const bool a_sim = schema_of(a) == "rtlab/simulation/1";
  const bool b_sim = schema_of(b) == "rtlab/simulation/1";
  // Pin the row from whichever side is a simulation.
  if (!row && a_sim) row = field(a, "row").get<std::size_t>();
  if (!row && b_sim) row = field(b, "row").get<std::size_t>();
  const Law la = law_of(a, row);
  const Law lb = law_of(b, row);
  Comparison c;
  c.row = la.row;
  c.gof.tv_distance = total_variation(la.dist, lb.dist);
  c.gof.p_value = 1.0;
  if (a_sim != b_sim) {
    const Law& model = a_sim ? lb : la;
    const Law& data = a_sim ? la : lb;
    c.gof = chi_square_gof(data.dist, data.n, model.dist);
    c.has_chi_square = true;
  }
  if (!la.lambda.empty() && !lb.lambda.empty()) c.cluster_tv = sequence_tv(la.lambda, lb.lambda);
  return c;
}

Json to_json(const Comparison& c) {
  Json j = to_json(c.gof);
  j["schema"] = "rtlab/comparison/1";
  j["row"] = c.row;
  j["has_chi_square"] = c.has_chi_square;
  if (!c.has_chi_square) j["p_value"] = nullptr;
  j["cluster_tv"] = c.cluster_tv ? Json(*c.cluster_tv) : Json(nullptr);
  return j;
}

}  // namespace rtlab
