// rtlab: predict / simulate / compare return-time statistics from a YAML
// experiment description.
//
// Exit codes: 0 success, 1 statistical failure (compare p-value below the
// threshold, or a simulation that ran out of steps), 2 usage/config error.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "rtlab/pipeline.hpp"

namespace fs = std::filesystem;
using namespace rtlab;

namespace {

constexpr int kPass = 0;
constexpr int kStatFail = 1;
constexpr int kUsage = 2;

struct Options {
  std::string config;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::string out;
  double threshold = 0.01;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* workers_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* threshold_opt = nullptr;
  CLI::Option* config_opt = nullptr;
};

// Flags and environment (already merged by CLI11) win over the file.
ExperimentConfig resolve(const Options& o) {
  if (o.config.empty()) throw ConfigError("--config (or RTLAB_CONFIG) is required");
  auto cfg = ExperimentConfig::load(o.config);
  if (o.seed_opt->count() > 0) cfg.seed = o.seed;
  if (o.workers_opt->count() > 0) cfg.workers = o.workers;
  if (o.out_opt->count() > 0) cfg.outputs.dir = o.out;
  if (o.threshold_opt->count() > 0) cfg.threshold = o.threshold;
  cfg.validate();
  return cfg;
}

bool wants(const ExperimentConfig& cfg, const std::string& format) {
  return std::find(cfg.outputs.formats.begin(), cfg.outputs.formats.end(), format) != cfg.outputs.formats.end();
}

// Collects output files and writes them only once everything succeeded.
class OutputSet {
 public:
  void add(std::string name, std::string content) { files_.emplace_back(std::move(name), std::move(content)); }
  std::vector<std::string> names() const {
    std::vector<std::string> n;
    for (const auto& f : files_) n.push_back(f.first);
    return n;
  }
  void write(const std::string& dir) const {
    fs::create_directories(dir);
    for (const auto& [name, content] : files_) {
      std::ofstream out(fs::path(dir) / name, std::ios::binary);
      out << content;
      if (!out) throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
    }
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

std::string manifest(const std::string& command, const ExperimentConfig& cfg, const std::vector<std::string>& files,
                     const std::vector<std::size_t>& partial) {
  Json m;
  m["schema"] = "rtlab/manifest/1";
  m["command"] = command;
  m["config"] = cfg.to_yaml(false);
  m["files"] = files;
  m["partial_rows"] = partial;
  return m.dump(2) + "\n";
}

int cmd_predict(const Options& o) {
  const auto cfg = resolve(o);
  const auto p = predict(cfg);
  OutputSet out;
  if (wants(cfg, "json")) out.add("prediction.json", to_json(p, cfg).dump(2) + "\n");
  if (wants(cfg, "csv")) {
    std::ostringstream law;
    write_law_csv(law, p.alpha_hat, p.alpha, p.lambda);
    out.add("prediction_law.csv", law.str());
    for (const auto& c : p.counting) {
      std::ostringstream os;
      write_pmf_csv(os, c.law);
      out.add("prediction_counting_row" + std::to_string(c.row) + ".csv", os.str());
    }
  }
  out.add("manifest.json", manifest("predict", cfg, out.names(), {}));
  out.write(cfg.outputs.dir);

  std::cout << "model: " << p.model << "\nextremal index: " << format_double(p.extremal_index) << "\n l  alpha_hat  lambda\n";
  for (std::size_t l = 0; l < std::min<std::size_t>(p.alpha_hat.size(), 8); ++l) {
    std::printf("%2zu  %.6f   %s\n", l + 1, p.alpha_hat[l],
                l < p.lambda.size() ? format_double(p.lambda[l]).c_str() : "-");
  }
  for (const auto& w : p.warnings) std::cerr << "warning: " << w << "\n";
  return kPass;
}

int cmd_simulate(const Options& o) {
  const auto cfg = resolve(o);
  OutputSet out;
  std::vector<std::size_t> partial;
  for (std::size_t i = 0; i < cfg.schedule.size(); ++i) {
    const auto r = simulate_row(cfg, i);
    const std::string stem = "row" + std::to_string(i);
    if (wants(cfg, "json")) out.add(stem + ".json", to_json(r).dump(2) + "\n");
    if (wants(cfg, "csv")) {
      if (!r.clusters.empty()) {
        std::ostringstream os;
        write_cluster_csv(os, r.clusters);
        out.add(stem + "_clusters.csv", os.str());
      }
      if (r.counting) {
        std::ostringstream os;
        write_counting_csv(os, *r.counting);
        out.add(stem + "_counting.csv", os.str());
      }
    }
    if (r.partial()) partial.push_back(i);

    std::cout << "row " << i << ": size " << format_double(r.size) << ", mu " << format_double(r.mu) << "\n";
    for (const auto& s : r.clusters) {
      std::printf("  K=%-5llu entries=%-9llu EI=%.4f  alpha_hat_2=%.4f  lambda_hat_1..3=", static_cast<unsigned long long>(s.K),
                  static_cast<unsigned long long>(s.n_entries), s.extremal_index,
                  s.alpha_hat.size() > 1 ? s.alpha_hat[1] : 0.0);
      for (std::size_t l = 0; l < 3; ++l) std::printf(" %.4f", l < s.lambda_hat.size() ? s.lambda_hat[l] : 0.0);
      std::printf("%s\n", s.insufficient ? "  [insufficient]" : "");
    }
    if (r.counting) std::printf("  counting: N=%llu mean=%.4f\n", static_cast<unsigned long long>(r.counting->horizon), r.counting->mean);
    if (r.entry) std::printf("  entry-time ratio: %.4f +- %.4f\n", r.entry->ratio, r.entry->std_error);
  }
  out.add("manifest.json", manifest("simulate", cfg, out.names(), partial));
  out.write(cfg.outputs.dir);
  if (!partial.empty()) {
    std::cerr << "some rows ran out of steps before min_entries; see partial_rows in the manifest\n";
    return kStatFail;
  }
  return kPass;
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

int cmd_compare(const Options& o, const std::string& a, const std::string& b, std::optional<std::size_t> row) {
  double threshold = 0.01;
  if (!o.config.empty()) threshold = ExperimentConfig::load(o.config).threshold;
  if (o.threshold_opt->count() > 0) threshold = o.threshold;
  const auto c = compare(read_json(a), read_json(b), row);
  auto j = to_json(c);
  j["threshold"] = threshold;
  const bool pass = !c.has_chi_square || c.gof.p_value >= threshold;
  j["pass"] = pass;
  if (o.out_opt->count() > 0) {
    OutputSet out;
    out.add("compare.json", j.dump(2) + "\n");
    out.write(o.out);
  }
  std::printf("row %zu: TV = %.6f", c.row, c.gof.tv_distance);
  if (c.has_chi_square) std::printf(", chi2 = %.3f (dof %d), p = %.4g", c.gof.chi_square, c.gof.dof, c.gof.p_value);
  if (c.cluster_tv) std::printf(", cluster TV = %.6f", *c.cluster_tv);
  std::printf(" -> %s\n", pass ? "PASS" : "FAIL");
  return pass ? kPass : kStatFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Return-time statistics lab"};
  app.require_subcommand(1);
  Options o;
  o.config_opt = app.add_option("--config", o.config, "experiment YAML")->envname("RTLAB_CONFIG");
  o.seed_opt = app.add_option("--seed", o.seed, "master seed (overrides the file)")->envname("RTLAB_SEED");
  o.workers_opt = app.add_option("--workers", o.workers, "worker threads")->envname("RTLAB_WORKERS")
                      ->check(CLI::Range(1u, 1024u));
  o.out_opt = app.add_option("--out", o.out, "output directory")->envname("RTLAB_OUT");
  o.threshold_opt = app.add_option("--threshold", o.threshold, "compare: minimum p-value")
                        ->envname("RTLAB_THRESHOLD")->check(CLI::Range(0.0, 1.0));

  auto* predict_cmd = app.add_subcommand("predict", "analytic cluster law and counting law")->fallthrough();
  auto* simulate_cmd = app.add_subcommand("simulate", "run every schedule row")->fallthrough();
  auto* compare_cmd = app.add_subcommand("compare", "goodness of fit between two result files")->fallthrough();
  std::string file_a, file_b;
  std::size_t row = 0;
  compare_cmd->add_option("first", file_a, "prediction or simulation JSON")->required();
  compare_cmd->add_option("second", file_b, "prediction or simulation JSON")->required();
  auto* row_opt = compare_cmd->add_option("--row", row, "schedule row to compare");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }
  try {
    if (predict_cmd->parsed()) return cmd_predict(o);
    if (simulate_cmd->parsed()) return cmd_simulate(o);
    return cmd_compare(o, file_a, file_b, row_opt->count() > 0 ? std::optional<std::size_t>(row) : std::nullopt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
  } catch (const UnsupportedSystem& e) {
    std::cerr << "unsupported: " << e.what() << "\n";
  } catch (const SchemaError& e) {
    std::cerr << "cannot compare: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return kUsage;
}
