#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "softlabel/bounds.hpp"
#include "softlabel/dataset_io.hpp"
#include "softlabel/experiment.hpp"
#include "softlabel/format.hpp"
#include "softlabel/supervision.hpp"
#include "softlabel/synth.hpp"

namespace {

using nlohmann::json;

// exit codes: 0 ok, 2 config, 3 data/other, 4 training divergence
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitDiverged = 4;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw softlabel::ConfigError("cannot open config file " + path, "config");
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw softlabel::ConfigError(
        "config parse error in " + path + ": " + e.what(), "config");
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw softlabel::DataError("cannot open " + path + " for writing");
  }
  out << text;
  if (!out) {
    throw softlabel::DataError("write failed for " + path);
  }
}

softlabel::SyntheticConfig synth_config_from(const json& j) {
  // accept either the bare synth fields or a {"synth": {...}} wrapper so the
  // experiment config file can be reused directly
  if (j.is_object() && j.contains("synth")) {
    return softlabel::parse_synthetic_config(j["synth"]);
  }
  return softlabel::parse_synthetic_config(j);
}

int cmd_synth(const std::string& config_path, const std::string& out_prefix,
              const std::optional<std::uint64_t>& seed_override) {
  softlabel::SyntheticConfig config = synth_config_from(load_json(config_path));
  if (seed_override) config.seed = *seed_override;

  const softlabel::Dataset data = softlabel::generate(config);

  softlabel::DatasetMeta meta;
  meta.num_classes = config.num_classes;
  meta.feature_dim = config.feature_dim;
  meta.seed = config.seed;
  meta.class_separation = config.class_separation;
  meta.temperature = config.temperature;

  meta.split = "train";
  softlabel::write_jsonl(out_prefix + ".train.jsonl", meta, data.train);
  meta.split = "test";
  softlabel::write_jsonl(out_prefix + ".test.jsonl", meta, data.test);

  std::cout << "k=" << config.num_classes << " d=" << config.feature_dim
            << " seed=" << config.seed << " separation="
            << softlabel::format_number(config.class_separation)
            << " temperature="
            << softlabel::format_number(config.temperature) << " train="
            << data.train.size() << " test=" << data.test.size() << "\n";
  if (!data.train.empty()) {
    const softlabel::NoiseReport noise =
        softlabel::label_noise_rate(data.train);
    std::cout << "train label noise rate: "
              << softlabel::format_number(noise.rate)
              << "\nmax-confidence histogram (20 bins):";
    for (int count : noise.histogram) std::cout << ' ' << count;
    std::cout << "\n";
  }
  return 0;
}

int cmd_decompose(const std::string& data_path, const std::string& kind_text,
                  const std::string& lambda_text, const std::string& out_csv) {
  const softlabel::SupervisionKind kind =
      softlabel::parse_supervision_kind(kind_text);
  const softlabel::LambdaPolicy policy =
      softlabel::parse_lambda_policy(lambda_text);

  const softlabel::LoadedDataset loaded = softlabel::read_jsonl(data_path);

  std::vector<softlabel::LabelDistribution> sources;
  const std::vector<softlabel::LabelDistribution>* sources_ptr = nullptr;
  if (kind == softlabel::SupervisionKind::kCustom) {
    sources.reserve(loaded.instances.size());
    for (std::size_t i = 0; i < loaded.instances.size(); ++i) {
      if (!loaded.instances[i].p_a) {
        throw softlabel::DataError(
            "custom decomposition needs p_a on every instance; missing at "
            "index " + std::to_string(i),
            static_cast<std::ptrdiff_t>(i));
      }
      sources.push_back(*loaded.instances[i].p_a);
    }
    sources_ptr = &sources;
  }

  const softlabel::SoftDatasetResult soft = softlabel::build_soft_dataset(
      loaded.instances, kind, policy, sources_ptr);
  if (soft.clamp_warnings > 0) {
    std::cerr << "warning: lambda clamped into the feasible interval on "
              << soft.clamp_warnings << " instance(s)\n";
  }

  write_text(out_csv, softlabel::decompose_csv(soft.instances));
  std::cout << "wrote " << soft.instances.size() << " rows to " << out_csv
            << "\n";
  return 0;
}

int cmd_bound(double n_min, double n_max, int points, double m_l, double l_l,
              double delta, double d_quality, double r_best, double coef,
              const std::string& out_csv) {
  if (!(n_min >= 1.0) || !(n_max >= n_min)) {
    throw softlabel::ConfigError("need 1 <= n-min <= n-max", "n");
  }
  if (points < 2) {
    throw softlabel::ConfigError("need at least 2 sweep points", "points");
  }

  softlabel::BoundInputs base;
  base.m_l = m_l;
  base.l_l = l_l;
  base.delta = delta;
  base.d_quality = d_quality;
  base.r_best = r_best;
  base.n = n_min;
  softlabel::validate(base);

  // geometric grid, endpoints included
  std::vector<double> sizes;
  sizes.reserve(static_cast<std::size_t>(points));
  const double ratio = std::log(n_max / n_min);
  for (int i = 0; i < points; ++i) {
    sizes.push_back(n_min * std::exp(ratio * i / (points - 1)));
  }

  const std::vector<softlabel::RateRow> rows =
      softlabel::rate_crossover(base, sizes, coef);
  write_text(out_csv, softlabel::rate_table_csv(rows));
  std::cout << "wrote " << rows.size() << " rows to " << out_csv << "\n";
  return 0;
}

int cmd_experiment(const std::string& config_path, const std::string& out_csv,
                   const std::optional<std::uint64_t>& seed_override,
                   int threads_flag, bool no_timing) {
  softlabel::ExperimentConfig config =
      softlabel::load_experiment_config(config_path);
  if (seed_override) {
    config.synth.seed = *seed_override;
    config.train.seed = *seed_override;
  }
  int threads = softlabel::thread_budget();
  if (threads_flag > 0) threads = std::min(threads, threads_flag);

  const softlabel::ExperimentOutput output =
      softlabel::run_experiment(config, threads, !no_timing);
  write_text(out_csv, output.csv);
  write_text(out_csv + ".summary.csv", output.summary_csv);

  std::size_t failed = 0;
  for (const softlabel::ResultRow& row : output.rows) {
    if (!row.ok) ++failed;
  }
  std::cout << "wrote " << output.rows.size() << " rows to " << out_csv
            << " (summary: " << out_csv << ".summary.csv)\n";
  if (failed > 0) {
    std::cerr << failed << " cell(s) failed; see error rows\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"soft-label construction, decomposition, and experiment tool"};
  app.require_subcommand(1);

  std::string config_path, out_path, data_path;
  std::string kind_text = "t2oc", lambda_text = "const:0.9";
  std::optional<std::uint64_t> seed_override;
  bool no_timing = false;
  int threads_flag = 0;

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--config", config_path, "JSON config")->required();
  synth->add_option("--out", out_path,
                    "output prefix (writes <out>.train.jsonl and "
                    "<out>.test.jsonl)")
      ->required();
  synth->add_option("--seed", seed_override, "override the config seed");

  auto* decompose =
      app.add_subcommand("decompose", "per-instance divergence split");
  decompose->add_option("--data", data_path, "input JSONL dataset")
      ->required();
  decompose->add_option("--kind", kind_text,
                        "supervision source: t1oc, t2oc, uniform, "
                        "true-restricted, custom");
  decompose->add_option("--lambda", lambda_text,
                        "mixing policy: optimal or const:<number>");
  decompose->add_option("--out", out_path, "output CSV")->required();

  double n_min = 1e3, n_max = 1e7, m_l = 1.0, l_l = 1.0, delta = 0.05;
  double d_quality = 0.01, r_best = 0.0, coef = 1.0;
  int points = 41;
  auto* bound = app.add_subcommand("bound", "risk-bound sweep over n");
  bound->add_option("--n-min", n_min, "smallest sample count");
  bound->add_option("--n-max", n_max, "largest sample count");
  bound->add_option("--points", points, "sweep points (geometric grid)");
  bound->add_option("--m", m_l, "loss bound M_l");
  bound->add_option("--l", l_l, "loss Lipschitz constant L_l");
  bound->add_option("--delta", delta, "confidence level");
  bound->add_option("--d", d_quality, "mean KL gap D");
  bound->add_option("--r-best", r_best, "best-in-class risk");
  bound->add_option("--coef", coef, "rademacher = coef/sqrt(n)");
  bound->add_option("--out", out_path, "output CSV")->required();

  auto* experiment =
      app.add_subcommand("experiment", "method-comparison matrix");
  experiment->add_option("--config", config_path, "JSON config")->required();
  experiment->add_option("--out", out_path, "output CSV")->required();
  experiment->add_option("--seed", seed_override,
                         "override both synth and train seeds");
  experiment->add_option("--threads", threads_flag,
                         "cap the worker pool (default: SOFTLABEL_THREADS "
                         "or hardware)");
  experiment->add_flag("--no-timing", no_timing,
                       "write 0 in wall_time_ms for byte-stable reruns");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help/--version exit 0; any usage mistake is a config error.
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (synth->parsed()) {
      return cmd_synth(config_path, out_path, seed_override);
    }
    if (decompose->parsed()) {
      return cmd_decompose(data_path, kind_text, lambda_text, out_path);
    }
    if (bound->parsed()) {
      return cmd_bound(n_min, n_max, points, m_l, l_l, delta, d_quality,
                       r_best, coef, out_path);
    }
    if (experiment->parsed()) {
      return cmd_experiment(config_path, out_path, seed_override,
                            threads_flag, no_timing);
    }
  } catch (const softlabel::ConfigError& e) {
    std::cerr << "config error";
    if (!e.field().empty()) std::cerr << " (" << e.field() << ")";
    std::cerr << ": " << e.what() << "\n";
    return kExitConfig;
  } catch (const softlabel::TrainingDivergedError& e) {
    std::cerr << "training diverged: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
