#include "softlabel/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "softlabel/bounds.hpp"
#include "softlabel/format.hpp"
#include "softlabel/mixing.hpp"
#include "softlabel/rng.hpp"

namespace softlabel {

using nlohmann::json;

MethodSpec reserved_method(const std::string& name) {
  if (name == "hard") {
    // lambda 1 erases any source; uniform_other keeps the builder total
    return {name, SupervisionKind::kUniformOther, LambdaPolicy::constant(1.0),
            false};
  }
  if (name == "soft") {
    return {name, SupervisionKind::kTrueRestricted, LambdaPolicy::optimal(),
            false};
  }
  if (name == "ls") {
    return {name, SupervisionKind::kUniformOther, LambdaPolicy::constant(0.9),
            false};
  }
  if (name == "t1oc") {
    return {name, SupervisionKind::kT1OC, LambdaPolicy::constant(0.9), false};
  }
  if (name == "t2oc") {
    return {name, SupervisionKind::kT2OC, LambdaPolicy::constant(0.9), false};
  }
  if (name == "sd") {
    // teacher outputs become the source; lambda 0 hands them through
    return {name, SupervisionKind::kCustom, LambdaPolicy::constant(0.0), true};
  }
  throw ConfigError("unknown reserved method \"" + name +
                        "\" (hard, soft, ls, sd, t1oc, t2oc)",
                    "methods");
}

void validate(const ExperimentConfig& config) {
  validate(config.synth);
  validate(config.train);
  if (config.methods.empty()) {
    throw ConfigError("methods list is empty", "methods");
  }
  for (std::size_t i = 0; i < config.methods.size(); ++i) {
    const MethodSpec& m = config.methods[i];
    if (m.name.empty()) {
      throw ConfigError("method " + std::to_string(i) + " has no name",
                        "methods");
    }
    for (std::size_t j = i + 1; j < config.methods.size(); ++j) {
      if (config.methods[j].name == m.name) {
        throw ConfigError("duplicate method name \"" + m.name + "\"",
                          "methods");
      }
    }
    if (m.kind == SupervisionKind::kCustom && !m.self_distill) {
      throw ConfigError("method \"" + m.name +
                            "\" asks for custom supervision, which only the "
                            "reserved sd method can supply",
                        "methods");
    }
  }
  if (config.n_seeds < 1) {
    throw ConfigError("n_seeds must be >= 1", "n_seeds");
  }
  if (config.train_sizes.empty()) {
    throw ConfigError("train_sizes is empty", "train_sizes");
  }
  for (std::size_t i = 0; i < config.train_sizes.size(); ++i) {
    if (config.train_sizes[i] < 1) {
      throw ConfigError("train_sizes entries must be positive", "train_sizes");
    }
    if (i > 0 && config.train_sizes[i] <= config.train_sizes[i - 1]) {
      throw ConfigError("train_sizes must be strictly ascending",
                        "train_sizes");
    }
  }
  if (config.arch == Architecture::kMlp &&
      (config.hidden_width < 1 || config.hidden_width > kMaxHiddenWidth)) {
    throw ConfigError("hidden_width must lie in [1, " +
                          std::to_string(kMaxHiddenWidth) + "]",
                      "hidden_width");
  }
}

namespace {

void reject_unknown_keys(const json& j, const std::string& section,
                         std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError("unknown key \"" + item.key() + "\" in " + section,
                        section + "." + item.key());
    }
  }
}

double get_number(const json& j, const char* key, double fallback,
                  const std::string& section) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) {
    throw ConfigError("field must be a number", section + "." + key);
  }
  return j[key].get<double>();
}

int get_int(const json& j, const char* key, int fallback,
            const std::string& section) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer()) {
    throw ConfigError("field must be an integer", section + "." + key);
  }
  return j[key].get<int>();
}

}  // namespace

SyntheticConfig parse_synthetic_config(const json& j) {
  if (!j.is_object()) {
    throw ConfigError("synth section must be a JSON object", "synth");
  }
  reject_unknown_keys(j, "synth",
                      {"num_classes", "feature_dim", "n_train", "n_test",
                       "seed", "class_separation", "temperature"});
  SyntheticConfig synth;
  synth.num_classes = get_int(j, "num_classes", synth.num_classes, "synth");
  synth.feature_dim = get_int(j, "feature_dim", synth.feature_dim, "synth");
  synth.n_train = get_int(j, "n_train", synth.n_train, "synth");
  synth.n_test = get_int(j, "n_test", synth.n_test, "synth");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer()) {
      throw ConfigError("field must be an integer", "synth.seed");
    }
    synth.seed = j["seed"].get<std::uint64_t>();
  }
  synth.class_separation =
      get_number(j, "class_separation", synth.class_separation, "synth");
  synth.temperature = get_number(j, "temperature", synth.temperature, "synth");
  validate(synth);
  return synth;
}

ExperimentConfig parse_experiment_config(const json& j) {
  if (!j.is_object()) {
    throw ConfigError("experiment config must be a JSON object", "config");
  }
  reject_unknown_keys(j, "config",
                      {"synth", "methods", "train", "model", "n_seeds",
                       "train_sizes"});

  ExperimentConfig config;

  if (j.contains("synth")) {
    config.synth = parse_synthetic_config(j["synth"]);
  }

  if (j.contains("methods")) {
    if (!j["methods"].is_array()) {
      throw ConfigError("methods must be an array", "methods");
    }
    for (const json& entry : j["methods"]) {
      if (entry.is_string()) {
        config.methods.push_back(reserved_method(entry.get<std::string>()));
      } else if (entry.is_object()) {
        reject_unknown_keys(entry, "methods", {"name", "kind", "lambda"});
        if (!entry.contains("name") || !entry.contains("kind") ||
            !entry.contains("lambda")) {
          throw ConfigError("method objects need name, kind, and lambda",
                            "methods");
        }
        MethodSpec m;
        m.name = entry["name"].get<std::string>();
        m.kind = parse_supervision_kind(entry["kind"].get<std::string>());
        m.policy = parse_lambda_policy(entry["lambda"].get<std::string>());
        config.methods.push_back(std::move(m));
      } else {
        throw ConfigError(
            "methods entries must be reserved-name strings or objects",
            "methods");
      }
    }
  } else {
    for (const char* name : {"hard", "ls", "sd", "t1oc", "t2oc", "soft"}) {
      config.methods.push_back(reserved_method(name));
    }
  }

  if (j.contains("train")) {
    const json& t = j["train"];
    reject_unknown_keys(t, "train",
                        {"learning_rate", "epochs", "batch_size",
                         "weight_decay", "seed"});
    config.train.learning_rate =
        get_number(t, "learning_rate", config.train.learning_rate, "train");
    config.train.epochs = get_int(t, "epochs", config.train.epochs, "train");
    config.train.batch_size =
        get_int(t, "batch_size", config.train.batch_size, "train");
    config.train.weight_decay =
        get_number(t, "weight_decay", config.train.weight_decay, "train");
    if (t.contains("seed")) {
      if (!t["seed"].is_number_integer()) {
        throw ConfigError("field must be an integer", "train.seed");
      }
      config.train.seed = t["seed"].get<std::uint64_t>();
    }
  }

  if (j.contains("model")) {
    const json& m = j["model"];
    reject_unknown_keys(m, "model", {"architecture", "hidden_width"});
    if (m.contains("architecture")) {
      config.arch = parse_architecture(m["architecture"].get<std::string>());
    }
    config.hidden_width =
        get_int(m, "hidden_width", config.hidden_width, "model");
  }

  config.n_seeds = get_int(j, "n_seeds", config.n_seeds, "config");
  if (j.contains("train_sizes")) {
    if (!j["train_sizes"].is_array()) {
      throw ConfigError("train_sizes must be an array", "train_sizes");
    }
    config.train_sizes.clear();
    for (const json& v : j["train_sizes"]) {
      if (!v.is_number_integer()) {
        throw ConfigError("train_sizes entries must be integers",
                          "train_sizes");
      }
      config.train_sizes.push_back(v.get<int>());
    }
  } else {
    config.train_sizes = {200, 500, 1000, 2000};
  }

  validate(config);
  return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file " + path, "config");
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what(),
                      "config");
  }
  return parse_experiment_config(j);
}

int thread_budget() {
  const char* env = std::getenv("SOFTLABEL_THREADS");
  if (env != nullptr) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 1024) {
      return static_cast<int>(v);
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {

// seed tags for the experiment stages
constexpr std::uint64_t kDataTag = 0xDA7A;
constexpr std::uint64_t kTeacherTag = 0x7EAC;
constexpr std::uint64_t kStudentTag = 0x57D0;

struct Cell {
  std::size_t method = 0;
  std::size_t size_idx = 0;
  int rep = 0;
};

ResultRow run_cell(const ExperimentConfig& config, const Cell& cell,
                   const std::vector<SupervisedInstance>& test_set,
                   bool include_timing) {
  const MethodSpec& method = config.methods[cell.method];
  const int size = config.train_sizes[cell.size_idx];

  ResultRow row;
  row.method = method.name;
  row.train_size = size;
  row.seed = cell.rep;

  const auto started = std::chrono::steady_clock::now();
  try {
    SyntheticConfig data_cfg = config.synth;
    data_cfg.n_train = size;
    data_cfg.n_test = 0;
    data_cfg.seed = derive_seed(derive_seed(config.synth.seed, kDataTag),
                                static_cast<std::uint64_t>(cell.rep));
    const Dataset data = generate(data_cfg);

    // Training randomness depends on (size, rep) but not on the method, so
    // methods are compared on common draws and reserved aliases reproduce
    // their explicit spellings bitwise.
    TrainConfig cell_train = config.train;
    cell_train.seed = derive_seed(
        derive_seed(derive_seed(config.train.seed, kStudentTag),
                    static_cast<std::uint64_t>(size)),
        static_cast<std::uint64_t>(cell.rep));

    SoftDatasetResult soft;
    if (method.self_distill) {
      TrainConfig teacher_train = config.train;
      teacher_train.seed = derive_seed(
          derive_seed(derive_seed(config.train.seed, kTeacherTag),
                      static_cast<std::uint64_t>(size)),
          static_cast<std::uint64_t>(cell.rep));
      const SoftDatasetResult hard_ds =
          build_soft_dataset(data.train, SupervisionKind::kUniformOther,
                             LambdaPolicy::constant(1.0));
      const TrainResult teacher = train(hard_ds.instances, config.arch,
                                        teacher_train, config.hidden_width);
      const std::vector<LabelDistribution> outputs =
          model_outputs(teacher.model, data.train);
      soft = build_soft_dataset(data.train, SupervisionKind::kCustom,
                                method.policy, &outputs);
    } else {
      soft = build_soft_dataset(data.train, method.kind, method.policy);
    }

    const TrainResult student =
        train(soft.instances, config.arch, cell_train, config.hidden_width);
    const EvalReport eval = evaluate(student.model, test_set);
    const MeanKlGap gap = mean_kl_gap(soft.instances);

    row.accuracy = eval.accuracy;
    row.kl_gap_exact = gap.exact;
    row.kl_gap_smoothed = gap.smoothed;
  } catch (const std::exception& e) {
    row.ok = false;
    row.error = e.what();
  }
  if (include_timing) {
    row.wall_time_ms =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - started)
            .count();
  }
  return row;
}

std::string render_rows_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  out << "method,train_size,seed,accuracy,kl_gap_exact,kl_gap_smoothed,"
         "wall_time_ms\n";
  for (const ResultRow& row : rows) {
    out << row.method << ',' << row.train_size << ',' << row.seed << ',';
    if (row.ok) {
      out << format_number(row.accuracy) << ','
          << format_number(row.kl_gap_exact) << ','
          << format_number(row.kl_gap_smoothed);
    } else {
      out << "error,error,error";
    }
    out << ',' << format_number(row.wall_time_ms) << "\n";
  }
  return out.str();
}

std::string render_summary_csv(const ExperimentConfig& config,
                               const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  out << "method,train_size,n,accuracy_mean,accuracy_2std,accuracy_2se,"
         "kl_gap_exact_mean,kl_gap_smoothed_mean\n";
  for (const MethodSpec& method : config.methods) {
    for (int size : config.train_sizes) {
      std::vector<const ResultRow*> cell;
      for (const ResultRow& row : rows) {
        if (row.ok && row.method == method.name && row.train_size == size) {
          cell.push_back(&row);
        }
      }
      out << method.name << ',' << size << ',' << cell.size() << ',';
      if (cell.empty()) {
        out << "nan,nan,nan,nan,nan\n";
        continue;
      }
      const double n = static_cast<double>(cell.size());
      double acc_mean = 0.0, kl_mean = 0.0, kls_mean = 0.0;
      for (const ResultRow* row : cell) {
        acc_mean += row->accuracy;
        kl_mean += row->kl_gap_exact;
        kls_mean += row->kl_gap_smoothed;
      }
      acc_mean /= n;
      kl_mean /= n;
      kls_mean /= n;
      double twice_std = std::nan("");
      double twice_se = std::nan("");
      if (cell.size() > 1) {
        double ss = 0.0;
        for (const ResultRow* row : cell) {
          const double d = row->accuracy - acc_mean;
          ss += d * d;
        }
        const double sd = std::sqrt(ss / (n - 1.0));  // sample convention
        twice_std = 2.0 * sd;
        twice_se = 2.0 * sd / std::sqrt(n);
      }
      out << format_number(acc_mean) << ',' << format_number(twice_std) << ','
          << format_number(twice_se) << ',' << format_number(kl_mean) << ','
          << format_number(kls_mean) << "\n";
    }
  }
  return out.str();
}

}  // namespace

ExperimentOutput run_experiment(const ExperimentConfig& config, int max_threads,
                                bool include_timing) {
  validate(config);
  if (max_threads < 1) max_threads = 1;

  SyntheticConfig test_cfg = config.synth;
  test_cfg.n_train = 0;
  const Dataset test_data = generate(test_cfg);
  if (test_data.test.empty()) {
    throw ConfigError("experiment needs n_test >= 1", "synth.n_test");
  }

  std::vector<Cell> cells;
  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    for (std::size_t s = 0; s < config.train_sizes.size(); ++s) {
      for (int rep = 0; rep < config.n_seeds; ++rep) {
        cells.push_back({m, s, rep});
      }
    }
  }

  std::vector<ResultRow> rows(cells.size());
  std::atomic<std::size_t> next{0};
  const int workers =
      static_cast<int>(std::min<std::size_t>(cells.size(),
                                             static_cast<std::size_t>(max_threads)));
  const auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      rows[i] = run_cell(config, cells[i], test_data.test, include_timing);
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  // cells were generated in (method, size, rep) order already; keep that
  // order in the output regardless of completion order
  ExperimentOutput output;
  output.rows = std::move(rows);
  output.csv = render_rows_csv(output.rows);
  output.summary_csv = render_summary_csv(config, output.rows);
  return output;
}

std::string decompose_csv(const std::vector<SupervisedInstance>& instances) {
  if (instances.empty()) {
    throw DataError("decomposition over an empty dataset");
  }
  std::ostringstream out;
  out << "index,kl_total,bias,variance,lambda_star,lambda_used\n";

  double kl_sum = 0.0, bias_sum = 0.0, var_sum = 0.0;
  double kl_sm_sum = 0.0, bias_sm_sum = 0.0, var_sm_sum = 0.0;
  bool kl_inf = false, bias_inf = false, var_inf = false;
  double star_sum = 0.0, used_sum = 0.0;

  for (std::size_t i = 0; i < instances.size(); ++i) {
    const SupervisedInstance& inst = instances[i];
    if (!inst.p_a || !inst.lambda) {
      throw DataError("instance " + std::to_string(i) +
                          " lacks supervision (p_a, lambda)",
                      static_cast<std::ptrdiff_t>(i));
    }
    DecompositionReport report;
    try {
      report = decompose(inst.p_star, inst.y, *inst.p_a, *inst.lambda);
    } catch (const Error& e) {
      throw DataError("instance " + std::to_string(i) + ": " + e.what(),
                      static_cast<std::ptrdiff_t>(i));
    }
    out << i << ',' << format_number(report.kl_total) << ','
        << format_number(report.bias) << ','
        << format_number(report.variance) << ','
        << format_number(report.lambda_star) << ','
        << format_number(report.lambda_used) << "\n";

    const int k = inst.y.class_index;
    const LabelDistribution p_lambda =
        inst.p_lambda ? *inst.p_lambda
                      : affine_combine(inst.y, *inst.p_a, *inst.lambda);

    if (std::isinf(report.kl_total)) kl_inf = true; else kl_sum += report.kl_total;
    if (std::isinf(report.bias)) bias_inf = true; else bias_sum += report.bias;
    if (std::isinf(report.variance)) var_inf = true; else var_sum += report.variance;

    // smoothed stand-ins, only consulted when a column goes infinite
    kl_sm_sum += kl_smoothed(inst.p_star, p_lambda);
    const double off_star = inst.p_star.mass_excluding(k);
    if (off_star <= 0.0) {
      bias_sm_sum += 0.0;
    } else {
      const LabelDistribution star_r = restrict_exclude(inst.p_star, k);
      const LabelDistribution p_a_r =
          inst.p_a->mass_excluding(k) > 0.0
              ? restrict_exclude(*inst.p_a, k)
              : uniform_other(inst.y, inst.p_star.num_classes());
      bias_sm_sum += off_star * kl_smoothed(star_r, p_a_r);
    }
    var_sm_sum += binary_kl(
        inst.p_star[k],
        (1.0 - kKlSmoothEps) * p_lambda[k] + kKlSmoothEps * 0.5);

    star_sum += report.lambda_star;
    used_sum += report.lambda_used;
  }

  const double n = static_cast<double>(instances.size());
  out << "mean," << format_number((kl_inf ? kl_sm_sum : kl_sum) / n) << ','
      << format_number((bias_inf ? bias_sm_sum : bias_sum) / n) << ','
      << format_number((var_inf ? var_sm_sum : var_sum) / n) << ','
      << format_number(star_sum / n) << ',' << format_number(used_sum / n)
      << "\n";
  return out.str();
}

}  // namespace softlabel
