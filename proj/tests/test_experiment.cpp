#include "softlabel/experiment.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "softlabel/supervision.hpp"

using namespace softlabel;
using nlohmann::json;

namespace {

// small but non-trivial: 3 classes in 4 dimensions, a couple of repetitions
ExperimentConfig tiny_config() {
  ExperimentConfig config;
  config.synth.num_classes = 3;
  config.synth.feature_dim = 4;
  config.synth.n_test = 300;
  config.synth.seed = 7;
  config.methods = {reserved_method("hard"), reserved_method("ls")};
  config.train.epochs = 4;
  config.train.seed = 3;
  config.n_seeds = 2;
  config.train_sizes = {40, 80};
  return config;
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) {
    if (c == '\n') ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("reserved methods spell out their constructions") {
  const MethodSpec hard = reserved_method("hard");
  CHECK(hard.kind == SupervisionKind::kUniformOther);
  CHECK(hard.policy.tag == LambdaPolicy::Tag::kConstant);
  CHECK(hard.policy.value == 1.0);
  CHECK_FALSE(hard.self_distill);

  const MethodSpec soft = reserved_method("soft");
  CHECK(soft.kind == SupervisionKind::kTrueRestricted);
  CHECK(soft.policy.tag == LambdaPolicy::Tag::kOptimal);

  const MethodSpec ls = reserved_method("ls");
  CHECK(ls.kind == SupervisionKind::kUniformOther);
  CHECK(ls.policy.value == 0.9);

  const MethodSpec sd = reserved_method("sd");
  CHECK(sd.kind == SupervisionKind::kCustom);
  CHECK(sd.policy.value == 0.0);
  CHECK(sd.self_distill);

  CHECK(reserved_method("t1oc").kind == SupervisionKind::kT1OC);
  CHECK(reserved_method("t2oc").kind == SupervisionKind::kT2OC);
  CHECK_THROWS_AS(reserved_method("distill"), ConfigError);
}

TEST_CASE("config parsing applies defaults") {
  const ExperimentConfig config = parse_experiment_config(json::object());
  CHECK(config.methods.size() == 6);
  CHECK(config.methods[0].name == "hard");
  CHECK(config.methods[5].name == "soft");
  CHECK(config.train_sizes == std::vector<int>({200, 500, 1000, 2000}));
  CHECK(config.n_seeds == 5);
  CHECK(config.arch == Architecture::kLinear);
  CHECK(config.synth.num_classes == 6);
}

TEST_CASE("config parsing rejects unknown keys and bad types") {
  try {
    parse_experiment_config(json::parse(R"({"synthh": {}})"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "config.synthh");
  }

  try {
    parse_experiment_config(json::parse(R"({"n_seeds": "five"})"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "config.n_seeds");
  }

  try {
    parse_experiment_config(
        json::parse(R"({"synth": {"class_separation": "wide"}})"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "synth.class_separation");
  }

  CHECK_THROWS_AS(
      parse_experiment_config(json::parse(R"({"methods": ["hard", "hard"]})")),
      ConfigError);
  CHECK_THROWS_AS(
      parse_experiment_config(json::parse(R"({"train_sizes": [500, 200]})")),
      ConfigError);
  CHECK_THROWS_AS(
      parse_experiment_config(json::parse(R"({"train_sizes": [0]})")),
      ConfigError);
  // custom supervision is reserved for the self-distillation pipeline
  CHECK_THROWS_AS(
      parse_experiment_config(json::parse(
          R"({"methods": [{"name":"x","kind":"custom","lambda":"const:0.0"}]})")),
      ConfigError);
  CHECK_THROWS_AS(
      parse_experiment_config(json::parse(R"({"methods": [7]})")),
      ConfigError);
  CHECK_THROWS_AS(
      parse_experiment_config(json::parse(R"({"n_seeds": 0})")),
      ConfigError);
}

TEST_CASE("experiment emits one row per cell in stable order") {
  const ExperimentConfig config = tiny_config();
  const ExperimentOutput out = run_experiment(config, 2, false);

  REQUIRE(out.rows.size() == 2 * 2 * 2);  // methods x sizes x reps
  std::size_t i = 0;
  for (const char* method : {"hard", "ls"}) {
    for (int size : {40, 80}) {
      for (int rep = 0; rep < 2; ++rep) {
        CHECK(out.rows[i].method == method);
        CHECK(out.rows[i].train_size == size);
        CHECK(out.rows[i].seed == rep);
        CHECK(out.rows[i].ok);
        ++i;
      }
    }
  }

  std::istringstream in(out.csv);
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "method,train_size,seed,accuracy,kl_gap_exact,kl_gap_smoothed,"
        "wall_time_ms");
  CHECK(count_lines(out.csv) == 9);  // header + 8 rows

  std::istringstream sin(out.summary_csv);
  std::getline(sin, header);
  CHECK(header ==
        "method,train_size,n,accuracy_mean,accuracy_2std,accuracy_2se,"
        "kl_gap_exact_mean,kl_gap_smoothed_mean");
  CHECK(count_lines(out.summary_csv) == 5);  // header + 4 summary cells

  // timing suppressed: the last column is exactly 0
  std::string line;
  std::istringstream body(out.csv);
  std::getline(body, line);
  while (std::getline(body, line)) {
    CHECK(line.substr(line.size() - 2) == ",0");
  }
}

TEST_CASE("hard labels produce zero gap and ls a positive one") {
  const ExperimentConfig config = tiny_config();
  const ExperimentOutput out = run_experiment(config, 2, false);
  for (const ResultRow& row : out.rows) {
    if (row.method == "hard") {
      // p_lambda is the dirac at the drawn label; the gap is the mean
      // kl(p_star, dirac), infinite whenever any p_star keeps off-class mass
      CHECK(std::isinf(row.kl_gap_exact));
      CHECK(std::isfinite(row.kl_gap_smoothed));
    } else {
      CHECK(std::isfinite(row.kl_gap_exact));
      CHECK(row.kl_gap_exact > 0.0);
    }
    CHECK(row.accuracy > 1.0 / 3.0);  // both beat chance even at 4 epochs
  }
}

TEST_CASE("output bytes are independent of thread count and rerun") {
  const ExperimentConfig config = tiny_config();
  const ExperimentOutput serial = run_experiment(config, 1, false);
  const ExperimentOutput pooled = run_experiment(config, 4, false);
  const ExperimentOutput again = run_experiment(config, 4, false);
  CHECK(serial.csv == pooled.csv);
  CHECK(pooled.csv == again.csv);
  CHECK(serial.summary_csv == pooled.summary_csv);
}

TEST_CASE("reserved alias matches its explicit spelling bitwise") {
  const json base = json::parse(R"({
    "synth": {"num_classes": 3, "feature_dim": 4, "n_test": 200, "seed": 11},
    "train": {"epochs": 3, "seed": 5},
    "n_seeds": 2,
    "train_sizes": [50]
  })");

  json with_alias = base;
  with_alias["methods"] = json::array({"ls"});
  json with_object = base;
  with_object["methods"] = json::array(
      {{{"name", "ls"}, {"kind", "uniform"}, {"lambda", "const:0.9"}}});

  const ExperimentOutput a =
      run_experiment(parse_experiment_config(with_alias), 2, false);
  const ExperimentOutput b =
      run_experiment(parse_experiment_config(with_object), 2, false);
  CHECK(a.csv == b.csv);
  CHECK(a.summary_csv == b.summary_csv);
}

TEST_CASE("failed cells become error rows and the run continues") {
  ExperimentConfig config = tiny_config();
  config.synth.num_classes = 2;  // t2oc needs three classes
  config.methods = {reserved_method("t2oc"), reserved_method("hard")};
  config.train_sizes = {30};
  const ExperimentOutput out = run_experiment(config, 2, false);

  REQUIRE(out.rows.size() == 4);
  for (const ResultRow& row : out.rows) {
    if (row.method == "t2oc") {
      CHECK_FALSE(row.ok);
      CHECK_FALSE(row.error.empty());
    } else {
      CHECK(row.ok);
    }
  }
  CHECK(out.csv.find("error,error,error") != std::string::npos);

  // summary: the failed cell has n = 0 and nan statistics
  CHECK(out.summary_csv.find("t2oc,30,0,nan") != std::string::npos);
  CHECK(out.summary_csv.find("hard,30,2,") != std::string::npos);
}

TEST_CASE("self-distillation runs end to end") {
  ExperimentConfig config = tiny_config();
  config.methods = {reserved_method("sd")};
  config.train_sizes = {40};
  config.n_seeds = 1;
  const ExperimentOutput out = run_experiment(config, 1, false);
  REQUIRE(out.rows.size() == 1);
  CHECK(out.rows[0].ok);
  // teacher outputs have full support, so the exact gap stays finite
  CHECK(std::isfinite(out.rows[0].kl_gap_exact));
  CHECK(out.rows[0].accuracy > 1.0 / 3.0);
}

TEST_CASE("decomposition table freezes the worked rows") {
  std::vector<SupervisedInstance> data;
  data.push_back({{0.0}, {0}, LabelDistribution({0.7, 0.2, 0.1}), {}, {}, {}});
  const auto uniform_rows = build_soft_dataset(
      data, SupervisionKind::kUniformOther, LambdaPolicy::constant(0.9));
  const auto t1oc_rows = build_soft_dataset(data, SupervisionKind::kT1OC,
                                            LambdaPolicy::constant(0.9));

  std::vector<SupervisedInstance> both;
  both.push_back(uniform_rows.instances[0]);
  both.push_back(t1oc_rows.instances[0]);

  const std::string csv = decompose_csv(both);
  std::istringstream in(csv);
  std::string header, row0, row1, mean_row;
  std::getline(in, header);
  std::getline(in, row0);
  std::getline(in, row1);
  std::getline(in, mean_row);
  CHECK(header == "index,kl_total,bias,variance,lambda_star,lambda_used");

  // row 0: the frozen uniform-source example, rendered at 12 significant
  // digits
  CHECK(row0.find("0,0.170653490483,") == 0);
  CHECK(row0.find("0.0169899036795") != std::string::npos);
  CHECK(row0.find("0.153663586804") != std::string::npos);
  CHECK(row0.substr(row0.size() - 8) == ",0.7,0.9");

  // row 1: the t1oc source starves class 2, so total and bias blow up while
  // variance stays finite
  CHECK(row1.find("1,inf,inf,0.153663586804,") == 0);

  // the summary substitutes smoothed values for the infinite columns only
  CHECK(mean_row.find("mean,") == 0);
  CHECK(mean_row.find("inf") == std::string::npos);
  std::istringstream fields(mean_row.substr(5));
  std::string field;
  std::vector<double> values;
  while (std::getline(fields, field, ',')) {
    values.push_back(std::stod(field));
  }
  REQUIRE(values.size() == 5);
  CHECK(std::isfinite(values[0]));
  CHECK(std::isfinite(values[1]));
  // variance column never went infinite: plain mean of two equal entries
  CHECK(values[2] == doctest::Approx(0.15366358680379852).epsilon(1e-12));
  CHECK(values[3] == doctest::Approx(0.7).epsilon(1e-12));  // both rows 0.7
  CHECK(values[4] == doctest::Approx(0.9).epsilon(1e-12));

  std::vector<SupervisedInstance> bare;
  bare.push_back({{0.0}, {0}, LabelDistribution({0.7, 0.3}), {}, {}, {}});
  CHECK_THROWS_AS(decompose_csv(bare), DataError);
  CHECK_THROWS_AS(decompose_csv({}), DataError);
}

TEST_CASE("thread budget is at least one") {
  CHECK(thread_budget() >= 1);
}
