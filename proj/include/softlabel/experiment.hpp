#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "softlabel/classifier.hpp"
#include "softlabel/supervision.hpp"
#include "softlabel/synth.hpp"

namespace softlabel {

struct MethodSpec {
  std::string name;
  SupervisionKind kind = SupervisionKind::kUniformOther;
  LambdaPolicy policy;
  // Train a teacher on hard labels first and use its outputs as the source
  // (the reserved "sd" method).
  bool self_distill = false;
};

// Reserved names: hard, soft, ls, sd, t1oc, t2oc. Throws ConfigError on
// anything else.
MethodSpec reserved_method(const std::string& name);

struct ExperimentConfig {
  SyntheticConfig synth;
  std::vector<MethodSpec> methods;
  TrainConfig train;
  Architecture arch = Architecture::kLinear;
  int hidden_width = 32;
  int n_seeds = 5;
  std::vector<int> train_sizes;
};

void validate(const ExperimentConfig& config);

// JSON shape:
//   {"synth": {...}, "methods": ["hard", {"name":..,"kind":..,"lambda":..}],
//    "train": {...}, "model": {"architecture":"linear","hidden_width":32},
//    "n_seeds": 5, "train_sizes": [200, 500]}
// Unknown keys are rejected so typos fail loudly. ConfigError names the field.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);

// The "synth" section on its own; absent fields keep their defaults.
SyntheticConfig parse_synthetic_config(const nlohmann::json& j);

struct ResultRow {
  std::string method;
  int train_size = 0;
  int seed = 0;  // repetition index, 0-based
  bool ok = true;
  double accuracy = 0.0;
  double kl_gap_exact = 0.0;
  double kl_gap_smoothed = 0.0;
  double wall_time_ms = 0.0;
  std::string error;  // nonempty iff !ok
};

struct ExperimentOutput {
  std::vector<ResultRow> rows;
  std::string csv;          // method,train_size,seed,accuracy,kl_gap_exact,kl_gap_smoothed,wall_time_ms
  std::string summary_csv;  // per method x size: mean, 2*sample std, 2*SE
};

// Runs every (method x train_size x repetition) cell on a work pool of at
// most max_threads. Cell seeds derive from (config seeds, method, size, rep),
// and rows are sorted before rendering, so bytes never depend on thread
// count. include_timing=false writes 0 in wall_time_ms for byte-stable
// reruns. A failed cell becomes an error row and the run continues.
ExperimentOutput run_experiment(const ExperimentConfig& config, int max_threads,
                                bool include_timing);

// Per-instance decomposition table for an already-supervised dataset:
// index,kl_total,bias,variance,lambda_star,lambda_used. Infinities print as
// inf; the final summary row (index "mean") substitutes eps-smoothed KL for
// the infinite entries of kl_total and bias.
std::string decompose_csv(const std::vector<SupervisedInstance>& instances);

// Thread cap from SOFTLABEL_THREADS, else hardware concurrency.
int thread_budget();

}  // namespace softlabel
