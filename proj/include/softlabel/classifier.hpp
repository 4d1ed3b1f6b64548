#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "softlabel/instance.hpp"

namespace softlabel {

enum class Architecture { kLinear, kMlp };

std::string to_string(Architecture arch);
Architecture parse_architecture(const std::string& text);

inline constexpr int kMaxHiddenWidth = 64;
// Softmax probabilities are clamped to this floor inside the log.
inline constexpr double kLogClamp = 1e-12;

// Softmax-linear or one-hidden-layer ReLU network. Weights row-major:
// w1 is hidden x d, w2 is K x (hidden or d). Linear models keep w1/b1 empty.
struct ClassifierModel {
  Architecture arch = Architecture::kLinear;
  int num_classes = 0;
  int feature_dim = 0;
  int hidden_width = 0;
  std::vector<double> w1, b1;
  std::vector<double> w2, b2;

  std::vector<double> logits(const std::vector<double>& x) const;
  LabelDistribution predict(const std::vector<double>& x) const;
  int predict_class(const std::vector<double>& x) const;
  std::size_t parameter_count() const;
};

// Uniform [-1/sqrt(fan_in), +1/sqrt(fan_in)] weights from the seeded stream;
// biases start at zero.
ClassifierModel init_model(Architecture arch, int num_classes, int feature_dim,
                           int hidden_width, std::uint64_t seed);

std::string checkpoint_json(const ClassifierModel& model);
ClassifierModel parse_checkpoint(const std::string& text);

// Defaults are the comparison preset: long enough at this rate that noisy
// hard labels start to hurt on the standard mixture, which is the regime the
// supervision methods are meant to separate.
struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 180;
  int batch_size = 16;
  double weight_decay = 1e-4;
  std::uint64_t seed = 0;
};

void validate(const TrainConfig& config);

enum class LossKind { kCrossEntropy, kZeroOne };
// Which per-instance distribution weights the loss.
enum class LabelSource { kPLambda, kPStar };

// (1/n) sum_i sum_y weight_i(y) * loss(model(x_i), y). Cross-entropy uses the
// kLogClamp floor, zero-one charges 1 for every class other than the argmax.
double empirical_soft_risk(const ClassifierModel& model,
                           const std::vector<SupervisedInstance>& instances,
                           LossKind loss,
                           LabelSource source = LabelSource::kPLambda);

// Same risk against an explicit per-instance target list (teacher outputs,
// linearity checks).
double weighted_risk(const ClassifierModel& model,
                     const std::vector<SupervisedInstance>& instances,
                     const std::vector<LabelDistribution>& targets,
                     LossKind loss);

struct TrainResult {
  ClassifierModel model;
  // risk_trace[0] is the initial full-train soft risk, then one entry per
  // epoch. Size epochs + 1.
  std::vector<double> risk_trace;
};

// Mini-batch gradient descent on cross-entropy vs p_lambda plus
// weight_decay * sum(w^2) (weights only, not biases). Shuffle schedule and
// init both derive from config.seed. Throws TrainingDivergedError with the
// epoch index if the loss stops being finite.
TrainResult train(const std::vector<SupervisedInstance>& train_set,
                  Architecture arch, const TrainConfig& config,
                  int hidden_width = 32);

struct EvalReport {
  double accuracy = 0.0;
  // Present when the test set carries p_star.
  std::optional<double> true_risk_ce;
  std::optional<double> true_risk_01;
};

EvalReport evaluate(const ClassifierModel& model,
                    const std::vector<SupervisedInstance>& test_set);

struct Gradients {
  std::vector<double> w1, b1, w2, b2;
};

// Analytic gradient of the training objective: cross-entropy soft risk over
// the batch (targets: p_lambda when present, else p_star) plus
// weight_decay * sum(w^2) over weights.
Gradients objective_gradients(const ClassifierModel& model,
                              const std::vector<SupervisedInstance>& batch,
                              double weight_decay);

// Max relative error between analytic gradients and central finite
// differences (h = 1e-5) on num_params randomly chosen parameters of the
// same objective.
double grad_check(const ClassifierModel& model,
                  const std::vector<SupervisedInstance>& batch,
                  double weight_decay, std::uint64_t seed,
                  int num_params = 100);

// Softmax outputs for every instance, e.g. to reuse a trained teacher as a
// custom supervision source.
std::vector<LabelDistribution> model_outputs(
    const ClassifierModel& model,
    const std::vector<SupervisedInstance>& instances);

}  // namespace softlabel
