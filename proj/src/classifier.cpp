#include "softlabel/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <nlohmann/json.hpp>

#include "softlabel/rng.hpp"

namespace softlabel {

using nlohmann::json;

std::string to_string(Architecture arch) {
  return arch == Architecture::kLinear ? "linear" : "mlp";
}

Architecture parse_architecture(const std::string& text) {
  if (text == "linear") return Architecture::kLinear;
  if (text == "mlp") return Architecture::kMlp;
  throw ConfigError("unknown architecture \"" + text +
                        "\" (expected linear or mlp)",
                    "architecture");
}

void validate(const TrainConfig& config) {
  if (!(config.learning_rate > 0.0)) {
    throw ConfigError("learning_rate must be > 0", "learning_rate");
  }
  if (config.epochs < 0) {
    throw ConfigError("epochs must be >= 0", "epochs");
  }
  if (config.batch_size < 1) {
    throw ConfigError("batch_size must be >= 1", "batch_size");
  }
  if (config.weight_decay < 0.0) {
    throw ConfigError("weight_decay must be >= 0", "weight_decay");
  }
}

namespace {

void matvec(const std::vector<double>& m, int rows, int cols,
            const std::vector<double>& x, const std::vector<double>& b,
            std::vector<double>& out) {
  out.resize(static_cast<std::size_t>(rows));
  for (int r = 0; r < rows; ++r) {
    double acc = b[static_cast<std::size_t>(r)];
    const double* row = m.data() + static_cast<std::size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) acc += row[c] * x[static_cast<std::size_t>(c)];
    out[static_cast<std::size_t>(r)] = acc;
  }
}

void softmax_inplace(std::vector<double>& z) {
  const double top = *std::max_element(z.begin(), z.end());
  double denom = 0.0;
  for (double& v : z) {
    v = std::exp(v - top);
    denom += v;
  }
  for (double& v : z) v /= denom;
}

struct Forward {
  std::vector<double> hidden;     // post-relu, empty for linear
  std::vector<double> preact;     // pre-relu, empty for linear
  std::vector<double> probs;      // softmax output
};

void forward_pass(const ClassifierModel& model, const std::vector<double>& x,
                  Forward& f) {
  if (model.arch == Architecture::kMlp) {
    matvec(model.w1, model.hidden_width, model.feature_dim, x, model.b1,
           f.preact);
    f.hidden = f.preact;
    for (double& v : f.hidden) v = v > 0.0 ? v : 0.0;
    matvec(model.w2, model.num_classes, model.hidden_width, f.hidden, model.b2,
           f.probs);
  } else {
    matvec(model.w2, model.num_classes, model.feature_dim, x, model.b2,
           f.probs);
  }
  softmax_inplace(f.probs);
}

const LabelDistribution& target_of(const SupervisedInstance& inst) {
  if (inst.p_lambda) return *inst.p_lambda;
  return inst.p_star;
}

double instance_loss(const std::vector<double>& probs,
                     const LabelDistribution& target, LossKind loss) {
  const int num = static_cast<int>(probs.size());
  if (loss == LossKind::kCrossEntropy) {
    double acc = 0.0;
    for (int y = 0; y < num; ++y) {
      const double t = target[y];
      if (t <= 0.0) continue;
      acc -= t * std::log(std::max(probs[static_cast<std::size_t>(y)],
                                   kLogClamp));
    }
    return acc;
  }
  const int top = static_cast<int>(
      std::max_element(probs.begin(), probs.end()) - probs.begin());
  return 1.0 - target[top];
}

// CE + decay gradient accumulated over instances[indices]; shared by train
// and the public full-batch entry point.
Gradients gradients_over(const ClassifierModel& model,
                         const std::vector<SupervisedInstance>& instances,
                         const std::vector<std::size_t>& indices,
                         double weight_decay) {
  Gradients g;
  g.w1.assign(model.w1.size(), 0.0);
  g.b1.assign(model.b1.size(), 0.0);
  g.w2.assign(model.w2.size(), 0.0);
  g.b2.assign(model.b2.size(), 0.0);

  Forward f;
  std::vector<double> dlogits(static_cast<std::size_t>(model.num_classes));
  std::vector<double> dhidden;
  const double inv_n = 1.0 / static_cast<double>(indices.size());

  for (std::size_t idx : indices) {
    const SupervisedInstance& inst = instances[idx];
    forward_pass(model, inst.x, f);
    const LabelDistribution& t = target_of(inst);
    for (int y = 0; y < model.num_classes; ++y) {
      dlogits[static_cast<std::size_t>(y)] =
          (f.probs[static_cast<std::size_t>(y)] - t[y]) * inv_n;
    }

    const std::vector<double>& input =
        model.arch == Architecture::kMlp ? f.hidden : inst.x;
    const int in_dim = static_cast<int>(input.size());
    for (int y = 0; y < model.num_classes; ++y) {
      const double d = dlogits[static_cast<std::size_t>(y)];
      double* grow = g.w2.data() + static_cast<std::size_t>(y) * in_dim;
      for (int c = 0; c < in_dim; ++c) grow[c] += d * input[static_cast<std::size_t>(c)];
      g.b2[static_cast<std::size_t>(y)] += d;
    }

    if (model.arch == Architecture::kMlp) {
      dhidden.assign(static_cast<std::size_t>(model.hidden_width), 0.0);
      for (int y = 0; y < model.num_classes; ++y) {
        const double d = dlogits[static_cast<std::size_t>(y)];
        const double* wrow =
            model.w2.data() + static_cast<std::size_t>(y) * model.hidden_width;
        for (int h = 0; h < model.hidden_width; ++h) {
          dhidden[static_cast<std::size_t>(h)] += d * wrow[h];
        }
      }
      for (int h = 0; h < model.hidden_width; ++h) {
        if (f.preact[static_cast<std::size_t>(h)] <= 0.0) continue;
        const double d = dhidden[static_cast<std::size_t>(h)];
        double* grow = g.w1.data() + static_cast<std::size_t>(h) * model.feature_dim;
        for (int c = 0; c < model.feature_dim; ++c) {
          grow[c] += d * inst.x[static_cast<std::size_t>(c)];
        }
        g.b1[static_cast<std::size_t>(h)] += d;
      }
    }
  }

  if (weight_decay > 0.0) {
    for (std::size_t i = 0; i < g.w1.size(); ++i) {
      g.w1[i] += 2.0 * weight_decay * model.w1[i];
    }
    for (std::size_t i = 0; i < g.w2.size(); ++i) {
      g.w2[i] += 2.0 * weight_decay * model.w2[i];
    }
  }
  return g;
}

double decay_penalty(const ClassifierModel& model, double weight_decay) {
  if (weight_decay <= 0.0) return 0.0;
  double sumsq = 0.0;
  for (double w : model.w1) sumsq += w * w;
  for (double w : model.w2) sumsq += w * w;
  return weight_decay * sumsq;
}

}  // namespace

std::vector<double> ClassifierModel::logits(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != feature_dim) {
    throw DataError("feature vector has dimension " +
                    std::to_string(x.size()) + ", model expects " +
                    std::to_string(feature_dim));
  }
  std::vector<double> out;
  if (arch == Architecture::kMlp) {
    std::vector<double> h;
    matvec(w1, hidden_width, feature_dim, x, b1, h);
    for (double& v : h) v = v > 0.0 ? v : 0.0;
    matvec(w2, num_classes, hidden_width, h, b2, out);
  } else {
    matvec(w2, num_classes, feature_dim, x, b2, out);
  }
  return out;
}

LabelDistribution ClassifierModel::predict(const std::vector<double>& x) const {
  std::vector<double> z = logits(x);
  softmax_inplace(z);
  return LabelDistribution(std::move(z));
}

int ClassifierModel::predict_class(const std::vector<double>& x) const {
  const std::vector<double> z = logits(x);
  return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

std::size_t ClassifierModel::parameter_count() const {
  return w1.size() + b1.size() + w2.size() + b2.size();
}

ClassifierModel init_model(Architecture arch, int num_classes, int feature_dim,
                           int hidden_width, std::uint64_t seed) {
  if (num_classes < 2) throw ConfigError("need K >= 2", "num_classes");
  if (feature_dim < 1) throw ConfigError("need d >= 1", "feature_dim");
  ClassifierModel model;
  model.arch = arch;
  model.num_classes = num_classes;
  model.feature_dim = feature_dim;
  if (arch == Architecture::kMlp) {
    if (hidden_width < 1 || hidden_width > kMaxHiddenWidth) {
      throw ConfigError("hidden_width must lie in [1, " +
                            std::to_string(kMaxHiddenWidth) + "]",
                        "hidden_width");
    }
    model.hidden_width = hidden_width;
  } else {
    model.hidden_width = 0;
  }

  SplitMix64 rng(derive_seed(seed, 0x1417));
  const auto fill = [&rng](std::vector<double>& w, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : w) v = (2.0 * rng.next_double() - 1.0) * bound;
  };

  if (arch == Architecture::kMlp) {
    model.w1.resize(static_cast<std::size_t>(model.hidden_width) * feature_dim);
    model.b1.assign(static_cast<std::size_t>(model.hidden_width), 0.0);
    fill(model.w1, feature_dim);
    model.w2.resize(static_cast<std::size_t>(num_classes) * model.hidden_width);
    model.b2.assign(static_cast<std::size_t>(num_classes), 0.0);
    fill(model.w2, model.hidden_width);
  } else {
    model.w2.resize(static_cast<std::size_t>(num_classes) * feature_dim);
    model.b2.assign(static_cast<std::size_t>(num_classes), 0.0);
    fill(model.w2, feature_dim);
  }
  return model;
}

double empirical_soft_risk(const ClassifierModel& model,
                           const std::vector<SupervisedInstance>& instances,
                           LossKind loss, LabelSource source) {
  if (instances.empty()) {
    throw DataError("empirical risk over an empty dataset");
  }
  double acc = 0.0;
  Forward f;
  for (const SupervisedInstance& inst : instances) {
    forward_pass(model, inst.x, f);
    if (source == LabelSource::kPLambda) {
      if (!inst.p_lambda) {
        throw DataError("instance lacks p_lambda");
      }
      acc += instance_loss(f.probs, *inst.p_lambda, loss);
    } else {
      acc += instance_loss(f.probs, inst.p_star, loss);
    }
  }
  return acc / static_cast<double>(instances.size());
}

double weighted_risk(const ClassifierModel& model,
                     const std::vector<SupervisedInstance>& instances,
                     const std::vector<LabelDistribution>& targets,
                     LossKind loss) {
  if (instances.size() != targets.size()) {
    throw DataError("targets length does not match instances");
  }
  if (instances.empty()) {
    throw DataError("empirical risk over an empty dataset");
  }
  double acc = 0.0;
  Forward f;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    forward_pass(model, instances[i].x, f);
    acc += instance_loss(f.probs, targets[i], loss);
  }
  return acc / static_cast<double>(instances.size());
}

Gradients objective_gradients(const ClassifierModel& model,
                              const std::vector<SupervisedInstance>& batch,
                              double weight_decay) {
  if (batch.empty()) throw DataError("gradient over an empty batch");
  std::vector<std::size_t> all(batch.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return gradients_over(model, batch, all, weight_decay);
}

TrainResult train(const std::vector<SupervisedInstance>& train_set,
                  Architecture arch, const TrainConfig& config,
                  int hidden_width) {
  validate(config);
  if (train_set.empty()) throw DataError("empty training set");
  const int num_classes = train_set.front().p_star.num_classes();
  const int feature_dim = static_cast<int>(train_set.front().x.size());

  TrainResult result{
      init_model(arch, num_classes, feature_dim, hidden_width,
                 config.seed),
      {}};
  ClassifierModel& model = result.model;

  const auto record_risk = [&](int epoch) {
    const double risk = empirical_soft_risk(model, train_set,
                                            LossKind::kCrossEntropy);
    if (!std::isfinite(risk)) {
      throw TrainingDivergedError(
          "training risk became non-finite at epoch " + std::to_string(epoch),
          epoch);
    }
    result.risk_trace.push_back(risk);
  };
  record_risk(0);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::size_t> batch;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    SplitMix64 shuffle_rng(
        derive_seed(derive_seed(config.seed, 0x5F5F), epoch));
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = shuffle_rng.next_below(i);
      std::swap(order[i - 1], order[j]);
    }

    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(
          order.size(), start + static_cast<std::size_t>(config.batch_size));
      batch.assign(order.begin() + start, order.begin() + stop);
      const Gradients g =
          gradients_over(model, train_set, batch, config.weight_decay);
      const double lr = config.learning_rate;
      for (std::size_t i = 0; i < model.w1.size(); ++i) model.w1[i] -= lr * g.w1[i];
      for (std::size_t i = 0; i < model.b1.size(); ++i) model.b1[i] -= lr * g.b1[i];
      for (std::size_t i = 0; i < model.w2.size(); ++i) model.w2[i] -= lr * g.w2[i];
      for (std::size_t i = 0; i < model.b2.size(); ++i) model.b2[i] -= lr * g.b2[i];
    }
    record_risk(epoch + 1);
  }
  return result;
}

EvalReport evaluate(const ClassifierModel& model,
                    const std::vector<SupervisedInstance>& test_set) {
  if (test_set.empty()) throw DataError("empty test set");
  EvalReport report;
  Forward f;
  int correct = 0;
  double ce = 0.0, zo = 0.0;
  for (const SupervisedInstance& inst : test_set) {
    forward_pass(model, inst.x, f);
    const int top = static_cast<int>(
        std::max_element(f.probs.begin(), f.probs.end()) - f.probs.begin());
    if (top == inst.y.class_index) ++correct;
    ce += instance_loss(f.probs, inst.p_star, LossKind::kCrossEntropy);
    zo += instance_loss(f.probs, inst.p_star, LossKind::kZeroOne);
  }
  const double n = static_cast<double>(test_set.size());
  report.accuracy = correct / n;
  report.true_risk_ce = ce / n;
  report.true_risk_01 = zo / n;
  return report;
}

double grad_check(const ClassifierModel& model,
                  const std::vector<SupervisedInstance>& batch,
                  double weight_decay, std::uint64_t seed, int num_params) {
  if (batch.empty()) throw DataError("grad check over an empty batch");
  const Gradients g = objective_gradients(model, batch, weight_decay);

  // flat layout: w1 | b1 | w2 | b2
  const std::size_t total = model.parameter_count();
  const auto param_at = [](ClassifierModel& m,
                           std::size_t flat) -> double& {
    if (flat < m.w1.size()) return m.w1[flat];
    flat -= m.w1.size();
    if (flat < m.b1.size()) return m.b1[flat];
    flat -= m.b1.size();
    if (flat < m.w2.size()) return m.w2[flat];
    flat -= m.w2.size();
    return m.b2[flat];
  };
  const auto grad_at = [&g](std::size_t flat) -> double {
    if (flat < g.w1.size()) return g.w1[flat];
    flat -= g.w1.size();
    if (flat < g.b1.size()) return g.b1[flat];
    flat -= g.b1.size();
    if (flat < g.w2.size()) return g.w2[flat];
    flat -= g.w2.size();
    return g.b2[flat];
  };

  const auto objective = [&](ClassifierModel& m) {
    return empirical_soft_risk(m, batch, LossKind::kCrossEntropy) +
           decay_penalty(m, weight_decay);
  };

  constexpr double h = 1e-5;
  SplitMix64 rng(derive_seed(seed, 0x9c));
  ClassifierModel probe = model;
  double worst = 0.0;
  const int checks = std::min<std::size_t>(
      static_cast<std::size_t>(num_params), total);
  for (int c = 0; c < checks; ++c) {
    const std::size_t flat = rng.next_below(total);
    double& slot = param_at(probe, flat);
    const double saved = slot;
    slot = saved + h;
    const double up = objective(probe);
    slot = saved - h;
    const double down = objective(probe);
    slot = saved;
    const double fd = (up - down) / (2.0 * h);
    const double an = grad_at(flat);
    const double scale = std::max({1e-10, std::abs(fd), std::abs(an)});
    worst = std::max(worst, std::abs(fd - an) / scale);
  }
  return worst;
}

std::vector<LabelDistribution> model_outputs(
    const ClassifierModel& model,
    const std::vector<SupervisedInstance>& instances) {
  std::vector<LabelDistribution> out;
  out.reserve(instances.size());
  for (const SupervisedInstance& inst : instances) {
    out.push_back(model.predict(inst.x));
  }
  return out;
}

std::string checkpoint_json(const ClassifierModel& model) {
  json j;
  j["architecture"] = to_string(model.arch);
  j["k"] = model.num_classes;
  j["d"] = model.feature_dim;
  j["hidden"] = model.hidden_width;
  j["w1"] = model.w1;
  j["b1"] = model.b1;
  j["w2"] = model.w2;
  j["b2"] = model.b2;
  return j.dump();
}

ClassifierModel parse_checkpoint(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("bad checkpoint: ") + e.what());
  }
  ClassifierModel model;
  try {
    model.arch = parse_architecture(j.at("architecture").get<std::string>());
    model.num_classes = j.at("k").get<int>();
    model.feature_dim = j.at("d").get<int>();
    model.hidden_width = j.at("hidden").get<int>();
    model.w1 = j.at("w1").get<std::vector<double>>();
    model.b1 = j.at("b1").get<std::vector<double>>();
    model.w2 = j.at("w2").get<std::vector<double>>();
    model.b2 = j.at("b2").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw DataError(std::string("bad checkpoint: ") + e.what());
  }
  const std::size_t in2 = model.arch == Architecture::kMlp
                              ? static_cast<std::size_t>(model.hidden_width)
                              : static_cast<std::size_t>(model.feature_dim);
  if (model.w2.size() != static_cast<std::size_t>(model.num_classes) * in2 ||
      model.b2.size() != static_cast<std::size_t>(model.num_classes)) {
    throw DataError("checkpoint weight shapes disagree with metadata");
  }
  if (model.arch == Architecture::kMlp &&
      (model.w1.size() != static_cast<std::size_t>(model.hidden_width) *
                              model.feature_dim ||
       model.b1.size() != static_cast<std::size_t>(model.hidden_width))) {
    throw DataError("checkpoint hidden-layer shapes disagree with metadata");
  }
  return model;
}

}  // namespace softlabel
