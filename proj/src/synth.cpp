#include "softlabel/synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "softlabel/rng.hpp"

namespace softlabel {

void validate(const SyntheticConfig& config) {
  if (config.num_classes < 2) {
    throw ConfigError("num_classes must be >= 2", "num_classes");
  }
  if (config.feature_dim < 1) {
    throw ConfigError("feature_dim must be >= 1", "feature_dim");
  }
  if (config.n_train < 0 || config.n_test < 0) {
    throw ConfigError("split sizes must be >= 0", "n_train");
  }
  // separation 0 is allowed: identical components, uniform posterior
  if (!(config.class_separation >= 0.0) ||
      !std::isfinite(config.class_separation)) {
    throw ConfigError("class_separation must be finite and >= 0",
                      "class_separation");
  }
  if (!(config.temperature > 0.0) || !std::isfinite(config.temperature)) {
    throw ConfigError("temperature must be finite and > 0", "temperature");
  }
}

std::vector<std::vector<double>> component_means(
    const SyntheticConfig& config) {
  validate(config);
  const int num = config.num_classes;
  const int dim = config.feature_dim;
  const double sep = config.class_separation;
  std::vector<std::vector<double>> means(
      static_cast<std::size_t>(num),
      std::vector<double>(static_cast<std::size_t>(dim), 0.0));

  if (dim >= num) {
    // Regular simplex: scaled, centered unit vectors. All pairwise
    // distances equal sep.
    const double scale = sep / std::sqrt(2.0);
    for (int k = 0; k < num; ++k) {
      for (int j = 0; j < num; ++j) {
        means[k][j] = scale * ((j == k ? 1.0 : 0.0) - 1.0 / num);
      }
    }
  } else if (dim >= 2) {
    // Circle through the first two coordinates; adjacent chord = sep.
    const double pi = 3.14159265358979323846;
    const double radius = sep / (2.0 * std::sin(pi / num));
    for (int k = 0; k < num; ++k) {
      const double theta = 2.0 * pi * k / num;
      means[k][0] = radius * std::cos(theta);
      means[k][1] = radius * std::sin(theta);
    }
  } else {
    // Line, centered at the origin.
    for (int k = 0; k < num; ++k) {
      means[k][0] = sep * (k - 0.5 * (num - 1));
    }
  }
  return means;
}

namespace {

LabelDistribution posterior_from_means(
    const std::vector<std::vector<double>>& means, double temperature,
    const std::vector<double>& x) {
  const int num = static_cast<int>(means.size());
  std::vector<double> logits(static_cast<std::size_t>(num));
  for (int k = 0; k < num; ++k) {
    double d2 = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double diff = x[j] - means[k][j];
      d2 += diff * diff;
    }
    // equal weights and shared isotropic covariance: only the squared
    // distances matter
    logits[k] = -d2 / (2.0 * temperature);
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  double denom = 0.0;
  for (double& l : logits) {
    l = std::exp(l - top);
    denom += l;
  }
  for (double& l : logits) l /= denom;
  return LabelDistribution(std::move(logits));
}

// Substream tags; arbitrary but fixed forever (serialized data depends on
// them).
constexpr std::uint64_t kTrainTag = 0x7261696e;
constexpr std::uint64_t kTestTag = 0x74657374;

SupervisedInstance draw_instance(
    const SyntheticConfig& config,
    const std::vector<std::vector<double>>& means, std::uint64_t split_seed,
    std::uint64_t index) {
  SplitMix64 rng(derive_seed(split_seed, index));
  const int num = config.num_classes;
  const int component =
      static_cast<int>(rng.next_below(static_cast<std::uint64_t>(num)));

  std::vector<double> x(static_cast<std::size_t>(config.feature_dim));
  for (std::size_t j = 0; j < x.size(); ++j) {
    x[j] = means[component][j] + rng.next_gaussian();
  }
  LabelDistribution p_star =
      posterior_from_means(means, config.temperature, x);

  // hard label drawn from the posterior itself, not the component
  const double u = rng.next_double();
  double acc = 0.0;
  int label = num - 1;
  for (int k = 0; k < num; ++k) {
    acc += p_star[k];
    if (u < acc) {
      label = k;
      break;
    }
  }
  return SupervisedInstance{std::move(x), HardLabel{label}, std::move(p_star),
                            {}, {}, {}};
}

}  // namespace

Dataset generate(const SyntheticConfig& config) {
  validate(config);
  const auto means = component_means(config);
  Dataset data;
  data.train.reserve(static_cast<std::size_t>(config.n_train));
  data.test.reserve(static_cast<std::size_t>(config.n_test));
  const std::uint64_t train_seed = derive_seed(config.seed, kTrainTag);
  const std::uint64_t test_seed = derive_seed(config.seed, kTestTag);
  for (int i = 0; i < config.n_train; ++i) {
    data.train.push_back(
        draw_instance(config, means, train_seed, static_cast<std::uint64_t>(i)));
  }
  for (int i = 0; i < config.n_test; ++i) {
    data.test.push_back(
        draw_instance(config, means, test_seed, static_cast<std::uint64_t>(i)));
  }
  return data;
}

LabelDistribution posterior(const SyntheticConfig& config,
                            const std::vector<double>& features) {
  validate(config);
  if (static_cast<int>(features.size()) != config.feature_dim) {
    throw DataError("feature vector has dimension " +
                    std::to_string(features.size()) + ", config says " +
                    std::to_string(config.feature_dim));
  }
  return posterior_from_means(component_means(config), config.temperature,
                              features);
}

NoiseReport label_noise_rate(const std::vector<SupervisedInstance>& instances) {
  if (instances.empty()) {
    throw DataError("label_noise_rate needs at least one instance");
  }
  NoiseReport report;
  double sum = 0.0;
  for (const SupervisedInstance& inst : instances) {
    const double conf = inst.p_star[inst.p_star.argmax()];
    sum += 1.0 - conf;
    int bin = static_cast<int>(conf * kConfidenceBins);
    if (bin >= kConfidenceBins) bin = kConfidenceBins - 1;
    ++report.histogram[static_cast<std::size_t>(bin)];
  }
  report.rate = sum / static_cast<double>(instances.size());
  return report;
}

}  // namespace softlabel
