#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "softlabel/instance.hpp"

namespace softlabel {

// Equal-weight isotropic Gaussian mixture with analytically known label
// posterior. Labels are drawn from that posterior, so p_star is exact by
// construction rather than a trained approximation.
struct SyntheticConfig {
  int num_classes = 6;
  int feature_dim = 20;
  int n_train = 1000;
  int n_test = 1000;
  std::uint64_t seed = 1;
  // Pairwise distance between component means (adjacent distance for the
  // circle fallback). Zero gives uniform posteriors everywhere.
  double class_separation = 3.0;
  // Divides the log-densities before the softmax; 1 = exact Bayes posterior
  // of the component indicator, larger = softer labels.
  double temperature = 1.0;
};

void validate(const SyntheticConfig& config);

// Component means: regular simplex scaled to pairwise distance
// class_separation when feature_dim >= num_classes, circle through the first
// two coordinates when 2 <= feature_dim < num_classes, evenly spaced line
// when feature_dim == 1. Deterministic, no RNG involved.
std::vector<std::vector<double>> component_means(const SyntheticConfig& config);

struct Dataset {
  std::vector<SupervisedInstance> train;
  std::vector<SupervisedInstance> test;
};

// Per instance: component ~ uniform, x ~ N(mean_c, I), p_star = posterior(x),
// hard label ~ p_star. Each instance uses its own counter-derived substream,
// so output is independent of generation order and thread count.
Dataset generate(const SyntheticConfig& config);

LabelDistribution posterior(const SyntheticConfig& config,
                            const std::vector<double>& features);

inline constexpr int kConfidenceBins = 20;

struct NoiseReport {
  // Mean of 1 - max_y p_star[y].
  double rate = 0.0;
  // Histogram of max confidence over [0, 1] in kConfidenceBins uniform bins;
  // max confidence 1.0 lands in the last bin.
  std::array<int, kConfidenceBins> histogram{};
};

NoiseReport label_noise_rate(const std::vector<SupervisedInstance>& instances);

}  // namespace softlabel
