#include "softlabel/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace softlabel {

LabelDistribution::LabelDistribution(std::vector<double> probs)
    : probs_(std::move(probs)) {
  if (probs_.size() < 2) {
    throw Error("label distribution needs at least 2 classes, got " +
                std::to_string(probs_.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    double v = probs_[i];
    if (!std::isfinite(v)) {
      throw Error("non-finite probability at class " + std::to_string(i));
    }
    if (v < 0.0) {
      if (v < -kNegativeTol) {
        throw FeasibilityError(
            "negative probability " + std::to_string(v) + " at class " +
                std::to_string(i),
            static_cast<int>(i));
      }
      // float noise from boundary cancellation
      probs_[i] = 0.0;
      v = 0.0;
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSumTol) {
    throw Error("probabilities sum to " + std::to_string(sum) +
                ", expected 1");
  }
}

double LabelDistribution::mass_excluding(int k) const {
  double total = 0.0;
  for (int y = 0; y < num_classes(); ++y) {
    if (y != k) total += probs_[static_cast<std::size_t>(y)];
  }
  return total;
}

int LabelDistribution::argmax() const {
  return static_cast<int>(
      std::max_element(probs_.begin(), probs_.end()) - probs_.begin());
}

double LambdaInterval::clamp(double lam) const {
  return std::min(hi, std::max(lo, lam));
}

LabelDistribution dirac(int k, int num_classes) {
  if (k < 0 || k >= num_classes) {
    throw Error("dirac class " + std::to_string(k) + " out of range for K=" +
                std::to_string(num_classes));
  }
  std::vector<double> probs(static_cast<std::size_t>(num_classes), 0.0);
  probs[static_cast<std::size_t>(k)] = 1.0;
  return LabelDistribution(std::move(probs));
}

LabelDistribution affine_combine(HardLabel hard, const LabelDistribution& p_a,
                                 double lambda) {
  const int k = hard.class_index;
  const int num = p_a.num_classes();
  if (k < 0 || k >= num) {
    throw Error("hard label " + std::to_string(k) + " out of range for K=" +
                std::to_string(num));
  }
  std::vector<double> probs(static_cast<std::size_t>(num));
  for (int y = 0; y < num; ++y) {
    double v = (1.0 - lambda) * p_a[y];
    if (y == k) v += lambda;
    if (v < -kNegativeTol) {
      throw FeasibilityError("lambda " + std::to_string(lambda) +
                                 " drives class " + std::to_string(y) +
                                 " negative (" + std::to_string(v) + ")",
                             y);
    }
    probs[static_cast<std::size_t>(y)] = v;
  }
  return LabelDistribution(std::move(probs));
}

LambdaInterval lambda_feasible_range(HardLabel hard,
                                     const LabelDistribution& p_a) {
  const int k = hard.class_index;
  if (k < 0 || k >= p_a.num_classes()) {
    throw Error("hard label " + std::to_string(k) + " out of range for K=" +
                std::to_string(p_a.num_classes()));
  }
  const double a = p_a[k];
  if (a >= 1.0) {
    // p_a is already the hard label; every lambda gives the same point but
    // only 1 is reported so downstream sees the dirac unchanged.
    return {1.0, 1.0};
  }
  // Hard-class coordinate lambda + (1-lambda)*a >= 0 bounds lambda below;
  // the off-class coordinates (1-lambda)*p_a[y] >= 0 bound it above by 1.
  return {-a / (1.0 - a), 1.0};
}

LabelDistribution restrict_exclude(const LabelDistribution& p, int k) {
  const int num = p.num_classes();
  if (k < 0 || k >= num) {
    throw Error("excluded class " + std::to_string(k) + " out of range");
  }
  const double rest = p.mass_excluding(k);
  if (rest <= 0.0) {
    throw Error("cannot restrict: all mass sits on class " +
                std::to_string(k));
  }
  std::vector<double> probs(static_cast<std::size_t>(num), 0.0);
  for (int y = 0; y < num; ++y) {
    if (y != k) probs[static_cast<std::size_t>(y)] = p[y] / rest;
  }
  return LabelDistribution(std::move(probs));
}

}  // namespace softlabel
