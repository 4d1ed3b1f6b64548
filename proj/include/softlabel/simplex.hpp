#pragma once

#include <vector>

#include "softlabel/errors.hpp"

namespace softlabel {

// Entries this far below zero are treated as float noise and clamped to 0;
// anything more negative is rejected.
inline constexpr double kNegativeTol = 1e-12;
// Tolerance on |sum - 1| at construction.
inline constexpr double kSumTol = 1e-9;

// A point on the probability simplex over classes {0, ..., K-1}.
// Construction validates; afterwards entries are nonnegative and sum to 1
// within kSumTol.
class LabelDistribution {
 public:
  explicit LabelDistribution(std::vector<double> probs);

  int num_classes() const { return static_cast<int>(probs_.size()); }
  double operator[](int y) const { return probs_[static_cast<size_t>(y)]; }
  const std::vector<double>& probs() const { return probs_; }

  // Total mass off class k.
  double mass_excluding(int k) const;
  // Smallest index attaining the maximum.
  int argmax() const;

 private:
  std::vector<double> probs_;
};

struct HardLabel {
  int class_index = 0;
};

// Closed interval of mixture weights that keep the combination on the
// simplex. lo can be negative; hi is 1 except in the degenerate case below.
struct LambdaInterval {
  double lo = 0.0;
  double hi = 1.0;
  bool contains(double lam) const { return lam >= lo && lam <= hi; }
  double clamp(double lam) const;
};

LabelDistribution dirac(int k, int num_classes);

// lambda * dirac(hard) + (1 - lambda) * p_a. Throws FeasibilityError if any
// coordinate would be negative beyond kNegativeTol.
LabelDistribution affine_combine(HardLabel hard, const LabelDistribution& p_a,
                                 double lambda);

// [-a/(1-a), 1] where a = p_a[hard]; [1, 1] when a == 1 (the combination is
// the dirac for every lambda, only lambda = 1 is reported feasible).
LambdaInterval lambda_feasible_range(HardLabel hard,
                                     const LabelDistribution& p_a);

// Conditional distribution over the remaining classes given Y != k. Keeps the
// original indexing with 0 at position k. Requires positive mass off k.
LabelDistribution restrict_exclude(const LabelDistribution& p, int k);

}  // namespace softlabel
