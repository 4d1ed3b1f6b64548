#pragma once

#include <optional>
#include <vector>

#include "softlabel/simplex.hpp"

namespace softlabel {

// One labeled example. p_star is the true conditional; p_a / lambda / p_lambda
// are filled in once a supervision source has been attached.
struct SupervisedInstance {
  std::vector<double> x;
  HardLabel y;
  LabelDistribution p_star;
  std::optional<LabelDistribution> p_a;
  std::optional<double> lambda;
  std::optional<LabelDistribution> p_lambda;
};

}  // namespace softlabel
