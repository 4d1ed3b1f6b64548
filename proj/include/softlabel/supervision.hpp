#pragma once

#include <string>
#include <vector>

#include "softlabel/instance.hpp"
#include "softlabel/simplex.hpp"

namespace softlabel {

enum class SupervisionKind {
  kT1OC,            // all off-class mass on the top non-hard class of p_star
  kT2OC,            // split 0.5/0.5 over the top two non-hard classes
  kUniformOther,    // uniform over the K-1 non-hard classes
  kTrueRestricted,  // p_star conditioned on Y != y_i
  kCustom,          // caller-supplied per-instance distribution
};

std::string to_string(SupervisionKind kind);
// Accepts "t1oc", "t2oc", "uniform", "true-restricted", "custom".
SupervisionKind parse_supervision_kind(const std::string& text);

struct LambdaPolicy {
  enum class Tag { kConstant, kOptimal };
  Tag tag = Tag::kConstant;
  double value = 1.0;

  static LambdaPolicy constant(double c) { return {Tag::kConstant, c}; }
  static LambdaPolicy optimal() { return {Tag::kOptimal, 0.0}; }
};

std::string to_string(const LambdaPolicy& policy);
// Accepts "optimal" or "const:<number>".
LambdaPolicy parse_lambda_policy(const std::string& text);

// Ties broken toward the lowest class index, which also makes t1oc total:
// a p_star with zero off-class mass concentrates on the lowest non-hard
// index. t2oc needs at least two off classes and throws
// DegenerateSupervisionError when K < 3.
LabelDistribution t1oc(const LabelDistribution& p_star, HardLabel hard);
LabelDistribution t2oc(const LabelDistribution& p_star, HardLabel hard);
LabelDistribution uniform_other(HardLabel hard, int num_classes);

struct SoftDatasetResult {
  std::vector<SupervisedInstance> instances;
  // Number of instances whose policy constant had to be clamped into the
  // feasible interval.
  int clamp_warnings = 0;
};

// Attaches p_a (per kind), lambda (per policy, clamped into the feasible
// interval), and p_lambda to every instance, preserving order. For kCustom,
// sources must be non-null and aligned with the input; other kinds ignore it.
SoftDatasetResult build_soft_dataset(
    const std::vector<SupervisedInstance>& instances, SupervisionKind kind,
    const LambdaPolicy& policy,
    const std::vector<LabelDistribution>* sources = nullptr);

}  // namespace softlabel
