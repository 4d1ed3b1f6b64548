#include "softlabel/supervision.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "softlabel/mixing.hpp"

namespace softlabel {

std::string to_string(SupervisionKind kind) {
  switch (kind) {
    case SupervisionKind::kT1OC: return "t1oc";
    case SupervisionKind::kT2OC: return "t2oc";
    case SupervisionKind::kUniformOther: return "uniform";
    case SupervisionKind::kTrueRestricted: return "true-restricted";
    case SupervisionKind::kCustom: return "custom";
  }
  throw Error("unreachable supervision kind");
}

SupervisionKind parse_supervision_kind(const std::string& text) {
  if (text == "t1oc") return SupervisionKind::kT1OC;
  if (text == "t2oc") return SupervisionKind::kT2OC;
  if (text == "uniform") return SupervisionKind::kUniformOther;
  if (text == "true-restricted") return SupervisionKind::kTrueRestricted;
  if (text == "custom") return SupervisionKind::kCustom;
  throw ConfigError("unknown supervision kind \"" + text +
                        "\" (expected t1oc, t2oc, uniform, true-restricted, "
                        "or custom)",
                    "kind");
}

std::string to_string(const LambdaPolicy& policy) {
  if (policy.tag == LambdaPolicy::Tag::kOptimal) return "optimal";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "const:%.12g", policy.value);
  return buf;
}

LambdaPolicy parse_lambda_policy(const std::string& text) {
  if (text == "optimal") return LambdaPolicy::optimal();
  const std::string prefix = "const:";
  if (text.rfind(prefix, 0) == 0) {
    const std::string num = text.substr(prefix.size());
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(num, &used);
    } catch (const std::exception&) {
      throw ConfigError("bad lambda constant \"" + num + "\"", "lambda");
    }
    if (used != num.size() || !std::isfinite(value)) {
      throw ConfigError("bad lambda constant \"" + num + "\"", "lambda");
    }
    return LambdaPolicy::constant(value);
  }
  throw ConfigError("unknown lambda policy \"" + text +
                        "\" (expected optimal or const:<number>)",
                    "lambda");
}

namespace {

// Indices of the two largest off-class entries, ties to the lower index.
// second is -1 when only one off class exists.
std::pair<int, int> top_two_off(const LabelDistribution& p_star, int hard) {
  int first = -1, second = -1;
  for (int y = 0; y < p_star.num_classes(); ++y) {
    if (y == hard) continue;
    if (first < 0 || p_star[y] > p_star[first]) {
      second = first;
      first = y;
    } else if (second < 0 || p_star[y] > p_star[second]) {
      second = y;
    }
  }
  return {first, second};
}

void check_hard(const LabelDistribution& p_star, HardLabel hard) {
  if (hard.class_index < 0 || hard.class_index >= p_star.num_classes()) {
    throw Error("hard label out of range");
  }
}

}  // namespace

LabelDistribution t1oc(const LabelDistribution& p_star, HardLabel hard) {
  check_hard(p_star, hard);
  const auto [first, second] = top_two_off(p_star, hard.class_index);
  (void)second;
  return dirac(first, p_star.num_classes());
}

LabelDistribution t2oc(const LabelDistribution& p_star, HardLabel hard) {
  check_hard(p_star, hard);
  if (p_star.num_classes() < 3) {
    throw DegenerateSupervisionError(
        "t2oc needs at least two classes besides the hard label (K >= 3)");
  }
  const auto [first, second] = top_two_off(p_star, hard.class_index);
  std::vector<double> probs(static_cast<std::size_t>(p_star.num_classes()),
                            0.0);
  probs[static_cast<std::size_t>(first)] = 0.5;
  probs[static_cast<std::size_t>(second)] = 0.5;
  return LabelDistribution(std::move(probs));
}

LabelDistribution uniform_other(HardLabel hard, int num_classes) {
  if (num_classes < 2) {
    throw Error("uniform_other needs K >= 2");
  }
  if (hard.class_index < 0 || hard.class_index >= num_classes) {
    throw Error("hard label out of range");
  }
  std::vector<double> probs(static_cast<std::size_t>(num_classes),
                            1.0 / (num_classes - 1));
  probs[static_cast<std::size_t>(hard.class_index)] = 0.0;
  return LabelDistribution(std::move(probs));
}

SoftDatasetResult build_soft_dataset(
    const std::vector<SupervisedInstance>& instances, SupervisionKind kind,
    const LambdaPolicy& policy, const std::vector<LabelDistribution>* sources) {
  if (kind == SupervisionKind::kCustom) {
    if (sources == nullptr) {
      throw DataError("custom supervision requires a source list");
    }
    if (sources->size() != instances.size()) {
      throw DataError("source list length " + std::to_string(sources->size()) +
                      " does not match dataset size " +
                      std::to_string(instances.size()));
    }
  }

  SoftDatasetResult result;
  result.instances.reserve(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const SupervisedInstance& in = instances[i];
    SupervisedInstance out = in;
    try {
      LabelDistribution p_a = [&]() -> LabelDistribution {
        switch (kind) {
          case SupervisionKind::kT1OC: return t1oc(in.p_star, in.y);
          case SupervisionKind::kT2OC: return t2oc(in.p_star, in.y);
          case SupervisionKind::kUniformOther:
            return uniform_other(in.y, in.p_star.num_classes());
          case SupervisionKind::kTrueRestricted:
            // A deterministic p_star has no off-class part to restrict; the
            // hard label already is the whole truth, so fall back to a
            // source that the forced lambda = 1 erases anyway.
            if (in.p_star.mass_excluding(in.y.class_index) <= 0.0) {
              return uniform_other(in.y, in.p_star.num_classes());
            }
            return restrict_exclude(in.p_star, in.y.class_index);
          case SupervisionKind::kCustom:
            return (*sources)[i];
        }
        throw Error("unreachable supervision kind");
      }();

      double lam = 0.0;
      if (policy.tag == LambdaPolicy::Tag::kOptimal) {
        if (kind == SupervisionKind::kTrueRestricted &&
            in.p_star.mass_excluding(in.y.class_index) <= 0.0) {
          lam = 1.0;  // matches the fallback above; p_lambda = p_star = dirac
        } else {
          lam = optimal_lambda(in.p_star, in.y, p_a);
        }
      } else {
        const LambdaInterval range = lambda_feasible_range(in.y, p_a);
        lam = range.clamp(policy.value);
        if (lam != policy.value) ++result.clamp_warnings;
      }

      out.p_lambda = affine_combine(in.y, p_a, lam);
      out.p_a = std::move(p_a);
      out.lambda = lam;
    } catch (const Error& e) {
      throw DataError("instance " + std::to_string(i) + ": " + e.what(),
                      static_cast<std::ptrdiff_t>(i));
    }
    result.instances.push_back(std::move(out));
  }
  return result;
}

}  // namespace softlabel
