#include "softlabel/mixing.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace softlabel {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double optimal_lambda(const LabelDistribution& p_star, HardLabel hard,
                      const LabelDistribution& p_a) {
  const int k = hard.class_index;
  if (p_star.num_classes() != p_a.num_classes()) {
    throw Error("class count mismatch between p_star and p_a");
  }
  if (k < 0 || k >= p_a.num_classes()) {
    throw Error("hard label out of range");
  }
  const double a = p_a[k];
  if (a >= 1.0) {
    throw DegenerateSupervisionError(
        "p_a puts all mass on the hard class; no lambda can move it");
  }
  // Solves p_lambda[k] = p_star[k]; the off-class proportions never depend
  // on lambda, so matching the hard-class mass is the whole problem.
  return (p_star[k] - a) / (1.0 - a);
}

DivergenceValue bias(const LabelDistribution& p_star, HardLabel hard,
                     const LabelDistribution& p_a) {
  const int k = hard.class_index;
  if (p_star.num_classes() != p_a.num_classes()) {
    throw Error("class count mismatch between p_star and p_a");
  }
  if (k < 0 || k >= p_star.num_classes()) {
    throw Error("hard label out of range");
  }
  const double off_star = p_star.mass_excluding(k);
  if (off_star <= 0.0) return 0.0;  // no off-class mass to mismatch
  if (p_a.mass_excluding(k) <= 0.0) return kInf;  // support violation
  return off_star *
         kl(restrict_exclude(p_star, k), restrict_exclude(p_a, k));
}

DivergenceValue variance(const LabelDistribution& p_star, HardLabel hard,
                         const LabelDistribution& p_lambda) {
  const int k = hard.class_index;
  if (p_star.num_classes() != p_lambda.num_classes()) {
    throw Error("class count mismatch between p_star and p_lambda");
  }
  if (k < 0 || k >= p_star.num_classes()) {
    throw Error("hard label out of range");
  }
  return binary_kl(p_star[k], p_lambda[k]);
}

DecompositionReport decompose(const LabelDistribution& p_star, HardLabel hard,
                              const LabelDistribution& p_a,
                              double lambda_used) {
  DecompositionReport report;
  report.lambda_used = lambda_used;
  report.feasible = lambda_feasible_range(hard, p_a);
  report.lambda_star = optimal_lambda(p_star, hard, p_a);
  const LabelDistribution p_lambda = affine_combine(hard, p_a, lambda_used);
  report.kl_total = kl(p_star, p_lambda);
  report.bias = bias(p_star, hard, p_a);
  report.variance = variance(p_star, hard, p_lambda);
  return report;
}

double brute_force_lambda(const LabelDistribution& p_star, HardLabel hard,
                          const LabelDistribution& p_a, double grid_step) {
  if (!(grid_step > 0.0)) {
    throw Error("grid step must be positive");
  }
  const LambdaInterval range = lambda_feasible_range(hard, p_a);
  const int k = hard.class_index;
  const int num = p_a.num_classes();

  // Direct evaluation of kl(p_star, p_lambda) on the grid, written out
  // long-hand on purpose: this is the oracle the closed form is checked
  // against, so it must not share code with optimal_lambda.
  double best_lambda = range.lo;
  double best_kl = kInf;
  const auto eval = [&](double lam) {
    double sum = 0.0;
    for (int y = 0; y < num; ++y) {
      const double py = p_star[y];
      if (py <= 0.0) continue;
      double qy = (1.0 - lam) * p_a[y];
      if (y == k) qy += lam;
      if (qy <= 0.0) {
        sum = kInf;
        break;
      }
      sum += py * std::log(py / qy);
    }
    if (sum < best_kl) {
      best_kl = sum;
      best_lambda = lam;
    }
  };

  const long long steps =
      static_cast<long long>(std::floor((range.hi - range.lo) / grid_step));
  for (long long i = 0; i <= steps; ++i) {
    eval(range.lo + static_cast<double>(i) * grid_step);
  }
  eval(range.hi);  // make sure the endpoint itself is on the grid
  return best_lambda;
}

}  // namespace softlabel
