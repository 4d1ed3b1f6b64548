#pragma once

#include "softlabel/divergence.hpp"
#include "softlabel/simplex.hpp"

namespace softlabel {

// Weight minimizing kl(p_star, affine_combine(hard, p_a, lambda)) over the
// feasible interval: (p_star[hard] - p_a[hard]) / (1 - p_a[hard]). Can be
// negative. Requires p_a[hard] < 1.
double optimal_lambda(const LabelDistribution& p_star, HardLabel hard,
                      const LabelDistribution& p_a);

// Irreducible part of the divergence: (1 - p_star[hard]) times the KL between
// the off-class conditionals of p_star and p_a. Does not depend on lambda.
DivergenceValue bias(const LabelDistribution& p_star, HardLabel hard,
                     const LabelDistribution& p_a);

// Binary KL between the hard-class masses of p_star and p_lambda.
DivergenceValue variance(const LabelDistribution& p_star, HardLabel hard,
                         const LabelDistribution& p_lambda);

struct DecompositionReport {
  double kl_total = 0.0;
  double bias = 0.0;
  double variance = 0.0;
  double lambda_star = 0.0;
  double lambda_used = 0.0;
  LambdaInterval feasible;
};

// Full split of kl(p_star, p_lambda(lambda_used)) into the lambda-free and
// lambda-dependent parts. kl_total == bias + variance up to float error.
DecompositionReport decompose(const LabelDistribution& p_star, HardLabel hard,
                              const LabelDistribution& p_a, double lambda_used);

// Grid scan over the feasible interval, step grid_step, ties toward smaller
// lambda. Deliberately direct so it can serve as the oracle for
// optimal_lambda.
double brute_force_lambda(const LabelDistribution& p_star, HardLabel hard,
                          const LabelDistribution& p_a, double grid_step);

}  // namespace softlabel
