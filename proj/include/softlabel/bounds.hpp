#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "softlabel/divergence.hpp"
#include "softlabel/instance.hpp"

namespace softlabel {

struct MeanKlGap {
  DivergenceValue exact = 0.0;  // +inf if any instance violates support
  double smoothed = 0.0;        // same mean with kl_smoothed terms
};

// Mean over instances of kl(p_star, p_lambda). Requires both present.
MeanKlGap mean_kl_gap(const std::vector<SupervisedInstance>& instances);

// sqrt(2 * m_l * kl_value); the risk-gap bound for losses bounded by m_l.
double risk_diff_bound(double m_l, DivergenceValue kl_value);

struct RiskGapReport {
  double lhs = 0.0;  // |sqrt(risk over p_star) - sqrt(risk over p_lambda)|
  double rhs = 0.0;  // risk_diff_bound(m_l, mean_kl_gap)
  bool holds = false;
};

// f_outputs[i] is the model's prediction for instance i; loss(output, y) is
// bounded by m_l. Throws DataError when the lengths disagree.
RiskGapReport check_risk_gap_bound(
    const std::vector<SupervisedInstance>& instances,
    const std::vector<std::vector<double>>& f_outputs,
    const std::function<double(const std::vector<double>&, int)>& loss,
    double m_l);

struct BoundInputs {
  double n = 1.0;  // sample count; double so sweeps reach 1e12 without care
  double m_l = 1.0;
  double l_l = 1.0;
  double delta = 0.05;
  double rademacher = 0.0;
  double d_quality = 0.0;  // mean KL gap, may be +inf
  double r_best = 0.0;
};

void validate(const BoundInputs& inputs);

struct BoundReport {
  double term_fast = 0.0;   // 4*L*r + 2*M*sqrt(ln(1/delta)/(2n))
  double term_cross = 0.0;  // 2*sqrt(2*M*D) * sqrt(term_fast/2 + r_best + M*sqrt(2D))
  double term_asym = 0.0;   // M*(2D + sqrt(2D))
  double r_best = 0.0;
  double total = 0.0;       // sum of the four parts; +inf iff d_quality is
  bool vacuous = false;     // true when the bound carries no information
};

// The full high-probability risk bound, grouped exactly as stated: total =
// term_fast + term_cross + term_asym + r_best.
BoundReport generalization_bound(const BoundInputs& inputs);

struct RateRow {
  double n = 0.0;
  double term_fast = 0.0;
  // Decaying part of the cross term only: 2*sqrt(2*M*D) *
  // sqrt(2*L*r + M*sqrt(ln(1/delta)/(2n))). This is the piece with the n^-1/4
  // tail; the constant remainder of the cross term sits in neither column.
  double term_cross = 0.0;
  double term_asym = 0.0;
  double total = 0.0;  // the full bound at this n, from generalization_bound
};

// Sweep over sample sizes with rademacher = rademacher_coef / sqrt(n),
// exposing the n^-1/2 vs n^-1/4 crossover.
std::vector<RateRow> rate_crossover(const BoundInputs& base,
                                    const std::vector<double>& sizes,
                                    double rademacher_coef);

// Header: n,term_fast,term_cross,term_asym,total
std::string rate_table_csv(const std::vector<RateRow>& rows);

}  // namespace softlabel
