#include "softlabel/bounds.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "softlabel/format.hpp"

namespace softlabel {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

MeanKlGap mean_kl_gap(const std::vector<SupervisedInstance>& instances) {
  if (instances.empty()) {
    throw DataError("mean KL gap over an empty dataset");
  }
  MeanKlGap gap;
  double exact_sum = 0.0;
  double smoothed_sum = 0.0;
  bool exact_infinite = false;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const SupervisedInstance& inst = instances[i];
    if (!inst.p_lambda) {
      throw DataError("instance " + std::to_string(i) + " lacks p_lambda",
                      static_cast<std::ptrdiff_t>(i));
    }
    const DivergenceValue v = kl(inst.p_star, *inst.p_lambda);
    if (std::isinf(v)) {
      exact_infinite = true;
    } else {
      exact_sum += v;
    }
    smoothed_sum += kl_smoothed(inst.p_star, *inst.p_lambda);
  }
  const double n = static_cast<double>(instances.size());
  gap.exact = exact_infinite ? kInf : exact_sum / n;
  gap.smoothed = smoothed_sum / n;
  return gap;
}

double risk_diff_bound(double m_l, DivergenceValue kl_value) {
  if (!(m_l > 0.0)) {
    throw Error("loss bound m_l must be positive");
  }
  if (kl_value < 0.0) {
    throw Error("KL value must be nonnegative");
  }
  return std::sqrt(2.0 * m_l * kl_value);
}

RiskGapReport check_risk_gap_bound(
    const std::vector<SupervisedInstance>& instances,
    const std::vector<std::vector<double>>& f_outputs,
    const std::function<double(const std::vector<double>&, int)>& loss,
    double m_l) {
  if (instances.size() != f_outputs.size()) {
    throw DataError("outputs length " + std::to_string(f_outputs.size()) +
                    " does not match dataset size " +
                    std::to_string(instances.size()));
  }
  if (instances.empty()) {
    throw DataError("risk-gap check over an empty dataset");
  }

  double risk_star = 0.0;
  double risk_lambda = 0.0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const SupervisedInstance& inst = instances[i];
    if (!inst.p_lambda) {
      throw DataError("instance " + std::to_string(i) + " lacks p_lambda",
                      static_cast<std::ptrdiff_t>(i));
    }
    for (int y = 0; y < inst.p_star.num_classes(); ++y) {
      const double l = loss(f_outputs[i], y);
      risk_star += inst.p_star[y] * l;
      risk_lambda += (*inst.p_lambda)[y] * l;
    }
  }
  const double n = static_cast<double>(instances.size());
  risk_star /= n;
  risk_lambda /= n;

  RiskGapReport report;
  report.lhs = std::abs(std::sqrt(risk_star) - std::sqrt(risk_lambda));
  report.rhs = risk_diff_bound(m_l, mean_kl_gap(instances).exact);
  report.holds = report.lhs <= report.rhs + 1e-9;
  return report;
}

void validate(const BoundInputs& inputs) {
  if (!(inputs.n >= 1.0)) throw ConfigError("n must be >= 1", "n");
  if (!(inputs.m_l > 0.0)) throw ConfigError("m_l must be > 0", "m_l");
  if (inputs.l_l < 0.0) throw ConfigError("l_l must be >= 0", "l_l");
  if (!(inputs.delta > 0.0 && inputs.delta < 1.0)) {
    throw ConfigError("delta must lie in (0,1)", "delta");
  }
  if (inputs.rademacher < 0.0) {
    throw ConfigError("rademacher must be >= 0", "rademacher");
  }
  if (inputs.d_quality < 0.0) {
    throw ConfigError("d_quality must be >= 0", "d_quality");
  }
  if (inputs.r_best < 0.0) throw ConfigError("r_best must be >= 0", "r_best");
}

BoundReport generalization_bound(const BoundInputs& inputs) {
  validate(inputs);
  const double m = inputs.m_l;
  const double d = inputs.d_quality;

  BoundReport report;
  report.r_best = inputs.r_best;
  const double conc =
      m * std::sqrt(std::log(1.0 / inputs.delta) / (2.0 * inputs.n));
  report.term_fast = 4.0 * inputs.l_l * inputs.rademacher + 2.0 * conc;
  // the braced group reuses half of term_fast: 2*L*r + M*sqrt(ln(1/d)/2n)
  report.term_cross =
      2.0 * std::sqrt(2.0 * m * d) *
      std::sqrt(0.5 * report.term_fast + inputs.r_best +
                m * std::sqrt(2.0 * d));
  report.term_asym = m * (2.0 * d + std::sqrt(2.0 * d));
  report.total =
      report.term_fast + report.term_cross + report.term_asym + report.r_best;
  report.vacuous = !std::isfinite(report.total);
  return report;
}

std::vector<RateRow> rate_crossover(const BoundInputs& base,
                                    const std::vector<double>& sizes,
                                    double rademacher_coef) {
  if (rademacher_coef < 0.0) {
    throw ConfigError("rademacher coefficient must be >= 0", "rademacher");
  }
  std::vector<RateRow> rows;
  rows.reserve(sizes.size());
  for (double n : sizes) {
    BoundInputs inputs = base;
    inputs.n = n;
    inputs.rademacher = rademacher_coef / std::sqrt(n);
    const BoundReport report = generalization_bound(inputs);
    RateRow row;
    row.n = n;
    row.term_fast = report.term_fast;
    // only the decaying part of the cross term; the constant remainder would
    // drown the n^-1/4 tail in any finite-n readout
    row.term_cross = 2.0 * std::sqrt(2.0 * inputs.m_l * inputs.d_quality) *
                     std::sqrt(0.5 * report.term_fast);
    row.term_asym = report.term_asym;
    row.total = report.total;
    rows.push_back(row);
  }
  return rows;
}

std::string rate_table_csv(const std::vector<RateRow>& rows) {
  std::ostringstream out;
  out << "n,term_fast,term_cross,term_asym,total\n";
  for (const RateRow& row : rows) {
    out << format_number(row.n) << ',' << format_number(row.term_fast) << ','
        << format_number(row.term_cross) << ','
        << format_number(row.term_asym) << ',' << format_number(row.total)
        << "\n";
  }
  return out.str();
}

}  // namespace softlabel
