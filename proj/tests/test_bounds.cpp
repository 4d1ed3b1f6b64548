#include "softlabel/bounds.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "fuzz_helpers.hpp"
#include "softlabel/mixing.hpp"
#include "softlabel/supervision.hpp"

using namespace softlabel;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SupervisedInstance with_mix(const LabelDistribution& p_star, int y,
                            const LabelDistribution& p_lambda) {
  SupervisedInstance inst{{0.0}, {y}, p_star, {}, {}, {}};
  inst.p_lambda = p_lambda;
  return inst;
}

// least-squares slope of log(value) against log(n)
double loglog_slope(const std::vector<RateRow>& rows,
                    double RateRow::*member) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(rows.size());
  for (const RateRow& row : rows) {
    const double x = std::log(row.n);
    const double y = std::log(row.*member);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("mean kl gap worked cases") {
  std::vector<SupervisedInstance> data;
  data.push_back(with_mix(LabelDistribution({0.7, 0.2, 0.1}), 0,
                          affine_combine({0}, LabelDistribution({0.0, 0.5, 0.5}),
                                         0.9)));
  data.push_back(with_mix(LabelDistribution({0.7, 0.2, 0.1}), 0,
                          LabelDistribution({0.7, 0.2, 0.1})));
  const MeanKlGap gap = mean_kl_gap(data);
  // (0.17065349048333828 + 0) / 2
  CHECK(gap.exact == doctest::Approx(0.08532674524166914).epsilon(1e-12));
  CHECK(gap.smoothed == doctest::Approx(gap.exact).epsilon(1e-3));

  // one support violation pushes the exact mean to infinity but not the
  // smoothed one
  data.push_back(with_mix(LabelDistribution({0.5, 0.5}), 0, dirac(0, 2)));
  // mixed class counts are fine for the gap; each instance stands alone
  const MeanKlGap broken = mean_kl_gap(data);
  CHECK(std::isinf(broken.exact));
  CHECK(std::isfinite(broken.smoothed));

  CHECK_THROWS_AS(mean_kl_gap({}), DataError);

  std::vector<SupervisedInstance> missing;
  missing.push_back({{0.0}, {0}, LabelDistribution({0.5, 0.5}), {}, {}, {}});
  CHECK_THROWS_AS(mean_kl_gap(missing), DataError);
}

TEST_CASE("risk diff bound worked cases") {
  CHECK(risk_diff_bound(1.0, 0.0) == 0.0);
  // sqrt(2 * 2 * ln 2) = sqrt(4 ln 2)
  CHECK(risk_diff_bound(2.0, std::log(2.0)) ==
        doctest::Approx(1.6651092223153954).epsilon(1e-12));
  CHECK(std::isinf(risk_diff_bound(1.0, kInf)));
  CHECK_THROWS_AS(risk_diff_bound(0.0, 0.5), Error);
  CHECK_THROWS_AS(risk_diff_bound(-1.0, 0.5), Error);

  // scaling: quadrupling m_l doubles the bound
  SplitMix64 rng(1001);
  for (int trial = 0; trial < 200; ++trial) {
    const double m = 0.1 + rng.next_double() * 5.0;
    const double v = rng.next_double() * 3.0;
    CHECK(risk_diff_bound(4.0 * m, v) ==
          doctest::Approx(2.0 * risk_diff_bound(m, v)).epsilon(1e-12));
  }
}

TEST_CASE("risk gap check with identical distributions is trivially tight") {
  std::vector<SupervisedInstance> data;
  data.push_back(with_mix(LabelDistribution({0.6, 0.4}), 0,
                          LabelDistribution({0.6, 0.4})));
  std::vector<std::vector<double>> outs{{0.8, 0.2}};
  const auto loss = [](const std::vector<double>& out, int y) {
    const double diff = 1.0 - out[static_cast<size_t>(y)];
    return diff * diff;
  };
  const RiskGapReport rep = check_risk_gap_bound(data, outs, loss, 1.0);
  CHECK(rep.lhs == 0.0);
  CHECK(rep.rhs == 0.0);
  CHECK(rep.holds);
}

TEST_CASE("risk gap check worked single instance") {
  // p_star = [0.7,0.3], p_lambda = [0.9,0.1], output [1,0], squared error
  // capped by 1. risks: star = 0.7*0 + 0.3*1 = 0.3; lambda = 0.1.
  std::vector<SupervisedInstance> data;
  data.push_back(with_mix(LabelDistribution({0.7, 0.3}), 0,
                          LabelDistribution({0.9, 0.1})));
  std::vector<std::vector<double>> outs{{1.0, 0.0}};
  const auto loss = [](const std::vector<double>& out, int y) {
    const double diff = 1.0 - out[static_cast<size_t>(y)];
    return diff * diff;
  };
  const RiskGapReport rep = check_risk_gap_bound(data, outs, loss, 1.0);
  CHECK(rep.lhs == doctest::Approx(std::sqrt(0.3) - std::sqrt(0.1)).epsilon(1e-12));
  CHECK(rep.rhs ==
        doctest::Approx(std::sqrt(2.0 * binary_kl(0.7, 0.9))).epsilon(1e-12));
  CHECK(rep.holds);

  std::vector<std::vector<double>> misaligned;
  CHECK_THROWS_AS(check_risk_gap_bound(data, misaligned, loss, 1.0), DataError);
}

TEST_CASE("risk gap inequality holds on random sets") {
  SplitMix64 rng(1002);
  const auto loss = [](const std::vector<double>& out, int y) {
    const double diff = 1.0 - out[static_cast<size_t>(y)];
    return std::min(1.0, diff * diff);
  };
  for (int trial = 0; trial < 200; ++trial) {
    const int num = 2 + static_cast<int>(rng.next_below(4));
    const int size = 1 + static_cast<int>(rng.next_below(8));
    std::vector<SupervisedInstance> data;
    std::vector<std::vector<double>> outs;
    for (int i = 0; i < size; ++i) {
      const int y = static_cast<int>(rng.next_below(num));
      const LabelDistribution ps =
          testutil::random_distribution_floored(rng, num, 1e-3);
      const LabelDistribution pa =
          testutil::random_source_capped(rng, num, y, 0.9);
      const LambdaInterval range = lambda_feasible_range({y}, pa);
      const double lam = testutil::random_feasible_lambda(rng, range);
      data.push_back(with_mix(ps, y, affine_combine({y}, pa, lam)));
      std::vector<double> out(num);
      for (double& v : out) v = rng.next_double();
      outs.push_back(out);
    }
    const RiskGapReport rep = check_risk_gap_bound(data, outs, loss, 1.0);
    CHECK(rep.holds);
  }
}

TEST_CASE("bound input validation names the field") {
  BoundInputs inputs;
  inputs.delta = 1.5;
  try {
    validate(inputs);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "delta");
  }
  inputs = BoundInputs{};
  inputs.n = 0.0;
  CHECK_THROWS_AS(validate(inputs), ConfigError);
  inputs = BoundInputs{};
  inputs.d_quality = -0.1;
  CHECK_THROWS_AS(validate(inputs), ConfigError);
}

TEST_CASE("bound with zero gap collapses to the fast terms") {
  BoundInputs inputs;
  inputs.n = 100.0;
  inputs.m_l = 1.0;
  inputs.l_l = 1.0;
  inputs.delta = 0.05;
  inputs.rademacher = 0.02;
  inputs.d_quality = 0.0;
  inputs.r_best = 0.3;
  const BoundReport rep = generalization_bound(inputs);
  CHECK(rep.term_cross == 0.0);
  CHECK(rep.term_asym == 0.0);
  const double conc = std::sqrt(std::log(20.0) / 200.0);
  CHECK(rep.term_fast == doctest::Approx(0.08 + 2.0 * conc).epsilon(1e-12));
  CHECK(rep.total == doctest::Approx(rep.term_fast + 0.3).epsilon(1e-12));
  CHECK_FALSE(rep.vacuous);
}

TEST_CASE("bound matches a straight-line transcription") {
  BoundInputs inputs;
  inputs.n = 1e4;
  inputs.m_l = 1.0;
  inputs.l_l = 1.0;
  inputs.delta = 0.05;
  inputs.rademacher = 0.01;
  inputs.d_quality = 0.01;
  inputs.r_best = 0.1;
  const BoundReport rep = generalization_bound(inputs);

  // written out term by term, sharing nothing with the library path
  const double M = 1.0, L = 1.0, D = 0.01, rb = 0.1;
  const double conc = M * std::sqrt(std::log(1.0 / 0.05) / (2.0 * 1e4));
  const double fast = 4.0 * L * 0.01 + 2.0 * conc;
  const double brace = 2.0 * L * 0.01 + conc + rb + M * std::sqrt(2.0 * D);
  const double cross = 2.0 * std::sqrt(2.0 * M * D) * std::sqrt(brace);
  const double asym = M * (2.0 * D + std::sqrt(2.0 * D));
  const double total = fast + cross + asym + rb;

  CHECK(rep.term_fast == doctest::Approx(fast).epsilon(1e-12));
  CHECK(rep.term_cross == doctest::Approx(cross).epsilon(1e-12));
  CHECK(rep.term_asym == doctest::Approx(asym).epsilon(1e-12));
  CHECK(rep.total == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("bound approaches its asymptote as n grows") {
  BoundInputs inputs;
  inputs.n = 1e12;
  inputs.m_l = 1.0;
  inputs.l_l = 1.0;
  inputs.delta = 0.05;
  inputs.rademacher = 0.0;
  inputs.d_quality = 1.0;
  inputs.r_best = 0.5;
  const BoundReport rep = generalization_bound(inputs);

  // n -> inf limit: cross = 2*sqrt(2D)*sqrt(r_best + sqrt(2D)),
  // asym = 2D + sqrt(2D), total = cross + asym + r_best
  const double s = std::sqrt(2.0);
  const double limit_cross = 2.0 * s * std::sqrt(0.5 + s);
  const double limit = limit_cross + (2.0 + s) + 0.5;
  CHECK(std::abs(rep.total - limit) / limit < 1e-6);
}

TEST_CASE("bound is additive in its parts") {
  SplitMix64 rng(1003);
  for (int trial = 0; trial < 200; ++trial) {
    BoundInputs inputs;
    inputs.n = 10.0 + rng.next_double() * 1e6;
    inputs.m_l = 0.5 + rng.next_double();
    inputs.l_l = rng.next_double();
    inputs.delta = 0.01 + rng.next_double() * 0.5;
    inputs.rademacher = rng.next_double() * 0.1;
    inputs.d_quality = rng.next_double();
    inputs.r_best = rng.next_double();
    const BoundReport rep = generalization_bound(inputs);
    CHECK(rep.total == doctest::Approx(rep.term_fast + rep.term_cross +
                                       rep.term_asym + rep.r_best)
                           .epsilon(1e-12));
    CHECK(rep.term_fast >= 0.0);
    CHECK(rep.term_cross >= 0.0);
    CHECK(rep.term_asym >= 0.0);
  }
}

TEST_CASE("infinite gap makes the bound vacuous") {
  BoundInputs inputs;
  inputs.n = 1000.0;
  inputs.d_quality = kInf;
  const BoundReport rep = generalization_bound(inputs);
  CHECK(std::isinf(rep.total));
  CHECK(rep.vacuous);

  inputs.d_quality = 0.5;
  CHECK_FALSE(generalization_bound(inputs).vacuous);
}

TEST_CASE("bound is monotone in quality, best risk, and sample count") {
  SplitMix64 rng(1004);
  for (int trial = 0; trial < 200; ++trial) {
    BoundInputs inputs;
    inputs.n = 10.0 + rng.next_double() * 1e5;
    inputs.m_l = 0.5 + rng.next_double();
    inputs.l_l = rng.next_double();
    inputs.delta = 0.01 + rng.next_double() * 0.5;
    inputs.rademacher = rng.next_double() * 0.1;
    inputs.d_quality = rng.next_double();
    inputs.r_best = rng.next_double();
    const double base = generalization_bound(inputs).total;

    BoundInputs worse_gap = inputs;
    worse_gap.d_quality += 0.5;
    CHECK(generalization_bound(worse_gap).total > base);

    BoundInputs worse_best = inputs;
    worse_best.r_best += 0.5;
    CHECK(generalization_bound(worse_best).total > base);

    BoundInputs fewer = inputs;
    fewer.n = inputs.n / 4.0;
    CHECK(generalization_bound(fewer).total > base);
  }
}

TEST_CASE("rate sweep slopes separate the two regimes") {
  BoundInputs base;
  base.m_l = 1.0;
  base.l_l = 1.0;
  base.delta = 0.05;
  base.d_quality = 0.01;
  base.r_best = 0.1;

  std::vector<double> sizes;
  for (double n = 1e3; n <= 1e7 + 1.0; n *= std::pow(10.0, 0.25)) {
    sizes.push_back(n);
  }
  const std::vector<RateRow> rows = rate_crossover(base, sizes, 1.0);
  REQUIRE(rows.size() == sizes.size());

  // term_fast = (4L coef + 2M sqrt(ln(1/delta)/2)) / sqrt(n): slope -1/2 on
  // the nose; the quoted cross term decays exactly like n^-1/4
  const double fast_slope = loglog_slope(rows, &RateRow::term_fast);
  const double cross_slope = loglog_slope(rows, &RateRow::term_cross);
  CHECK(std::abs(fast_slope - (-0.5)) < 1e-9);
  CHECK(std::abs(cross_slope - (-0.25)) < 1e-9);

  // fast starts above, cross ends above: a crossover happened inside the sweep
  CHECK(rows.front().term_fast > rows.front().term_cross);
  CHECK(rows.back().term_cross > rows.back().term_fast);

  // zero quality wipes out the slow term entirely
  BoundInputs zero = base;
  zero.d_quality = 0.0;
  for (const RateRow& row : rate_crossover(zero, sizes, 1.0)) {
    CHECK(row.term_cross == 0.0);
  }
}

TEST_CASE("rate table renders the advertised header and shape") {
  BoundInputs base;
  base.d_quality = 0.01;
  base.r_best = 0.1;
  const std::vector<RateRow> rows =
      rate_crossover(base, {1000.0, 10000.0}, 1.0);
  const std::string csv = rate_table_csv(rows);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "n,term_fast,term_cross,term_asym,total");
  int count = 0;
  while (std::getline(in, line)) {
    if (!line.empty()) ++count;
    CHECK(line.find("1000") != std::string::npos);
  }
  CHECK(count == 2);
  // integral n renders without an exponent
  CHECK(csv.find("\n1000,") != std::string::npos);
  CHECK(csv.find("\n10000,") != std::string::npos);
}
