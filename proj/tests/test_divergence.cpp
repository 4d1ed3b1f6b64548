#include "softlabel/divergence.hpp"

#include <cmath>
#include <limits>

#include "doctest.h"
#include "fuzz_helpers.hpp"
#include "softlabel/simplex.hpp"

using namespace softlabel;

namespace {

// independent summation used as the oracle for the frozen examples
double kl_by_hand(const LabelDistribution& p, const LabelDistribution& q) {
  double acc = 0.0;
  for (int y = 0; y < p.num_classes(); ++y) {
    if (p[y] == 0.0) continue;
    if (q[y] == 0.0) return std::numeric_limits<double>::infinity();
    acc += p[y] * std::log(p[y] / q[y]);
  }
  return acc;
}

}  // namespace

TEST_CASE("kl frozen examples") {
  const LabelDistribution p({2.0 / 3.0, 1.0 / 3.0});
  const LabelDistribution q({0.5, 0.5});
  const double want = (2.0 / 3.0) * std::log(4.0 / 3.0) +
                      (1.0 / 3.0) * std::log(2.0 / 3.0);
  CHECK(kl(p, q) == doctest::Approx(want).epsilon(1e-14));
  CHECK(kl(p, q) == doctest::Approx(0.056633).epsilon(1e-4));
  CHECK(kl(p, q) == doctest::Approx(kl_by_hand(p, q)).epsilon(1e-15));

  CHECK(kl(p, p) == 0.0);
  CHECK(kl(dirac(0, 2), dirac(0, 2)) == 0.0);
}

TEST_CASE("kl support violations are exact infinity") {
  const LabelDistribution p({0.5, 0.5});
  const LabelDistribution q({1.0, 0.0});
  CHECK(std::isinf(kl(p, q)));
  CHECK(kl(p, q) > 0.0);

  // zero p coordinate contributes nothing even against zero q
  const LabelDistribution r({1.0, 0.0});
  CHECK(kl(r, r) == 0.0);
}

TEST_CASE("kl_smoothed tames support violations") {
  const LabelDistribution p({0.5, 0.5});
  const LabelDistribution q({1.0, 0.0});
  const double v = kl_smoothed(p, q, 1e-6);
  CHECK(std::isfinite(v));
  CHECK(v > 0.0);

  // on full-support pairs smoothing is a tiny perturbation
  const LabelDistribution a({0.7, 0.3});
  const LabelDistribution b({0.4, 0.6});
  CHECK(std::abs(kl_smoothed(a, b, 1e-6) - kl(a, b)) < 1e-5);
}

TEST_CASE("binary_kl frozen example") {
  const double want = 0.7 * std::log(0.7 / 0.9) + 0.3 * std::log(0.3 / 0.1);
  CHECK(binary_kl(0.7, 0.9) == doctest::Approx(want).epsilon(1e-14));
  CHECK(binary_kl(0.7, 0.9) ==
        doctest::Approx(0.15366358680379852).epsilon(1e-12));
  CHECK(binary_kl(0.5, 0.5) == 0.0);
  CHECK(std::isinf(binary_kl(0.5, 0.0)));
  CHECK(std::isinf(binary_kl(0.5, 1.0)));
  CHECK(binary_kl(0.0, 0.3) == doctest::Approx(std::log(1.0 / 0.7)).epsilon(1e-14));
  CHECK(binary_kl(1.0, 0.9) == doctest::Approx(std::log(1.0 / 0.9)).epsilon(1e-14));
  CHECK_THROWS_AS(binary_kl(-0.1, 0.5), Error);
  CHECK_THROWS_AS(binary_kl(0.5, 1.1), Error);
}

TEST_CASE("binary_kl agrees with kl on two classes") {
  SplitMix64 rng(77);
  for (int trial = 0; trial < 1000; ++trial) {
    const double a = rng.next_double();
    const double b = 0.001 + 0.998 * rng.next_double();
    const LabelDistribution p({a, 1.0 - a});
    const LabelDistribution q({b, 1.0 - b});
    CHECK(std::abs(binary_kl(a, b) - kl(p, q)) < 1e-12);
  }
}

TEST_CASE("hellinger frozen example") {
  const LabelDistribution p({1.0, 0.0});
  const LabelDistribution q({0.5, 0.5});
  const double want = 1.0 - std::sqrt(0.5);
  CHECK(hellinger_sq(p, q) == doctest::Approx(want).epsilon(1e-14));
  CHECK(hellinger_sq(p, q) ==
        doctest::Approx(0.2928932188134524).epsilon(1e-12));
  CHECK(hellinger_sq(p, p) == 0.0);
}

TEST_CASE("total variation basics") {
  const LabelDistribution p({1.0, 0.0});
  const LabelDistribution q({0.5, 0.5});
  // half-L1 convention: (|0.5| + |0.5|) / 2
  CHECK(total_variation(p, q) == doctest::Approx(0.5).epsilon(1e-14));
  // largest-event form agrees: mass p puts on class 0 beyond q
  CHECK(total_variation(p, q) == doctest::Approx(p[0] - q[0]).epsilon(1e-14));
  CHECK(total_variation(p, p) == 0.0);
}

TEST_CASE("kl is asymmetric") {
  const LabelDistribution p({0.9, 0.1});
  const LabelDistribution q({0.5, 0.5});
  CHECK(kl(p, q) != kl(q, p));
}

TEST_CASE("pinsker and hellinger inequalities hold under fuzz") {
  SplitMix64 rng(404);
  for (int trial = 0; trial < 2000; ++trial) {
    const int num = 2 + static_cast<int>(rng.next_below(9));
    const LabelDistribution p = testutil::random_distribution(rng, num);
    const LabelDistribution q = testutil::random_distribution(rng, num);
    const double d = kl(p, q);
    const double tv = total_variation(p, q);
    const double h2 = hellinger_sq(p, q);

    CHECK(d >= -1e-15);
    CHECK(tv * tv <= 0.5 * d + 1e-12);   // Pinsker
    CHECK(2.0 * h2 <= d + 1e-12);        // Hellinger lower bound
  }
}

TEST_CASE("kl matches hand summation under fuzz") {
  SplitMix64 rng(405);
  for (int trial = 0; trial < 1000; ++trial) {
    const int num = 2 + static_cast<int>(rng.next_below(9));
    const LabelDistribution p = testutil::random_distribution(rng, num);
    const LabelDistribution q = testutil::random_distribution(rng, num);
    CHECK(std::abs(kl(p, q) - kl_by_hand(p, q)) < 1e-12);
    CHECK(kl(p, p) == 0.0);
  }
}
