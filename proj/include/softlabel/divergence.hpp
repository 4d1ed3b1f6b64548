#pragma once

#include "softlabel/simplex.hpp"

namespace softlabel {

// Divergences return nonnegative doubles in nats. Support violations
// (p > 0 where q == 0) yield +infinity in-band, not an exception.
using DivergenceValue = double;

DivergenceValue kl(const LabelDistribution& p, const LabelDistribution& q);

// KL between Bernoulli(a) and Bernoulli(b), a and b in [0, 1].
DivergenceValue binary_kl(double a, double b);

// Squared Hellinger distance, (1/2) * sum (sqrt(p) - sqrt(q))^2. Max 1.
DivergenceValue hellinger_sq(const LabelDistribution& p,
                             const LabelDistribution& q);

// (1/2) * sum |p - q|. Max 1.
DivergenceValue total_variation(const LabelDistribution& p,
                                const LabelDistribution& q);

inline constexpr double kKlSmoothEps = 1e-6;

// kl(p, (1-eps)*q + eps*uniform). Always finite; for reporting where
// downstream arithmetic cannot absorb infinity. Never used inside
// tests that verify exact identities and inequalities.
DivergenceValue kl_smoothed(const LabelDistribution& p,
                            const LabelDistribution& q,
                            double eps = kKlSmoothEps);

}  // namespace softlabel
