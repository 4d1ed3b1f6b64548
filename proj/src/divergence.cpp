#include "softlabel/divergence.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace softlabel {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_k(const LabelDistribution& p, const LabelDistribution& q) {
  if (p.num_classes() != q.num_classes()) {
    throw Error("class count mismatch: " + std::to_string(p.num_classes()) +
                " vs " + std::to_string(q.num_classes()));
  }
}
}  // namespace

DivergenceValue kl(const LabelDistribution& p, const LabelDistribution& q) {
  require_same_k(p, q);
  double sum = 0.0;
  for (int y = 0; y < p.num_classes(); ++y) {
    const double py = p[y];
    if (py <= 0.0) continue;  // 0*ln(0/q) = 0
    const double qy = q[y];
    if (qy <= 0.0) return kInf;
    sum += py * std::log(py / qy);
  }
  // Gibbs: the true value is >= 0, tiny negatives are rounding
  return sum < 0.0 ? 0.0 : sum;
}

DivergenceValue binary_kl(double a, double b) {
  if (!(a >= 0.0 && a <= 1.0 && b >= 0.0 && b <= 1.0)) {
    throw Error("binary_kl arguments must lie in [0,1]");
  }
  double sum = 0.0;
  if (a > 0.0) {
    if (b <= 0.0) return kInf;
    sum += a * std::log(a / b);
  }
  if (a < 1.0) {
    if (b >= 1.0) return kInf;
    sum += (1.0 - a) * std::log((1.0 - a) / (1.0 - b));
  }
  return sum < 0.0 ? 0.0 : sum;
}

DivergenceValue hellinger_sq(const LabelDistribution& p,
                             const LabelDistribution& q) {
  require_same_k(p, q);
  double sum = 0.0;
  for (int y = 0; y < p.num_classes(); ++y) {
    const double d = std::sqrt(p[y]) - std::sqrt(q[y]);
    sum += d * d;
  }
  return 0.5 * sum;
}

DivergenceValue total_variation(const LabelDistribution& p,
                                const LabelDistribution& q) {
  require_same_k(p, q);
  double sum = 0.0;
  for (int y = 0; y < p.num_classes(); ++y) {
    sum += std::abs(p[y] - q[y]);
  }
  return 0.5 * sum;
}

DivergenceValue kl_smoothed(const LabelDistribution& p,
                            const LabelDistribution& q, double eps) {
  require_same_k(p, q);
  if (!(eps > 0.0 && eps < 1.0)) {
    throw Error("smoothing eps must lie in (0,1)");
  }
  const double u = 1.0 / q.num_classes();
  std::vector<double> mixed(static_cast<std::size_t>(q.num_classes()));
  for (int y = 0; y < q.num_classes(); ++y) {
    mixed[static_cast<std::size_t>(y)] = (1.0 - eps) * q[y] + eps * u;
  }
  return kl(p, LabelDistribution(std::move(mixed)));
}

}  // namespace softlabel
