#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "tubebem/common.hpp"

namespace tubebem {

/// Gauss-Legendre rule on [-1,1].
struct gauss_rule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// Nodes by Newton iteration on the Legendre recurrence, weights from the
/// derivative; exact for polynomials of degree 2n-1.
inline gauss_rule gauss_legendre(int n) {
  if (n < 1) throw config_error("gauss_legendre: order must be >= 1");
  gauss_rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

/// Maps a [-1,1] rule node/weight pair onto [a,b].
inline std::pair<double, double> map_to_interval(const gauss_rule& rule,
                                                 std::size_t k, double a,
                                                 double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  return {mid + half * rule.nodes[k], half * rule.weights[k]};
}

}  // namespace tubebem
