#pragma once

#include <functional>
#include <vector>

namespace chic::quad {

// Gauss-Legendre rule on [-1,1]; exact for polynomials of degree 2n-1.
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int exactness_degree() const { return 2 * static_cast<int>(nodes.size()) - 1; }
};

// Nodes/weights by Newton iteration on P_n; cached per n.
const Rule& gauss_legendre(int n);

struct AdaptiveOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  int max_depth = 48;
};

struct AdaptiveResult {
  double value = 0.0;
  double error_estimate = 0.0;
  long long evaluations = 0;
  int max_depth_used = 0;
};

double integrate_fixed(const std::function<double(double)>& f, const Rule& rule,
                       double a, double b);

// Panel bisection with embedded error estimate: per panel the 16-point value
// is compared against the sum of two 8-point half-panel values; panels that
// miss their tolerance share are bisected. Throws QuadratureError (carrying
// the best estimate) if the tolerance cannot be met within max_depth.
AdaptiveResult integrate_adaptive(const std::function<double(double)>& f,
                                  double a, double b,
                                  const AdaptiveOptions& opts = {});

}  // namespace chic::quad
