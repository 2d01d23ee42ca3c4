#pragma once

#include <functional>
#include <vector>

namespace chic::quad {

// Cubic Hermite interpolation table on a uniform grid. Values and first
// derivatives are stored per node; evaluation is C^1 and reproduces cubics
// exactly on each interval.
struct HermiteTable {
  double x0 = 0.0;
  double x1 = 1.0;
  std::vector<double> value;
  std::vector<double> deriv;

  int node_count() const { return static_cast<int>(value.size()); }
  double spacing() const { return (x1 - x0) / (node_count() - 1); }
  bool empty() const { return value.empty(); }

  // pre: x within [x0, x1] up to roundoff (clamped).
  double eval(double x) const;
  double eval_deriv(double x) const;

  static HermiteTable build(const std::function<double(double)>& f,
                            const std::function<double(double)>& df,
                            double x0, double x1, int nodes);
};

// Odd extension about x = 0 of a table defined on [0, x1]: f(-x) = -f(x)
// holds exactly by construction of the reflection.
inline double eval_odd(const HermiteTable& t, double x) {
  return x < 0.0 ? -t.eval(-x) : t.eval(x);
}

}  // namespace chic::quad
