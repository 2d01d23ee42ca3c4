#include "chic/hermite_table.hpp"

#include <algorithm>
#include <cmath>

#include "chic/errors.hpp"

namespace chic::quad {

namespace {

struct Basis {
  int i;
  double t, h;
};

Basis locate(const HermiteTable& tab, double x) {
  const int n = tab.node_count();
  const double h = tab.spacing();
  double s = (x - tab.x0) / h;
  int i = static_cast<int>(std::floor(s));
  i = std::clamp(i, 0, n - 2);
  double t = (x - (tab.x0 + i * h)) / h;
  t = std::clamp(t, 0.0, 1.0);
  return {i, t, h};
}

}  // namespace

double HermiteTable::eval(double x) const {
  const auto [i, t, h] = locate(*this, x);
  const double omt = 1.0 - t;
  const double h00 = (1.0 + 2.0 * t) * omt * omt;
  const double h10 = t * omt * omt;
  const double h01 = t * t * (3.0 - 2.0 * t);
  const double h11 = t * t * (t - 1.0);
  return h00 * value[i] + h10 * h * deriv[i] + h01 * value[i + 1] +
         h11 * h * deriv[i + 1];
}

double HermiteTable::eval_deriv(double x) const {
  const auto [i, t, h] = locate(*this, x);
  const double d00 = 6.0 * t * (t - 1.0);
  const double d10 = (1.0 - t) * (1.0 - 3.0 * t);
  const double d01 = -d00;
  const double d11 = t * (3.0 * t - 2.0);
  return (d00 * value[i] + d01 * value[i + 1]) / h + d10 * deriv[i] +
         d11 * deriv[i + 1];
}

HermiteTable HermiteTable::build(const std::function<double(double)>& f,
                                 const std::function<double(double)>& df,
                                 double x0, double x1, int nodes) {
  if (nodes < 2) throw Error("HermiteTable::build: need at least 2 nodes");
  if (!(x1 > x0)) throw Error("HermiteTable::build: empty domain");
  HermiteTable tab;
  tab.x0 = x0;
  tab.x1 = x1;
  tab.value.resize(nodes);
  tab.deriv.resize(nodes);
  const double h = (x1 - x0) / (nodes - 1);
  for (int i = 0; i < nodes; ++i) {
    const double x = i == nodes - 1 ? x1 : x0 + i * h;
    tab.value[i] = f(x);
    tab.deriv[i] = df(x);
  }
  return tab;
}

}  // namespace chic::quad
