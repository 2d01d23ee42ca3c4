#include "chic/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "chic/errors.hpp"

namespace chic::quad {

namespace {

Rule compute_rule(int n) {
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  // Newton iteration on P_n from the Chebyshev-based initial guess; nodes are
  // symmetric, only the lower half is computed.
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

struct Panel {
  double a, b, value, error;
  int depth;
};

}  // namespace

const Rule& gauss_legendre(int n) {
  if (n < 1) throw Error("gauss_legendre: order must be >= 1");
  static std::map<int, Rule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
  return it->second;
}

double integrate_fixed(const std::function<double(double)>& f, const Rule& rule,
                       double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    s += rule.weights[i] * f(c + h * rule.nodes[i]);
  return s * h;
}

AdaptiveResult integrate_adaptive(const std::function<double(double)>& f,
                                  double a, double b,
                                  const AdaptiveOptions& opts) {
  const Rule& r16 = gauss_legendre(16);
  const Rule& r8 = gauss_legendre(8);
  AdaptiveResult res;

  auto eval_panel = [&](double lo, double hi, int depth) {
    const double mid = 0.5 * (lo + hi);
    Panel p;
    p.a = lo;
    p.b = hi;
    p.depth = depth;
    p.value = integrate_fixed(f, r16, lo, hi);
    const double coarse =
        integrate_fixed(f, r8, lo, mid) + integrate_fixed(f, r8, mid, hi);
    p.error = std::abs(p.value - coarse);
    res.evaluations += 32;
    return p;
  };

  Panel whole = eval_panel(a, b, 0);
  const double tol0 =
      std::max(opts.abs_tol, opts.rel_tol * std::abs(whole.value));

  std::vector<Panel> stack{whole};
  double total = 0.0;
  double err_total = 0.0;
  bool converged = true;
  while (!stack.empty()) {
    Panel p = stack.back();
    stack.pop_back();
    // Equal split of the tolerance across bisections keeps the accepted-panel
    // error budget bounded by tol0.
    const double tol_local = std::ldexp(tol0, -p.depth);
    const double mid = 0.5 * (p.a + p.b);
    const bool splittable = mid > p.a && mid < p.b && p.depth < opts.max_depth;
    if (p.error <= tol_local || !splittable) {
      if (p.error > tol_local) converged = false;
      total += p.value;
      err_total += p.error;
      res.max_depth_used = std::max(res.max_depth_used, p.depth);
      continue;
    }
    stack.push_back(eval_panel(p.a, mid, p.depth + 1));
    stack.push_back(eval_panel(mid, p.b, p.depth + 1));
  }
  res.value = total;
  res.error_estimate = err_total;
  if (!converged && err_total > std::max(opts.abs_tol, opts.rel_tol * std::abs(total)))
    throw QuadratureError("integrate_adaptive: tolerance not met", total,
                          err_total);
  return res;
}

}  // namespace chic::quad
