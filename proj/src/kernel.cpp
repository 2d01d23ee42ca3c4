#include "chic/kernel.hpp"

#include <cmath>
#include <cstdio>

#include "chic/errors.hpp"
#include "chic/quadrature.hpp"

namespace chic::kernel {

namespace {

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

// Shaping factor S(u); density = (1-u^2)^k * S.
double shape_factor(const KernelSpec& s, double u) {
  const double u2 = u * u;
  switch (s.family) {
    case Family::Mass:
    case Family::Polynomial:
      return 1.0;
    case Family::ExpShaped:
      if (s.endpoint_vanishing)
        // exp(b u^2) - exp(b) = exp(b) * expm1(-b (1-u^2)), cancellation-free
        return std::exp(s.beta2) * std::expm1(-s.beta2 * (1.0 - u2));
      return std::exp(s.beta2 * u2);
    case Family::RationalEV:
      // 1/(1+q u^2) - 1/(1+q) = q (1-u^2) / ((1+q u^2)(1+q))
      return s.q * (1.0 - u2) / ((1.0 + s.q * u2) * (1.0 + s.q));
    case Family::PadeEV:
      // (1+p u^4)/(1+q u^2) - (1+p)/(1+q)
      //   = (1-u^2) (q - p (1 + (1+q) u^2)) / ((1+q u^2)(1+q))
      return (1.0 - u2) * (s.q - s.p * (1.0 + (1.0 + s.q) * u2)) /
             ((1.0 + s.q * u2) * (1.0 + s.q));
  }
  return 0.0;
}

// Wallis recurrence for int_0^1 (1-s^2)^k ds = prod_{j<=k} 2j/(2j+1).
double poly_normalization(int k) {
  double b = 1.0;
  for (int j = 1; j <= k; ++j) b *= 2.0 * j / (2.0 * j + 1.0);
  return b;
}

std::vector<double> poly_qbar_coeffs(int k, double B) {
  // Q(u) = (1/B) sum_j binom(k,j) (-1)^j u^(2j+1)/(2j+1)
  std::vector<double> binom(k + 1);
  binom[0] = 1.0;
  for (int j = 1; j <= k; ++j)
    binom[j] = binom[j - 1] * (k - j + 1) / static_cast<double>(j);
  std::vector<double> c(k + 1);
  for (int j = 0; j <= k; ++j) {
    double sgn = (j % 2 == 0) ? 1.0 : -1.0;
    c[j] = sgn * binom[j] / ((2.0 * j + 1.0) * B);
  }
  return c;
}

double qbar_poly_eval(const std::vector<double>& c, double u2) {
  double r = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * u2 + *it;
  return r;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

void validate(const KernelSpec& s) {
  switch (s.family) {
    case Family::Mass:
      return;
    case Family::Polynomial:
      if (s.k < 0) throw KernelError("Polynomial kernel: k must be >= 0");
      return;
    case Family::ExpShaped:
      if (s.endpoint_vanishing) {
        if (s.k != 1)
          throw KernelError("ExpShaped endpoint-vanishing variant requires k = 1");
        if (!(s.beta2 < 0.0))
          throw KernelError("ExpShaped endpoint-vanishing requires beta2 < 0");
      } else if (s.k < 2) {
        throw KernelError("ExpShaped without endpoint vanishing requires k >= 2");
      }
      return;
    case Family::RationalEV:
      if (!(s.q > 0.0)) throw KernelError("RationalEV requires q > 0");
      return;
    case Family::PadeEV: {
      if (!(s.q > 0.0)) throw KernelError("PadeEV requires q > 0");
      // S >= 0 iff g(u) = q - p (1 + (1+q) u^2) >= 0 on [0,1]; g is linear in
      // u^2, so checking where it crosses gives the exact violating abscissa.
      const double g0 = s.q - s.p;
      const double g1 = s.q - s.p * (2.0 + s.q);
      if (g0 < 0.0)
        throw KernelError("PadeEV: shaping factor negative at u = 0 (p=" +
                          fmt(s.p) + ", q=" + fmt(s.q) + ")");
      if (g1 < 0.0) {
        const double ustar = std::sqrt((s.q - s.p) / (s.p * (1.0 + s.q)));
        throw KernelError("PadeEV: shaping factor negative at u = " +
                          fmt(ustar) + " (p=" + fmt(s.p) + ", q=" + fmt(s.q) +
                          ")");
      }
      return;
    }
  }
}

double density_raw(const KernelSpec& s, double u) {
  const double a = std::abs(u);
  return ipow(1.0 - a * a, s.k) * shape_factor(s, a);
}

double KernelTable::q(double phi) const {
  const double a = std::abs(phi);
  if (a > 1.0 + overshoot_tol)
    throw KernelError("eval_Q: |phi| = " + fmt(a) + " exceeds 1 + tolerance");
  const double u = a > 1.0 ? 1.0 : a;
  const double sgn = phi < 0.0 ? -1.0 : 1.0;
  if (!qbar_coeffs.empty())
    return sgn * u * qbar_poly_eval(qbar_coeffs, u * u);
  return sgn * table.eval(u);
}

double KernelTable::q_ratio(double phi) const {
  const double a = std::abs(phi);
  if (a > 1.0 + overshoot_tol)
    throw KernelError("eval_Qbar: |phi| = " + fmt(a) + " exceeds 1 + tolerance");
  const double u = a > 1.0 ? 1.0 : a;
  if (!qbar_coeffs.empty()) return qbar_poly_eval(qbar_coeffs, u * u);
  if (a <= phi_tol) return q_prime(0.0);
  return table.eval(u) / u;
}

double KernelTable::q_prime(double phi) const {
  const double a = std::abs(phi);
  if (a > 1.0 + overshoot_tol)
    throw KernelError("eval_Qprime: |phi| = " + fmt(a) + " exceeds 1 + tolerance");
  const double u = a > 1.0 ? 1.0 : a;
  return density_raw(spec, u) / normalization;
}

double KernelTable::q_prime_floored(double phi) const {
  return std::max(q_prime(phi), alpha_qprime);
}

KernelTable build_kernel(const KernelSpec& spec, int node_count) {
  validate(spec);
  KernelTable t;
  t.spec = spec;

  switch (spec.family) {
    case Family::Mass:
      t.normalization = 1.0;
      t.degeneracy_order = 0;
      t.qbar_coeffs = {1.0};
      return t;
    case Family::Polynomial:
      t.normalization = poly_normalization(spec.k);
      t.degeneracy_order = spec.k;
      t.qbar_coeffs = poly_qbar_coeffs(spec.k, t.normalization);
      return t;
    case Family::ExpShaped:
      t.degeneracy_order = spec.k + (spec.endpoint_vanishing ? 1 : 0);
      break;
    case Family::RationalEV:
    case Family::PadeEV:
      // k = 1 with S vanishing linearly in (1-u^2) at the endpoints
      t.degeneracy_order = 2;
      break;
  }

  if (node_count < 16) throw KernelError("build_kernel: node_count too small");
  t.node_count = node_count;

  // Cumulative per-interval Gauss-Legendre integration of the raw density on
  // the uniform node grid; normalization from the final cumulative value so
  // the tabulated Q(1) is exactly 1.
  const auto& rule = quad::gauss_legendre(16);
  const int n = node_count;
  const double h = 1.0 / (n - 1);
  std::vector<double> raw(n, 0.0);
  auto f = [&](double u) { return density_raw(spec, u); };
  for (int i = 1; i < n; ++i) {
    const double a = (i - 1) * h;
    const double b = i == n - 1 ? 1.0 : i * h;
    raw[i] = raw[i - 1] + quad::integrate_fixed(f, rule, a, b);
  }
  const double B = raw[n - 1];
  if (!(B > 0.0) || !std::isfinite(B))
    throw KernelError("build_kernel: normalization integral is not positive");
  t.normalization = B;
  t.table.x0 = 0.0;
  t.table.x1 = 1.0;
  t.table.value.resize(n);
  t.table.deriv.resize(n);
  for (int i = 0; i < n; ++i) {
    const double u = i == n - 1 ? 1.0 : i * h;
    t.table.value[i] = raw[i] / B;
    t.table.deriv[i] = density_raw(spec, u) / B;
  }
  t.table.value[n - 1] = 1.0;
  return t;
}

std::string family_name(Family f) {
  switch (f) {
    case Family::Mass: return "mass";
    case Family::Polynomial: return "polynomial";
    case Family::ExpShaped: return "exp_shaped";
    case Family::RationalEV: return "rational_ev";
    case Family::PadeEV: return "pade_ev";
  }
  return "?";
}

Family family_from_name(const std::string& name) {
  if (name == "mass") return Family::Mass;
  if (name == "polynomial") return Family::Polynomial;
  if (name == "exp_shaped") return Family::ExpShaped;
  if (name == "rational_ev") return Family::RationalEV;
  if (name == "pade_ev") return Family::PadeEV;
  throw ConfigError("unknown kernel family: " + name);
}

namespace presets {

KernelSpec mass() {
  KernelSpec s;
  s.family = Family::Mass;
  s.label = "Mass";
  return s;
}

KernelSpec zhou(int k) {
  KernelSpec s;
  s.family = Family::Polynomial;
  s.k = k;
  s.label = k == 1 ? "NMN" : "Zhou k=" + std::to_string(k);
  return s;
}

KernelSpec nmn() { return zhou(1); }

KernelSpec exp_k2() {
  KernelSpec s;
  s.family = Family::ExpShaped;
  s.k = 2;
  s.beta2 = -6.95;
  s.label = "EXP k=2";
  return s;
}

KernelSpec exp_k1_ev() {
  KernelSpec s;
  s.family = Family::ExpShaped;
  s.k = 1;
  s.beta2 = -8.12;
  s.endpoint_vanishing = true;
  s.label = "EXP k=1 EV";
  return s;
}

KernelSpec rational_ev() {
  KernelSpec s;
  s.family = Family::RationalEV;
  s.k = 1;
  s.q = 20.9;
  s.label = "Rational EV";
  return s;
}

KernelSpec pade_ev() {
  KernelSpec s;
  s.family = Family::PadeEV;
  s.k = 1;
  s.p = -0.30;
  s.q = 23.4;
  s.label = "Pade EV";
  return s;
}

std::vector<KernelSpec> summary_rows() {
  return {nmn(),    zhou(2),     zhou(3),       zhou(8),
          exp_k2(), exp_k1_ev(), rational_ev(), pade_ev()};
}

KernelSpec by_name(const std::string& name) {
  if (name == "mass") return mass();
  if (name == "nmn") return nmn();
  if (name == "zhou2") return zhou(2);
  if (name == "zhou3") return zhou(3);
  if (name == "zhou8") return zhou(8);
  if (name == "exp_k2") return exp_k2();
  if (name == "exp_k1") return exp_k1_ev();
  if (name == "rational") return rational_ev();
  if (name == "pade") return pade_ev();
  if (name.rfind("poly:", 0) == 0) {
    const int k = std::stoi(name.substr(5));
    return zhou(k);
  }
  throw ConfigError("unknown kernel name: " + name);
}

}  // namespace presets

}  // namespace chic::kernel
