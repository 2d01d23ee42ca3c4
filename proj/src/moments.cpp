#include "chic/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chic/errors.hpp"
#include "chic/quadrature.hpp"

namespace chic::moments {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
// Truncation points of the stretched coordinate x = sqrt2 * atanh(u). The
// integrands below decay at least like exp(-sqrt2 x) beyond the interface, so
// these leave tails under 1e-15.
constexpr double kXTail = 24.0;    // tail-evaluator domain
constexpr double kXMoment = 30.0;  // M1 (x^2-weighted) integrand
constexpr double kXDefect = 25.0;  // C0 half-line integrals
constexpr double kXDynamic = 20.0; // J1 / Phi1 integrals

double sigma_of(double z) { return std::tanh(z / kSqrt2); }
double sigma_prime_of(double z) {
  const double s = sigma_of(z);
  return (1.0 - s * s) / kSqrt2;
}
double u_of_x(double x) { return std::tanh(x / kSqrt2); }

// 1 - Q1(u) for the reference cubic Q1(u) = (3u - u^3)/2, in the factored
// form (1-u)^2 (2+u)/2 that keeps relative accuracy at u -> 1.
double q1_tail(double u) {
  const double d = 1.0 - u;
  return 0.5 * d * d * (2.0 + u);
}

// High-accuracy evaluator of the kernel tail 1 - Q(u) built from per-panel
// Gauss-Legendre integrals of w(x) = density(u(x)) (1-u^2)/sqrt2 accumulated
// backward (suffix sums), so the tail keeps relative accuracy however small
// it gets. Also provides the normalization B and the normalized density.
class TailEvaluator {
 public:
  explicit TailEvaluator(const kernel::KernelSpec& spec)
      : spec_(spec), rule_(quad::gauss_legendre(16)) {
    const int np = 960;
    dx_ = kXTail / np;
    panel_.resize(np);
    for (int i = 0; i < np; ++i)
      panel_[i] = quad::integrate_fixed([this](double x) { return w(x); },
                                        rule_, i * dx_, (i + 1) * dx_);
    suffix_.assign(np + 1, 0.0);
    for (int i = np - 1; i >= 0; --i) suffix_[i] = suffix_[i + 1] + panel_[i];
    B_ = suffix_[0];
    if (!(B_ > 0.0) || !std::isfinite(B_))
      throw KernelError("moment evaluator: normalization not positive");
  }

  double normalization() const { return B_; }

  double qprime(double u) const {
    return kernel::density_raw(spec_, u) / B_;
  }

  // 1 - Q at u = u(x); relative accuracy down to the suffix underflow.
  double qtail_at_x(double x) const {
    if (x >= kXTail) return 0.0;
    if (x <= 0.0) return 1.0;
    const int i = std::min(static_cast<int>(x / dx_),
                           static_cast<int>(panel_.size()) - 1);
    const double edge = (i + 1) * dx_;
    const double partial = quad::integrate_fixed(
        [this](double t) { return w(t); }, rule_, x, edge);
    return (partial + suffix_[i + 1]) / B_;
  }

  double qtail(double u) const {
    if (u >= 1.0) return 0.0;
    if (u <= 0.0) return 1.0;
    return qtail_at_x(kSqrt2 * std::atanh(u));
  }

 private:
  double w(double x) const {
    const double u = u_of_x(x);
    return kernel::density_raw(spec_, u) * (1.0 - u * u) / kSqrt2;
  }

  kernel::KernelSpec spec_;
  const quad::Rule& rule_;
  double dx_ = 0.0;
  double B_ = 0.0;
  std::vector<double> panel_;
  std::vector<double> suffix_;
};

bool is_nmn(const kernel::KernelSpec& s) {
  return s.family == kernel::Family::Polynomial && s.k == 1;
}

double geometric_moment_impl(const TailEvaluator& ev) {
  // M1 = -2 int_0^1 Q'(u) atanh^2(u) du; with u = tanh(x/sqrt2) the integrand
  // becomes (x^2/sqrt2) Q'(u(x)) (1-u^2), smooth and exponentially decaying.
  quad::AdaptiveOptions opts;
  opts.abs_tol = 1e-14;
  opts.rel_tol = 1e-13;
  auto res = quad::integrate_adaptive(
      [&](double x) {
        const double u = u_of_x(x);
        return (x * x / kSqrt2) * ev.qprime(u) * (1.0 - u * u);
      },
      0.0, kXMoment, opts);
  return -res.value;
}

double dynamic_moment_impl(const kernel::KernelSpec& spec,
                           const TailEvaluator& ev) {
  if (is_nmn(spec)) return 0.0;  // Q == Q1: the integrand vanishes identically
  quad::AdaptiveOptions opts;
  opts.abs_tol = 1e-14;
  opts.rel_tol = 1e-12;
  auto res = quad::integrate_adaptive(
      [&](double x) {
        const double u = u_of_x(x);
        const double d = 1.0 - u * u;
        const double qt = ev.qtail_at_x(x);
        return (q1_tail(u) - qt) * qt / (d * d) / kSqrt2;
      },
      0.0, kXDynamic, opts);
  return (8.0 / 3.0) * res.value;
}

int effective_degeneracy(const kernel::KernelSpec& s) {
  switch (s.family) {
    case kernel::Family::Mass: return 0;
    case kernel::Family::Polynomial: return s.k;
    case kernel::Family::ExpShaped: return s.k + (s.endpoint_vanishing ? 1 : 0);
    case kernel::Family::RationalEV:
    case kernel::Family::PadeEV: return 2;
  }
  return 0;
}

}  // namespace

double geometric_moment(const kernel::KernelTable& ker) {
  return geometric_moment_impl(TailEvaluator(ker.spec));
}

double dynamic_moment(const kernel::KernelTable& ker) {
  if (!is_nmn(ker.spec) && effective_degeneracy(ker.spec) < 2)
    throw KernelError(
        "dynamic moment diverges: effective degeneracy < 2 and kernel is not "
        "NMN");
  return dynamic_moment_impl(ker.spec, TailEvaluator(ker.spec));
}

double volume_defect_c0(const kernel::KernelTable& ker) {
  // C0 = int_R (1/2 (1+Q(sigma)) - Theta(z)) dz. Positive half-line via the
  // high-accuracy tail route, negative half-line via the runtime eval path;
  // the sum probes both quadrature and table consistency and must vanish.
  TailEvaluator ev(ker.spec);
  quad::AdaptiveOptions opts;
  opts.abs_tol = 1e-13;
  opts.rel_tol = 1e-12;
  auto plus = quad::integrate_adaptive(
      [&](double x) { return -0.5 * ev.qtail_at_x(x); }, 0.0, kXDefect, opts);
  auto minus = quad::integrate_adaptive(
      [&](double x) { return 0.5 * (1.0 - ker.q(u_of_x(x))); }, 0.0, kXDefect,
      opts);
  return plus.value + minus.value;
}

InnerProfile inner_profile(const kernel::KernelTable& ker, double z_max,
                           int n_points) {
  if (z_max < 10.0) throw Error("inner_profile: z_max must be >= 10");
  if (n_points < 9) throw Error("inner_profile: n_points must be >= 9");
  TailEvaluator ev(ker.spec);

  InnerProfile prof;
  prof.z_grid.resize(n_points);
  prof.sigma.resize(n_points);
  prof.phi1.resize(n_points);
  const double h = 2.0 * z_max / (n_points - 1);
  const double mid = 0.5 * (n_points - 1);
  for (int i = 0; i < n_points; ++i) {
    prof.z_grid[i] = (i - mid) * h;  // exact 0 at the middle for odd n
    prof.sigma[i] = sigma_of(prof.z_grid[i]);
  }

  // Phi1(z) = (4/3) sigma'(z) G(z) with G the cumulative integral of
  // (Q - Q1)/(1-u^2)^2 / sqrt2 along x; Phi1 is even, so only z >= 0 is
  // integrated and the rest mirrored.
  auto hfun = [&](double x) {
    const double u = u_of_x(x);
    const double d = 1.0 - u * u;
    return (q1_tail(u) - ev.qtail_at_x(x)) / (d * d) / kSqrt2;
  };
  const auto& rule = quad::gauss_legendre(16);
  const int i0 = (n_points - 1) / 2 + ((n_points - 1) % 2 ? 1 : 0);
  // i0 indexes the first z >= 0 (the exact middle for odd n_points).
  double G = 0.0;
  double zprev = 0.0;
  for (int i = i0; i < n_points; ++i) {
    const double z = prof.z_grid[i];
    if (z > zprev) G += quad::integrate_fixed(hfun, rule, zprev, z);
    zprev = z;
    prof.phi1[i] = (4.0 / 3.0) * sigma_prime_of(z) * G;
  }
  for (int i = 0; i < i0; ++i) prof.phi1[i] = prof.phi1[n_points - 1 - i];

  prof.sup_norm = 0.0;
  for (double v : prof.phi1) prof.sup_norm = std::max(prof.sup_norm, std::abs(v));
  return prof;
}

double ode_residual(const InnerProfile& prof, const kernel::KernelTable& ker) {
  const int n = static_cast<int>(prof.z_grid.size());
  if (n < 9) throw Error("ode_residual: grid too small");
  const double h = prof.z_grid[1] - prof.z_grid[0];
  auto second_diff = [&](int i, int s) {
    const double hh = s * h;
    return (prof.phi1[i - s] - 2.0 * prof.phi1[i] + prof.phi1[i + s]) /
           (hh * hh);
  };
  double worst = 0.0;
  for (int i = 4; i < n - 4; ++i) {
    // Richardson combination of second differences at strides h, 2h, 4h
    // (sixth order), so the check's truncation stays below the tolerance.
    const double d2 = (64.0 * second_diff(i, 1) - 20.0 * second_diff(i, 2) +
                       second_diff(i, 4)) /
                      45.0;
    const double s = prof.sigma[i];
    const double wpp = 3.0 * s * s - 1.0;
    const double f = (kSqrt2 / 3.0) * ker.q_prime(s) - sigma_prime_of(prof.z_grid[i]);
    worst = std::max(worst, std::abs(d2 - wpp * prof.phi1[i] - f));
  }
  return worst;
}

double phi1_double_integral(const kernel::KernelTable& ker, double z) {
  // Variation of constants about the homogeneous solution sigma':
  //   Phi1(z) = sigma'(z) int_0^z sigma'(eta)^-2 K(eta) d eta,
  //   K(eta)  = int_0^eta ((sqrt2/3) Q'(sigma) - sigma') sigma' dxi.
  // K(inf) = 0 (chain rule gives int Q'(sigma) sigma' = Q(1)-Q(0) = 1 and
  // int sigma'^2 = sqrt2/3), so K is evaluated in the equivalent tail form
  // -int_eta^X g dxi, which keeps relative accuracy where sigma'^-2 blows up.
  const double za = std::abs(z);  // Phi1 is even
  if (za == 0.0) return 0.0;
  auto g = [&](double xi) {
    const double sp = sigma_prime_of(xi);
    return ((kSqrt2 / 3.0) * ker.q_prime(sigma_of(xi)) - sp) * sp;
  };
  quad::AdaptiveOptions inner;
  inner.abs_tol = 1e-16;
  inner.rel_tol = 1e-12;
  auto K = [&](double eta) {
    return -quad::integrate_adaptive(g, eta, kXDynamic, inner).value;
  };
  quad::AdaptiveOptions outer;
  outer.abs_tol = 1e-12;
  outer.rel_tol = 1e-11;
  auto res = quad::integrate_adaptive(
      [&](double eta) {
        const double sp = sigma_prime_of(eta);
        return K(eta) / (sp * sp);
      },
      0.0, za, outer);
  return sigma_prime_of(za) * res.value;
}

Constants asymptotic_constants(int mobility_exponent) {
  if (mobility_exponent < 1)
    throw Error("asymptotic_constants: mobility exponent must be >= 1");
  Constants c;
  c.mobility_exponent = mobility_exponent;
  quad::AdaptiveOptions opts;
  opts.abs_tol = 1e-14;
  opts.rel_tol = 1e-13;
  c.c_W = 2.0 * quad::integrate_adaptive(
                    [](double zz) {
                      const double sp = sigma_prime_of(zz);
                      return sp * sp;
                    },
                    0.0, kXMoment, opts)
                    .value;
  c.c_M = 2.0 * quad::integrate_adaptive(
                    [&](double zz) {
                      const double s = sigma_of(zz);
                      double r = 1.0;
                      for (int j = 0; j < mobility_exponent; ++j)
                        r *= 1.0 - s * s;
                      return r;
                    },
                    0.0, kXMoment, opts)
                    .value;
  // c_N = int_R d/dz Q(sigma(z)) dz = Q(1) - Q(-1); evaluated by quadrature
  // (for the reference cubic) rather than asserted, so the identity is
  // exercised numerically.
  const auto nmn = kernel::build_kernel(kernel::presets::nmn());
  c.c_N = 2.0 * quad::integrate_adaptive(
                    [&](double zz) {
                      return nmn.q_prime(sigma_of(zz)) * sigma_prime_of(zz);
                    },
                    0.0, kXMoment, opts)
                    .value;
  c.c_SD = c.c_M * c.c_W / (c.c_N * c.c_N);
  return c;
}

MomentReport moment_report(const kernel::KernelTable& ker) {
  TailEvaluator ev(ker.spec);
  MomentReport r;
  r.kernel_label = ker.spec.label;
  r.normalization = ev.normalization();
  r.m1 = geometric_moment_impl(ev);
  if (is_nmn(ker.spec) || effective_degeneracy(ker.spec) >= 2)
    r.j1 = dynamic_moment_impl(ker.spec, ev);
  else
    r.j1 = std::numeric_limits<double>::quiet_NaN();
  r.c1 = r.m1 + r.j1;
  r.c0 = volume_defect_c0(ker);
  r.sup_phi1 = inner_profile(ker).sup_norm;
  return r;
}

TuneResult tune_kernel(const kernel::KernelSpec& family_template, double lo,
                       double hi) {
  using kernel::Family;
  const Family fam = family_template.family;
  if (fam != Family::ExpShaped && fam != Family::RationalEV &&
      fam != Family::PadeEV)
    throw TuningError("kernel family has no tunable parameter");

  auto make = [&](double theta) {
    kernel::KernelSpec s = family_template;
    if (fam == Family::ExpShaped)
      s.beta2 = theta;
    else
      s.q = theta;
    kernel::validate(s);
    return s;
  };

  int evals = 0;
  auto balance = [&](double theta) {
    const auto spec = make(theta);
    TailEvaluator ev(spec);
    ++evals;
    return geometric_moment_impl(ev) + dynamic_moment_impl(spec, ev);
  };

  // Brent's method on the balance residual.
  double a = lo, b = hi;
  double fa = balance(a), fb = balance(b);
  if (fa * fb > 0.0)
    throw TuningError("tune_kernel: no sign change of the balance residual in "
                      "the bracket");
  double c = a, fc = fa;
  double d = b - a, e = d;
  const double param_tol = 1e-8;
  for (int iter = 0; iter < 200; ++iter) {
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 = 2.0 * 2.22e-16 * std::abs(b) + 0.5 * param_tol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) break;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double pp, qq, rr = 0.0;
      const double s = fb / fa;
      if (a == c) {
        pp = 2.0 * xm * s;
        qq = 1.0 - s;
      } else {
        qq = fa / fc;
        rr = fb / fc;
        pp = s * (2.0 * xm * qq * (qq - rr) - (b - a) * (rr - 1.0));
        qq = (qq - 1.0) * (rr - 1.0) * (s - 1.0);
      }
      if (pp > 0.0) qq = -qq;
      pp = std::abs(pp);
      if (2.0 * pp < std::min(3.0 * xm * qq - std::abs(tol1 * qq),
                              std::abs(e * qq))) {
        e = d;
        d = pp / qq;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : (xm > 0 ? tol1 : -tol1);
    fb = balance(b);
    if ((fb > 0) == (fc > 0)) {
      c = a;
      fc = fa;
    }
  }

  if (std::abs(fb) >= 1e-6)
    throw TuningError("tune_kernel: balance residual did not reach 1e-6");
  TuneResult out;
  out.spec = make(b);
  out.report = moment_report(kernel::build_kernel(out.spec));
  out.evaluations = evals;
  return out;
}

}  // namespace chic::moments
