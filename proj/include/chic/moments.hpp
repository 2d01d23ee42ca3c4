#pragma once

#include <string>
#include <vector>

#include "chic/kernel.hpp"

namespace chic::moments {

// First inner-profile correction Phi1 on a symmetric z grid. sigma is the
// leading profile tanh(z/sqrt2); Phi1 the bounded solution of
//   Phi1'' - W''(sigma) Phi1 = (sqrt2/3) Q'(sigma) - sigma',  Phi1(0) = 0.
struct InnerProfile {
  std::vector<double> z_grid;
  std::vector<double> sigma;
  std::vector<double> phi1;
  double sup_norm = 0.0;
};

struct MomentReport {
  double m1 = 0.0;        // geometric moment (always negative)
  double j1 = 0.0;        // dynamic moment (0 for NMN)
  double c1 = 0.0;        // m1 + j1, the balance residual
  double c0 = 0.0;        // odd-symmetry volume defect (should vanish)
  double sup_phi1 = 0.0;  // max |Phi1| over the default grid
  double normalization = 0.0;
  std::string kernel_label;
};

struct Constants {
  double c_W = 0.0;   // profile line energy, 2 sqrt2 / 3
  double c_M = 0.0;   // mobility moment int (1-sigma^2)^l dz
  double c_N = 0.0;   // kernel-flux normalization, = 2
  double c_SD = 0.0;  // surface-diffusion prefactor c_M c_W / c_N^2
  int mobility_exponent = 2;
};

// Geometric moment M1 = -2 int_0^1 Q'(u) atanh^2(u) du, evaluated through the
// u = tanh(x/sqrt2) substitution (smooth, exponentially decaying integrand).
double geometric_moment(const kernel::KernelTable& ker);

// Dynamic moment J1 = (8/3) int_0^1 (Q - Q1)(1 - Q)/(1-u^2)^3 du. Requires
// effective degeneracy >= 2; the NMN kernel is the allowed exception (the
// integrand vanishes identically and J1 = 0 exactly).
double dynamic_moment(const kernel::KernelTable& ker);

// C0 = int_R (1/2 (1 + Q(sigma)) - Heaviside(z)) dz, the two half-line pieces
// evaluated by independent routes; vanishes by oddness of Q.
double volume_defect_c0(const kernel::KernelTable& ker);

// Reduced single-quadrature evaluation of Phi1 (Phi1 is even in z; the grid
// includes z = 0 when n_points is odd). pre: z_max >= 10.
InnerProfile inner_profile(const kernel::KernelTable& ker, double z_max = 20.0,
                           int n_points = 2001);

// Max interior residual of the Phi1 ODE measured with Richardson-extrapolated
// second differences on the profile grid (strides h, 2h, 4h combined to sixth
// order, keeping the check's own truncation well below the profile error).
double ode_residual(const InnerProfile& profile, const kernel::KernelTable& ker);

// Independent oracle: variation-of-constants double integral for Phi1 at a
// single z (used by tests; much slower than inner_profile).
double phi1_double_integral(const kernel::KernelTable& ker, double z);

Constants asymptotic_constants(int mobility_exponent);

MomentReport moment_report(const kernel::KernelTable& ker);

struct TuneResult {
  kernel::KernelSpec spec;
  MomentReport report;
  int evaluations = 0;
};

// Brent search for the family parameter making c1 = 0 (ExpShaped: beta2;
// RationalEV/PadeEV: q). post: |c1| < 1e-6, parameter tolerance 1e-8.
// Throws TuningError when the bracket does not change sign.
TuneResult tune_kernel(const kernel::KernelSpec& family_template, double lo,
                       double hi);

}  // namespace chic::moments
