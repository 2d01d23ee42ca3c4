#pragma once

#include <string>
#include <vector>

#include "chic/hermite_table.hpp"

namespace chic::kernel {

// Families of conserved mappings Q. All share Q'(u) = (1-u^2)^k * S(u) / B
// with S > 0 on (-1,1) and B the normalization making Q(1) = 1.
enum class Family { Mass, Polynomial, ExpShaped, RationalEV, PadeEV };

struct KernelSpec {
  Family family = Family::Mass;
  int k = 0;                        // degeneracy exponent (Polynomial, ExpShaped)
  double beta2 = 0.0;               // ExpShaped: S = exp(beta2 u^2) [- exp(beta2)]
  bool endpoint_vanishing = false;  // ExpShaped k=1 variant (S(+-1) = 0)
  double p = 0.0;                   // PadeEV numerator weight (fixed, not tuned)
  double q = 0.0;                   // RationalEV / PadeEV denominator weight
  std::string label;

  bool operator==(const KernelSpec&) const = default;
};

// Family-specific admissibility rules; throws KernelError with the offending
// parameter (for PadeEV, the first abscissa where S < 0).
void validate(const KernelSpec& spec);

// Unnormalized density (1-u^2)^k * S(u); even in u. Written in forms free of
// endpoint cancellation (expm1 / factored rationals).
double density_raw(const KernelSpec& spec, double u);

// Runtime kernel: closed-form polynomial coefficients where available,
// tabulated cubic-Hermite Q on [0,1] with odd reflection otherwise.
struct KernelTable {
  KernelSpec spec;
  double normalization = 1.0;  // B
  int degeneracy_order = 0;    // vanishing order of Q' at +-1 (incl. S factor)
  int node_count = 0;          // 0 for closed-form families
  double phi_tol = 1e-10;      // |phi| below which Qbar uses the Q'(0) branch
  double alpha_qprime = 1e-6;  // floor used by q_prime_floored
  double overshoot_tol = 1e-6; // |phi| <= 1 + overshoot_tol accepted, clamped

  std::vector<double> qbar_coeffs;  // Qbar(u) = sum c_j u^(2j) (closed-form)
  quad::HermiteTable table;         // Q on [0,1] (shaped families)

  double q(double phi) const;                // Q(phi), odd
  double q_ratio(double phi) const;          // Qbar = Q(phi)/phi, Q'(0) at 0
  double q_prime(double phi) const;          // analytic Q'(phi), even
  double q_prime_floored(double phi) const;  // max(Q', alpha_qprime)
};

// Builds the runtime table. Shaped families tabulate Q by cumulative
// per-interval Gauss-Legendre integration of the density; node_count controls
// that resolution (default chosen so interpolation error < 1e-10 for the
// bundled kernels).
KernelTable build_kernel(const KernelSpec& spec, int node_count = 512);

std::string family_name(Family f);
Family family_from_name(const std::string& name);

// The bundled kernel set (rows of the summary table).
namespace presets {
KernelSpec mass();
KernelSpec nmn();                // Polynomial k=1
KernelSpec zhou(int k);          // Polynomial k
KernelSpec exp_k2();             // ExpShaped k=2, beta2 = -6.95
KernelSpec exp_k1_ev();          // ExpShaped k=1 endpoint-vanishing, beta2 = -8.12
KernelSpec rational_ev();        // RationalEV q = 20.9
KernelSpec pade_ev();            // PadeEV p = -0.30, q = 23.4
std::vector<KernelSpec> summary_rows();
// Lookup by CLI name (mass, nmn, zhou2, zhou3, zhou8, exp_k2, exp_k1,
// rational, pade, poly:<k>); throws ConfigError on unknown names.
KernelSpec by_name(const std::string& name);
}  // namespace presets

}  // namespace chic::kernel
