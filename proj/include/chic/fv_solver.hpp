#pragma once

#include <cstdint>
#include <vector>

#include "chic/kernel.hpp"
#include "chic/sparse.hpp"

namespace chic::fv {

// Uniform cell-centered Cartesian mesh. The reported experiments require
// square cells; make() validates dx == dy and a minimum size.
struct Mesh2D {
  int nx = 0, ny = 0;
  double dx = 0.0, dy = 0.0;
  double x0 = 0.0, y0 = 0.0;

  static Mesh2D make(int nx, int ny, double lx, double ly, double x0 = 0.0,
                     double y0 = 0.0);

  int cells() const { return nx * ny; }
  int id(int i, int j) const { return j * nx + i; }
  double xc(int i) const { return x0 + (i + 0.5) * dx; }
  double yc(int j) const { return y0 + (j + 0.5) * dy; }
  double cell_volume() const { return dx * dy; }
  double domain_volume() const { return nx * ny * cell_volume(); }
};

struct SimState {
  std::vector<double> phi;
  std::vector<double> psi;  // rescaled chemical potential mu / Q'(phi)
  double t = 0.0;
  double dt = 0.0;
  std::int64_t step_index = 0;
};

struct SolverConfig {
  double epsilon = 0.0;
  int mobility_exponent = 2;
  double beta = 1.02;
  double picard_tol = 1e-9;
  int picard_max = 60;
  int target_picard = 20;
  double dt_min = 1e-10;
  double dt_max = 5e-3;
  int gmres_restart = 30;
  double gmres_rel_tol = 1e-8;
  double alpha_qprime = 1e-6;
  bool enforce_bounds = true;

  void validate() const;  // throws ConfigError
};

// Double-well pieces used by both assembly and the energy diagnostic.
inline double w_potential(double phi) {
  const double d = 1.0 - phi * phi;
  return 0.25 * d * d;
}
inline double w_prime(double phi) { return phi * phi * phi - phi; }
inline double w_second(double phi) { return 3.0 * phi * phi - 1.0; }

// Degenerate mobility (1-phi^2)^l, clamped to zero outside [-1,1].
double mobility(double phi, int exponent);

// Difference quotient (Q(a)-Q(b))/(a-b) with the derivative branch when
// |a-b| < 1e-12; nonnegative by monotonicity of Q.
double discrete_chain_quotient(double a, double b,
                               const kernel::KernelTable& ker);

// The 2N x 2N Picard-step system in interleaved (phi_i, psi_i) ordering,
// already row-scaled by the max-norm of each row (row_scale holds the applied
// factors; the GMRES relative tolerance refers to the scaled system).
struct BlockSystem {
  sparse::Csr a;
  std::vector<double> rhs;
  std::vector<double> row_scale;
  std::vector<double> x0;  // warm start [phi_k; psi_k] interleaved
};

// Builds the linearized block system about the Picard iterate phi_k; every
// nonlinear coefficient is evaluated at the iterate:
//   phi-row: (s/dt) phi - div(M(phi_k) grad psi) = (Q(phi_n) - Q(phi_k)
//            + s phi_k)/dt
//   psi-row: (-eps lap + (W''(phi_k)+beta)/eps) phi - Q'_alpha(phi_k) psi
//            = ((W''(phi_k)+beta) phi_k - W'(phi_k) - beta (phi_k-phi_n)) / eps
// with arithmetic-mean face mobility, 5-point Laplacian and no-flux closure
// (boundary face fluxes absent). The phi-row slope s > 0 drops out at the
// fixed point phi = phi_k, so the converged update satisfies the exact
// Q-increment equation (conservation telescopes) for any choice; s is picked
// per cell for iteration health, s = max(Q'(phi_k), chain(phi_k, phi_n),
// alpha_qprime) (see the implementation note).
BlockSystem assemble_block(const SimState& state,
                           const std::vector<double>& phi_k,
                           const std::vector<double>& psi_k,
                           const kernel::KernelTable& ker,
                           const SolverConfig& cfg, const Mesh2D& mesh);

// ILU(0)-preconditioned restarted GMRES on the assembled system. Throws
// SolverError carrying the residual history when the solve stagnates.
struct BlockSolution {
  std::vector<double> phi;
  std::vector<double> psi;
  int gmres_iters = 0;
};
BlockSolution solve_block(const BlockSystem& sys, const SolverConfig& cfg);

struct StepResult {
  SimState next;
  bool converged = false;          // false: reject the step (halve dt, retry)
  int picard_iters = 0;
  int gmres_iters_total = 0;
  double gmres_iters_avg = 0.0;
  double final_residual = 0.0;
  double clip_qmass_delta = 0.0;   // |conserved-functional change| from clipping
  std::vector<double> residual_history;
};

// One attempted implicit step of size state.dt: Picard loop with the
// coefficients refreshed at each iterate and Aitken (Irons--Tuck) dynamic
// relaxation on the update (optional bounds clipping is applied before the
// residual is taken). The input state is not modified.
StepResult advance_step(const SimState& state, const kernel::KernelTable& ker,
                        const SolverConfig& cfg, const Mesh2D& mesh);

// Iteration-count controller: dt * clamp(target/iters, 0.7, 1.3), clamped to
// [dt_min, dt_max].
double adapt_dt(double dt, int picard_iters, const SolverConfig& cfg);

// Rejection policy: halve, never below dt_min; throws SolverError ("time step
// underflow") if dt is already at dt_min.
double reject_dt(double dt, const SolverConfig& cfg);

// Pointwise psi = mu(phi)/Q'_alpha(phi) with the discrete Laplacian in mu;
// used to seed psi at t = 0.
void init_psi(SimState& state, const kernel::KernelTable& ker,
              const SolverConfig& cfg, const Mesh2D& mesh);

}  // namespace chic::fv
