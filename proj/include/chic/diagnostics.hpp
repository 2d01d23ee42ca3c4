#pragma once

#include <string>
#include <vector>

#include "chic/fv_solver.hpp"
#include "chic/kernel.hpp"

namespace chic::diag {

struct DiagnosticsRecord {
  double t = 0.0;
  double dt = 0.0;
  double vq = 0.0;          // conserved diffuse volume 1/2 int (1+Q(phi))
  double vgeom = 0.0;       // sub-cell area of {phi > 0}
  double err_v = 0.0;       // vq - vgeom
  double err_v_drift = 0.0; // err_v(t) - err_v(0)
  double energy = 0.0;
  double qmass = 0.0;       // sum Q(phi_i) |cell|
  int picard_iters = 0;
  double gmres_iters_avg = 0.0;
};

// 1/2 sum (1 + Q(phi_i)) |cell| (deterministic blocked reduction).
double q_volume(const std::vector<double>& phi, const kernel::KernelTable& ker,
                const fv::Mesh2D& mesh);

// sum Q(phi_i) |cell|.
double q_mass(const std::vector<double>& phi, const kernel::KernelTable& ker,
              const fv::Mesh2D& mesh);

// Area of {phi > 0} by sub-cell reconstruction: the cell-centered field is
// treated as corner data of the dual lattice (constant-extended to the domain
// boundary), each dual quad is split into four triangles about its center
// value, and the positive part of the linear interpolant is clipped exactly.
// Cell counting would give O(dx) noise; this is second order.
double geometric_volume(const std::vector<double>& phi, const fv::Mesh2D& mesh);

// E = sum W(phi_i)|cell|/eps + (eps/2) sum_faces (phi_b - phi_a)^2, the exact
// Lyapunov function of the convex-split update (face-centered gradients,
// no-flux closure).
double free_energy(const std::vector<double>& phi, double epsilon,
                   const fv::Mesh2D& mesh);

// Fills the field-derived entries (t, dt, vq, vgeom, err_v, energy, qmass);
// drift and solver statistics are the caller's.
DiagnosticsRecord snapshot(const fv::SimState& state,
                           const kernel::KernelTable& ker, double epsilon,
                           const fv::Mesh2D& mesh);

struct AuditVerdict {
  bool pass = false;
  double max_qmass_deviation = 0.0;
  int worst_qmass_step = 0;
  double max_energy_uptick = 0.0;  // relative to |E_0|
  int worst_energy_step = 0;
  std::string message;
};

// PASS iff max |qmass - qmass_0| <= budget and the energy is non-increasing
// within 1e-10 relative to |E_0| at every consecutive pair.
AuditVerdict audit_run(const std::vector<DiagnosticsRecord>& records,
                       double budget);

// CSV with the exact column order
// t,dt,VQ,Vgeom,ErrV,ErrV_drift,energy,Qmass,picard_iters,gmres_iters_avg
// written with %.17g so read_csv round-trips bitwise.
void write_csv(const std::string& path,
               const std::vector<DiagnosticsRecord>& records);
std::vector<DiagnosticsRecord> read_csv(const std::string& path);

}  // namespace chic::diag
