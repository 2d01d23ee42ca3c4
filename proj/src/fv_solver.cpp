#include "chic/fv_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "chic/errors.hpp"
#include "chic/parallel.hpp"

namespace chic::fv {

namespace {

double clamp_unit(double v) { return std::min(1.0, std::max(-1.0, v)); }

struct Stencil {
  int nb[4];  // neighbor cell ids in ascending order, -1-terminated
  int count;
};

Stencil neighbors(const Mesh2D& m, int i, int j) {
  Stencil s{{-1, -1, -1, -1}, 0};
  if (j > 0) s.nb[s.count++] = m.id(i, j - 1);
  if (i > 0) s.nb[s.count++] = m.id(i - 1, j);
  if (i + 1 < m.nx) s.nb[s.count++] = m.id(i + 1, j);
  if (j + 1 < m.ny) s.nb[s.count++] = m.id(i, j + 1);
  return s;
}

}  // namespace

Mesh2D Mesh2D::make(int nx, int ny, double lx, double ly, double x0,
                    double y0) {
  if (nx < 1 || ny < 1 || nx * ny < 9)
    throw ConfigError("mesh: need at least 9 cells");
  if (!(lx > 0.0) || !(ly > 0.0)) throw ConfigError("mesh: extents must be > 0");
  Mesh2D m;
  m.nx = nx;
  m.ny = ny;
  m.dx = lx / nx;
  m.dy = ly / ny;
  m.x0 = x0;
  m.y0 = y0;
  if (std::abs(m.dx - m.dy) > 1e-12 * m.dx)
    throw ConfigError("mesh: square cells required (dx != dy)");
  return m;
}

void SolverConfig::validate() const {
  if (!(epsilon > 0.0)) throw ConfigError("solver: epsilon must be > 0");
  if (mobility_exponent < 1)
    throw ConfigError("solver: mobility exponent must be >= 1");
  if (beta < 1.0) throw ConfigError("solver: beta must be >= 1");
  if (!(picard_tol > 0.0) || !(gmres_rel_tol > 0.0) || !(alpha_qprime > 0.0))
    throw ConfigError("solver: tolerances must be > 0");
  if (picard_max < 1 || target_picard < 1 || gmres_restart < 1)
    throw ConfigError("solver: iteration limits must be >= 1");
  if (!(dt_min > 0.0) || dt_min > dt_max)
    throw ConfigError("solver: need 0 < dt_min <= dt_max");
}

double mobility(double phi, int exponent) {
  const double d = std::max(0.0, 1.0 - phi * phi);
  double r = 1.0;
  for (int j = 0; j < exponent; ++j) r *= d;
  return r;
}

double discrete_chain_quotient(double a, double b,
                               const kernel::KernelTable& ker) {
  if (std::abs(a - b) < 1e-12) return ker.q_prime(b);
  return (ker.q(a) - ker.q(b)) / (a - b);
}

BlockSystem assemble_block(const SimState& state,
                           const std::vector<double>& phi_k,
                           const std::vector<double>& psi_k,
                           const kernel::KernelTable& ker,
                           const SolverConfig& cfg, const Mesh2D& mesh) {
  const int n = mesh.cells();
  const double h2 = mesh.dx * mesh.dx;
  const double eps = cfg.epsilon;
  const double idt = 1.0 / state.dt;

  BlockSystem sys;
  sys.a.n = 2 * n;
  sys.a.row_ptr.assign(2 * n + 1, 0);
  sys.rhs.assign(2 * n, 0.0);
  sys.row_scale.assign(2 * n, 1.0);
  sys.x0.resize(2 * n);

  // Pass 1: row sizes (phi-row and psi-row of a cell have the same count:
  // own phi + own psi + one coupling per existing face).
  for (int j = 0; j < mesh.ny; ++j)
    for (int i = 0; i < mesh.nx; ++i) {
      const int c = mesh.id(i, j);
      const int cnt = 2 + neighbors(mesh, i, j).count;
      sys.a.row_ptr[2 * c + 1] = cnt;
      sys.a.row_ptr[2 * c + 2] = cnt;
    }
  for (int r = 0; r < 2 * n; ++r) sys.a.row_ptr[r + 1] += sys.a.row_ptr[r];
  sys.a.col.assign(sys.a.row_ptr.back(), 0);
  sys.a.val.assign(sys.a.row_ptr.back(), 0.0);

  // Pass 2: coefficients. Every nonlinear coefficient -- the face mobility,
  // the secant slope Qbar, the floored Q', and the stabilized potential
  // linearization -- is refreshed at the current Picard iterate. That
  // self-consistency matters at saturated cells hit by incoming flux: the
  // rescaled potential there is amplified by 1/Q'_alpha, and only a live
  // Q'(phi_k) lets the amplification release as the cell moves off the pure
  // phase within the iteration. Freezing these coefficients at the previous
  // time level pins the amplification for the whole step and the iteration
  // stalls at a residual plateau no time-step reduction can cure. Faces take
  // the arithmetic mean of the adjacent cell values.
  par::for_each_index(static_cast<std::size_t>(n), [&](std::size_t cc) {
    const int c = static_cast<int>(cc);
    const int i = c % mesh.nx;
    const int j = c / mesh.nx;
    const Stencil st = neighbors(mesh, i, j);
    const double pk = clamp_unit(phi_k[c]);
    const double pn = clamp_unit(state.phi[c]);
    const double mc = mobility(pk, cfg.mobility_exponent);

    const double qpa = std::max(ker.q_prime(pk), cfg.alpha_qprime);
    const double wpp_beta = w_second(pk) + cfg.beta;

    // phi-row 2c: columns {2s+1, 2w+1, 2c, 2c+1, 2e+1, 2n+1} ascending.
    {
      int p = sys.a.row_ptr[2 * c];
      double diag_psi = 0.0;
      double coef[4];
      for (int f = 0; f < st.count; ++f) {
        const double mf =
            0.5 * (mc + mobility(clamp_unit(phi_k[st.nb[f]]),
                                 cfg.mobility_exponent));
        coef[f] = mf / h2;
        diag_psi += mf / h2;
      }

      // Conservative update row: s * phi^{n+1} / dt - div(M grad psi^{n+1})
      // = (Q(phi_n) - Q(phi_k) + s * phi_k) / dt. The slope s cancels at the
      // fixed point phi^{n+1} = phi_k, so the converged iterate satisfies
      // the exact Q-increment relation Q(phi^{n+1}) = Q(phi_n) + dt * div(M
      // grad psi) for any s, and summing over cells telescopes to exact
      // discrete Q-mass conservation (boundary fluxes vanish). The choice
      // of s only shapes the iteration. The secant through zero Q(u)/u is
      // not contractive where the field saturates: in the small-dt limit
      // that update reads phi <- Q(phi_n)/Qbar(phi), whose derivative
      // |Q'(u)u - Q(u)|/Q(u) tends to 1 as |u| -> 1 for every degenerate
      // kernel, so saturated bands relax by a crawl no iteration budget
      // covers. The tangent Q'(phi_k) makes the same limit a Newton solve
      // of Q(phi) = Q(phi_n) (quadratic); the chain quotient against phi_n
      // guards the far-from-anchor side, and the alpha floor keeps plateau
      // rows (Q' = 0 exactly, all face mobilities zero) nonsingular while
      // still reproducing phi^{n+1} = phi_k there exactly.
      const double qq = std::max(ker.q_prime(pk),
                                 discrete_chain_quotient(pk, pn, ker));
      const double slope = std::max(qq, cfg.alpha_qprime);

      int f = 0;
      for (; f < st.count && st.nb[f] < c; ++f) {
        sys.a.col[p] = 2 * st.nb[f] + 1;
        sys.a.val[p++] = -coef[f];
      }
      sys.a.col[p] = 2 * c;
      sys.a.val[p++] = slope * idt;
      sys.a.col[p] = 2 * c + 1;
      sys.a.val[p++] = diag_psi;
      for (; f < st.count; ++f) {
        sys.a.col[p] = 2 * st.nb[f] + 1;
        sys.a.val[p++] = -coef[f];
      }
      sys.rhs[2 * c] = (ker.q(pn) - ker.q(pk) + slope * pk) * idt;
    }

    // psi-row 2c+1: columns {2s, 2w, 2c, 2c+1, 2e, 2n} ascending.
    {
      int p = sys.a.row_ptr[2 * c + 1];
      const double lap = eps / h2;
      int f = 0;
      for (; f < st.count && st.nb[f] < c; ++f) {
        sys.a.col[p] = 2 * st.nb[f];
        sys.a.val[p++] = -lap;
      }
      sys.a.col[p] = 2 * c;
      sys.a.val[p++] = st.count * lap + wpp_beta / eps;
      sys.a.col[p] = 2 * c + 1;
      sys.a.val[p++] = -qpa;
      for (; f < st.count; ++f) {
        sys.a.col[p] = 2 * st.nb[f];
        sys.a.val[p++] = -lap;
      }
      // Convex-split right-hand side: the stabilized remainder of
      // W_c'(phi^{n+1}) minus the concave part W_e' taken at the old time
      // level. The -beta*(pk - pn) piece cancels the iterate-lag sensitivity
      // of the beta stabilization in the psi-equation exactly at convergence.
      sys.rhs[2 * c + 1] =
          (wpp_beta * pk - w_prime(pk) - cfg.beta * (pk - pn)) / eps;
    }

    sys.x0[2 * c] = phi_k[c];
    sys.x0[2 * c + 1] = psi_k[c];
  });

  // Row max-norm scaling (equilibrates the 1/dt phi-rows against the
  // stiffness-scaled psi-rows before ILU).
  for (int r = 0; r < 2 * n; ++r) {
    double amax = 0.0;
    for (int p = sys.a.row_ptr[r]; p < sys.a.row_ptr[r + 1]; ++p)
      amax = std::max(amax, std::abs(sys.a.val[p]));
    if (!(amax > 0.0) || !std::isfinite(amax) ||
        !std::isfinite(sys.rhs[r])) {
      char msg[96];
      std::snprintf(msg, sizeof msg,
                    "assembly: non-finite or empty row at cell (%d,%d)",
                    (r / 2) % mesh.nx, (r / 2) / mesh.nx);
      throw SolverError(msg, {});
    }
    const double s = 1.0 / amax;
    sys.row_scale[r] = s;
    for (int p = sys.a.row_ptr[r]; p < sys.a.row_ptr[r + 1]; ++p)
      sys.a.val[p] *= s;
    sys.rhs[r] *= s;
  }
  return sys;
}

BlockSolution solve_block(const BlockSystem& sys, const SolverConfig& cfg) {
  // Solve the pairwise row-permuted system (psi-equation first in each cell
  // block). The permutation changes neither the solution nor the residual
  // 2-norm, but it decides which equation ILU(0) eliminates each phi with:
  // the psi-row carries the diagonally dominant -eps*Lap + (W''+beta)/eps
  // term, so pivoting on it factors the block system like a reduced
  // second-order operator. Pivoting on the phi-row (mass term) instead
  // leaves the stiff fourth-order coupling to GMRES and costs an order of
  // magnitude more iterations at large dt.
  const int nrows = sys.a.n;
  sparse::Csr ap;
  ap.n = nrows;
  ap.row_ptr.assign(nrows + 1, 0);
  ap.col.resize(sys.a.col.size());
  ap.val.resize(sys.a.val.size());
  std::vector<double> bp(nrows);
  for (int c = 0; c < nrows / 2; ++c) {
    const int phi_r = 2 * c, psi_r = 2 * c + 1;
    ap.row_ptr[phi_r + 1] = ap.row_ptr[phi_r] +
        (sys.a.row_ptr[psi_r + 1] - sys.a.row_ptr[psi_r]);
    ap.row_ptr[psi_r + 1] = ap.row_ptr[phi_r + 1] +
        (sys.a.row_ptr[phi_r + 1] - sys.a.row_ptr[phi_r]);
  }
  par::for_each_index(static_cast<std::size_t>(nrows / 2), [&](std::size_t c) {
    auto copy_row = [&](int src, int dst) {
      int q = ap.row_ptr[dst];
      for (int p = sys.a.row_ptr[src]; p < sys.a.row_ptr[src + 1]; ++p, ++q) {
        ap.col[q] = sys.a.col[p];
        ap.val[q] = sys.a.val[p];
      }
    };
    copy_row(2 * c + 1, 2 * c);
    copy_row(2 * c, 2 * c + 1);
    bp[2 * c] = sys.rhs[2 * c + 1];
    bp[2 * c + 1] = sys.rhs[2 * c];
  });

  sparse::Ilu0 prec = sparse::Ilu0::factor(ap);
  sparse::GmresOptions opt;
  opt.restart = cfg.gmres_restart;
  opt.rel_tol = cfg.gmres_rel_tol;
  opt.max_iters = 20 * cfg.gmres_restart;
  std::vector<double> x = sys.x0;
  sparse::GmresResult res = sparse::gmres(ap, &prec, bp, x, opt);
  if (!res.converged)
    throw SolverError("block solve: GMRES stagnated", res.history);

  const int n = sys.a.n / 2;
  BlockSolution out;
  out.phi.resize(n);
  out.psi.resize(n);
  par::for_each_index(static_cast<std::size_t>(n), [&](std::size_t i) {
    out.phi[i] = x[2 * i];
    out.psi[i] = x[2 * i + 1];
  });
  out.gmres_iters = res.iterations;
  return out;
}

StepResult advance_step(const SimState& state, const kernel::KernelTable& ker,
                        const SolverConfig& cfg, const Mesh2D& mesh) {
  const int n = mesh.cells();
  const double vol = mesh.cell_volume();

  StepResult rs;
  std::vector<double> phi_k = state.phi;
  std::vector<double> psi_k = state.psi;

  // Aitken (Irons--Tuck) dynamic relaxation on the Picard update. The plain
  // iteration has two slow modes tied to the mobility degeneracy: an
  // oscillatory one (eigenvalue near -1) along interface bands, which locks
  // into a small-amplitude limit cycle that no time-step reduction breaks,
  // and a monotone crawl (eigenvalue just below +1) where the field
  // saturates. The secant estimate theta = -theta * <d_prev, d - d_prev> /
  // |d - d_prev|^2 approximates 1/(1 - lambda) for the dominant mode, damping
  // the former and mildly extrapolating the latter; healthy steps keep
  // theta near 1 and are unaffected. Caps at [0.1, 2]: wider extrapolation
  // overshoots the clamp and chatters.
  std::vector<double> d(static_cast<std::size_t>(n));
  std::vector<double> d_prev;
  double theta = 1.0;

  for (int it = 0; it < cfg.picard_max; ++it) {
    BlockSystem sys = assemble_block(state, phi_k, psi_k, ker, cfg, mesh);
    BlockSolution sol = solve_block(sys, cfg);
    rs.gmres_iters_total += sol.gmres_iters;
    ++rs.picard_iters;

    if (cfg.enforce_bounds) {
      // Clipping perturbs the conserved functional Qbar(phi_k) * phi by a
      // measurable amount; log it so the audit can include it in the budget.
      const double delta = par::blocked_sum(
          static_cast<std::size_t>(n), [&](std::size_t i) {
            const double raw = sol.phi[i];
            const double cl = clamp_unit(raw);
            return cl == raw
                       ? 0.0
                       : ker.q_ratio(clamp_unit(phi_k[i])) * (cl - raw) * vol;
          });
      rs.clip_qmass_delta += std::abs(delta);
      par::for_each_index(static_cast<std::size_t>(n), [&](std::size_t i) {
        sol.phi[i] = clamp_unit(sol.phi[i]);
      });
    }

    par::for_each_index(static_cast<std::size_t>(n), [&](std::size_t i) {
      d[i] = sol.phi[i] - phi_k[i];
    });
    const double r = par::blocked_sum(static_cast<std::size_t>(n),
                                      [&](std::size_t i) {
                                        return std::abs(d[i]);
                                      }) /
                     n;
    rs.residual_history.push_back(r);
    rs.final_residual = r;
    if (r < cfg.picard_tol) {
      phi_k.swap(sol.phi);
      psi_k.swap(sol.psi);
      rs.converged = true;
      break;
    }

    if (!d_prev.empty()) {
      const double num =
          par::blocked_sum(static_cast<std::size_t>(n), [&](std::size_t i) {
            return d_prev[i] * (d[i] - d_prev[i]);
          });
      const double den =
          par::blocked_sum(static_cast<std::size_t>(n), [&](std::size_t i) {
            const double dd = d[i] - d_prev[i];
            return dd * dd;
          });
      if (den > 0.0)
        theta = std::min(2.0, std::max(0.1, -theta * num / den));
    }
    if (theta != 1.0) {
      par::for_each_index(static_cast<std::size_t>(n), [&](std::size_t i) {
        sol.phi[i] = clamp_unit(phi_k[i] + theta * d[i]);
        sol.psi[i] = psi_k[i] + theta * (sol.psi[i] - psi_k[i]);
      });
    }
    d_prev = d;
    phi_k.swap(sol.phi);
    psi_k.swap(sol.psi);
  }

  rs.gmres_iters_avg =
      rs.picard_iters ? double(rs.gmres_iters_total) / rs.picard_iters : 0.0;
  if (rs.converged) {
    rs.next.phi = std::move(phi_k);
    rs.next.psi = std::move(psi_k);
    rs.next.t = state.t + state.dt;
    rs.next.dt = state.dt;
    rs.next.step_index = state.step_index + 1;
  }
  return rs;
}

double adapt_dt(double dt, int picard_iters, const SolverConfig& cfg) {
  const double ratio = double(cfg.target_picard) / std::max(1, picard_iters);
  const double factor = std::min(1.3, std::max(0.7, ratio));
  return std::min(cfg.dt_max, std::max(cfg.dt_min, dt * factor));
}

double reject_dt(double dt, const SolverConfig& cfg) {
  if (dt <= cfg.dt_min) throw SolverError("time step underflow", {});
  return std::max(cfg.dt_min, 0.5 * dt);
}

void init_psi(SimState& state, const kernel::KernelTable& ker,
              const SolverConfig& cfg, const Mesh2D& mesh) {
  const double h2 = mesh.dx * mesh.dx;
  state.psi.assign(mesh.cells(), 0.0);
  par::for_each_index(static_cast<std::size_t>(mesh.cells()),
                      [&](std::size_t cc) {
                        const int c = static_cast<int>(cc);
                        const int i = c % mesh.nx;
                        const int j = c / mesh.nx;
                        const Stencil st = neighbors(mesh, i, j);
                        double lap = 0.0;
                        for (int f = 0; f < st.count; ++f)
                          lap += state.phi[st.nb[f]] - state.phi[c];
                        lap /= h2;
                        const double pc = clamp_unit(state.phi[c]);
                        const double mu =
                            -cfg.epsilon * lap + w_prime(pc) / cfg.epsilon;
                        state.psi[c] =
                            mu / std::max(ker.q_prime(pc), cfg.alpha_qprime);
                      });
}

}  // namespace chic::fv
