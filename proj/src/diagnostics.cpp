#include "chic/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "chic/errors.hpp"
#include "chic/parallel.hpp"

namespace chic::diag {

namespace {

// Area of {v > 0} inside the triangle (p0,p1,p2) with vertex values v0..v2
// and linear interpolation. Exact up to roundoff; zero-valued vertices count
// as non-positive, which pairs the P=1 and P=2 branches so that the areas of
// {v > 0} and {-v > 0} sum to the full triangle.
double tri_positive_area(double ax, double ay, double v0, double bx, double by,
                         double v1, double cx, double cy, double v2) {
  const double area =
      0.5 * std::abs((bx - ax) * (cy - ay) - (cx - ax) * (by - ay));
  const bool p0 = v0 > 0.0, p1 = v1 > 0.0, p2 = v2 > 0.0;
  const int np = int(p0) + int(p1) + int(p2);
  if (np == 0) return 0.0;
  if (np == 3) return area;

  // Rotate so the odd-one-out is vertex 0.
  double w0 = v0, w1 = v1, w2 = v2;
  bool lone_positive;
  if (np == 1) {
    lone_positive = true;
    if (p1) {
      w0 = v1; w1 = v2; w2 = v0;
    } else if (p2) {
      w0 = v2; w1 = v0; w2 = v1;
    }
  } else {
    lone_positive = false;
    if (!p0) {
      // already: v0 is the lone non-positive
    } else if (!p1) {
      w0 = v1; w1 = v2; w2 = v0;
    } else {
      w0 = v2; w1 = v0; w2 = v1;
    }
  }
  const double t1 = w0 / (w0 - w1);  // zero crossing toward vertex 1
  const double t2 = w0 / (w0 - w2);
  const double corner = area * t1 * t2;
  return lone_positive ? corner : area - corner;
}

double quad_positive_area(double x0, double x1, double y0, double y1,
                          double f00, double f10, double f01, double f11) {
  const double xm = 0.5 * (x0 + x1), ym = 0.5 * (y0 + y1);
  const double fm = 0.25 * (f00 + f10 + f01 + f11);
  double s = 0.0;
  s += tri_positive_area(x0, y0, f00, x1, y0, f10, xm, ym, fm);
  s += tri_positive_area(x1, y0, f10, x1, y1, f11, xm, ym, fm);
  s += tri_positive_area(x1, y1, f11, x0, y1, f01, xm, ym, fm);
  s += tri_positive_area(x0, y1, f01, x0, y0, f00, xm, ym, fm);
  return s;
}

}  // namespace

double q_volume(const std::vector<double>& phi, const kernel::KernelTable& ker,
                const fv::Mesh2D& mesh) {
  const double vol = mesh.cell_volume();
  return par::blocked_sum(phi.size(), [&](std::size_t i) {
    return 0.5 * (1.0 + ker.q(phi[i])) * vol;
  });
}

double q_mass(const std::vector<double>& phi, const kernel::KernelTable& ker,
              const fv::Mesh2D& mesh) {
  const double vol = mesh.cell_volume();
  return par::blocked_sum(phi.size(),
                          [&](std::size_t i) { return ker.q(phi[i]) * vol; });
}

double geometric_volume(const std::vector<double>& phi,
                        const fv::Mesh2D& mesh) {
  const int nx = mesh.nx, ny = mesh.ny;
  // Corner lattice: cell centers plus a constant-extended ring on the domain
  // boundary itself, so the dual quads tile the domain exactly.
  auto cx = [&](int I) {
    if (I == 0) return mesh.x0;
    if (I == nx + 1) return mesh.x0 + nx * mesh.dx;
    return mesh.xc(I - 1);
  };
  auto cy = [&](int J) {
    if (J == 0) return mesh.y0;
    if (J == ny + 1) return mesh.y0 + ny * mesh.dy;
    return mesh.yc(J - 1);
  };
  auto cval = [&](int I, int J) {
    const int i = std::min(std::max(I - 1, 0), nx - 1);
    const int j = std::min(std::max(J - 1, 0), ny - 1);
    return phi[mesh.id(i, j)];
  };

  const std::size_t nquads =
      static_cast<std::size_t>(nx + 1) * static_cast<std::size_t>(ny + 1);
  return par::blocked_sum(nquads, [&](std::size_t q) {
    const int I = static_cast<int>(q % (nx + 1));
    const int J = static_cast<int>(q / (nx + 1));
    return quad_positive_area(cx(I), cx(I + 1), cy(J), cy(J + 1), cval(I, J),
                              cval(I + 1, J), cval(I, J + 1),
                              cval(I + 1, J + 1));
  });
}

double free_energy(const std::vector<double>& phi, double epsilon,
                   const fv::Mesh2D& mesh) {
  const int nx = mesh.nx, ny = mesh.ny;
  const double vol = mesh.cell_volume();
  const double bulk = par::blocked_sum(phi.size(), [&](std::size_t i) {
    return fv::w_potential(phi[i]) * vol / epsilon;
  });
  // Interior faces: x-faces indexed first, then y-faces (fixed order).
  const std::size_t nxf = static_cast<std::size_t>(nx - 1) * ny;
  const std::size_t nyf = static_cast<std::size_t>(nx) * (ny - 1);
  const double grad =
      par::blocked_sum(nxf + nyf, [&](std::size_t f) {
        double d;
        if (f < nxf) {
          const int i = static_cast<int>(f % (nx - 1));
          const int j = static_cast<int>(f / (nx - 1));
          d = phi[mesh.id(i + 1, j)] - phi[mesh.id(i, j)];
        } else {
          const std::size_t g = f - nxf;
          const int i = static_cast<int>(g % nx);
          const int j = static_cast<int>(g / nx);
          d = phi[mesh.id(i, j + 1)] - phi[mesh.id(i, j)];
        }
        return d * d;
      }) *
      0.5 * epsilon;
  return bulk + grad;
}

DiagnosticsRecord snapshot(const fv::SimState& state,
                           const kernel::KernelTable& ker, double epsilon,
                           const fv::Mesh2D& mesh) {
  DiagnosticsRecord r;
  r.t = state.t;
  r.dt = state.dt;
  r.vq = q_volume(state.phi, ker, mesh);
  r.vgeom = geometric_volume(state.phi, mesh);
  r.err_v = r.vq - r.vgeom;
  r.energy = free_energy(state.phi, epsilon, mesh);
  r.qmass = q_mass(state.phi, ker, mesh);
  return r;
}

AuditVerdict audit_run(const std::vector<DiagnosticsRecord>& records,
                       double budget) {
  if (records.size() < 2) throw Error("audit: need at least 2 records");
  AuditVerdict v;
  const double q0 = records.front().qmass;
  const double e0 = std::abs(records.front().energy);
  for (std::size_t k = 0; k < records.size(); ++k) {
    const double dev = std::abs(records[k].qmass - q0);
    if (dev > v.max_qmass_deviation) {
      v.max_qmass_deviation = dev;
      v.worst_qmass_step = static_cast<int>(k);
    }
    if (k > 0) {
      const double up = records[k].energy - records[k - 1].energy;
      const double rel = e0 > 0.0 ? up / e0 : up;
      if (rel > v.max_energy_uptick) {
        v.max_energy_uptick = rel;
        v.worst_energy_step = static_cast<int>(k);
      }
    }
  }
  const bool mass_ok = v.max_qmass_deviation <= budget;
  const bool energy_ok = v.max_energy_uptick <= 1e-10;
  v.pass = mass_ok && energy_ok;
  char buf[192];
  std::snprintf(buf, sizeof buf,
                "%s: max |Qmass drift| %.3e (budget %.3e, step %d); max "
                "energy uptick %.3e rel (step %d)",
                v.pass ? "PASS" : "FAIL", v.max_qmass_deviation, budget,
                v.worst_qmass_step, v.max_energy_uptick, v.worst_energy_step);
  v.message = buf;
  return v;
}

void write_csv(const std::string& path,
               const std::vector<DiagnosticsRecord>& records) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path);
  out << "t,dt,VQ,Vgeom,ErrV,ErrV_drift,energy,Qmass,picard_iters,"
         "gmres_iters_avg\n";
  char line[512];
  for (const auto& r : records) {
    std::snprintf(line, sizeof line,
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g\n",
                  r.t, r.dt, r.vq, r.vgeom, r.err_v, r.err_v_drift, r.energy,
                  r.qmass, r.picard_iters, r.gmres_iters_avg);
    out << line;
  }
}

std::vector<DiagnosticsRecord> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error("empty csv: " + path);
  std::vector<DiagnosticsRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    DiagnosticsRecord r;
    char comma;
    ss >> r.t >> comma >> r.dt >> comma >> r.vq >> comma >> r.vgeom >> comma >>
        r.err_v >> comma >> r.err_v_drift >> comma >> r.energy >> comma >>
        r.qmass >> comma >> r.picard_iters >> comma >> r.gmres_iters_avg;
    if (ss.fail()) throw Error("malformed csv row in " + path);
    out.push_back(r);
  }
  return out;
}

}  // namespace chic::diag
