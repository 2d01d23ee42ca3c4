#include "chic/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "chic/errors.hpp"

namespace chic::app {

namespace {

void write_vtk(const std::string& path, const fv::Mesh2D& mesh,
               const std::vector<double>& phi, const std::vector<double>& psi,
               double t) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path);
  char buf[256];
  out << "# vtk DataFile Version 3.0\n";
  std::snprintf(buf, sizeof buf, "phase field snapshot t=%.17g\n", t);
  out << buf << "ASCII\nDATASET STRUCTURED_POINTS\n";
  std::snprintf(buf, sizeof buf, "DIMENSIONS %d %d 1\n", mesh.nx + 1,
                mesh.ny + 1);
  out << buf;
  std::snprintf(buf, sizeof buf, "ORIGIN %.17g %.17g 0\n", mesh.x0, mesh.y0);
  out << buf;
  std::snprintf(buf, sizeof buf, "SPACING %.17g %.17g 1\n", mesh.dx, mesh.dy);
  out << buf;
  std::snprintf(buf, sizeof buf, "CELL_DATA %d\n", mesh.cells());
  out << buf;
  auto dump = [&](const char* name, const std::vector<double>& v) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (double x : v) {
      std::snprintf(buf, sizeof buf, "%.17g\n", x);
      out << buf;
    }
  };
  dump("phi", phi);
  dump("psi", psi);
}

}  // namespace

RunArtifacts run_experiment(
    const RunConfig& cfg,
    const std::function<void(const diag::DiagnosticsRecord&)>& on_record) {
  validate(cfg);
  const fv::Mesh2D mesh = make_mesh(cfg);
  kernel::KernelSpec spec = kernel::presets::by_name(cfg.kernel);
  const kernel::KernelTable ker = kernel::build_kernel(spec, cfg.seed_table);
  const fv::SolverConfig scfg = make_solver_config(cfg, mesh, spec);

  fv::SimState state;
  state.phi = ic::init_field(make_initial_condition(cfg), scfg.epsilon, mesh);
  fv::init_psi(state, ker, scfg, mesh);

  RunArtifacts art;
  auto emit = [&](const diag::DiagnosticsRecord& r) {
    art.records.push_back(r);
    if (on_record) on_record(r);
  };

  diag::DiagnosticsRecord first = diag::snapshot(state, ker, scfg.epsilon, mesh);
  first.dt = 0.0;
  emit(first);
  const double err_v0 = first.err_v;
  art.initial_energy = first.energy;
  art.min_energy = first.energy;

  double dt_ctrl =
      std::min(scfg.dt_max, std::max(scfg.dt_min, scfg.dt_min * 1e3));
  std::int64_t picard_total = 0, gmres_total = 0;
  const double t_final = cfg.t_end * (1.0 - 1e-12);

  while (state.t < t_final) {
    state.dt = std::min(dt_ctrl, cfg.t_end - state.t);
    const fv::StepResult res = fv::advance_step(state, ker, scfg, mesh);
    if (!res.converged) {
      ++art.rejected_steps;
      dt_ctrl = fv::reject_dt(state.dt, scfg);
      continue;
    }
    const double dt_used = state.dt;
    state = res.next;
    ++art.total_steps;
    picard_total += res.picard_iters;
    gmres_total += res.gmres_iters_total;
    art.clip_budget += res.clip_qmass_delta;

    if (art.total_steps % cfg.output_every == 0 || state.t >= t_final) {
      diag::DiagnosticsRecord r = diag::snapshot(state, ker, scfg.epsilon, mesh);
      r.err_v_drift = r.err_v - err_v0;
      r.picard_iters = res.picard_iters;
      r.gmres_iters_avg = res.gmres_iters_avg;
      emit(r);
      art.min_energy = std::min(art.min_energy, r.energy);
    }
    dt_ctrl = fv::adapt_dt(dt_used, res.picard_iters, scfg);
  }

  art.final_drift = art.records.back().err_v_drift;
  art.audit_budget =
      10.0 * (scfg.picard_tol + scfg.gmres_rel_tol) * mesh.domain_volume() +
      art.clip_budget;
  art.verdict = diag::audit_run(art.records, art.audit_budget);
  art.avg_picard =
      art.total_steps ? double(picard_total) / art.total_steps : 0.0;
  art.avg_gmres = picard_total ? double(gmres_total) / picard_total : 0.0;

  if (!cfg.out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    art.csv_path = cfg.out_dir + "/diagnostics.csv";
    art.field_path = cfg.out_dir + "/field_final.vtk";
    art.summary_path = cfg.out_dir + "/summary.txt";
    art.config_path = cfg.out_dir + "/config.txt";
    diag::write_csv(art.csv_path, art.records);
    write_vtk(art.field_path, mesh, state.phi, state.psi, state.t);
    std::ofstream sum(art.summary_path);
    if (!sum) throw Error("cannot open for writing: " + art.summary_path);
    char b[256];
    sum << "experiment = " << cfg.experiment << "\n";
    sum << "kernel = " << cfg.kernel << "\n";
    std::snprintf(b, sizeof b, "epsilon = %.17g\n", scfg.epsilon);
    sum << b;
    std::snprintf(b, sizeof b, "mobility_exponent = %d\n",
                  scfg.mobility_exponent);
    sum << b;
    std::snprintf(b, sizeof b, "steps = %lld\nrejected_steps = %lld\n",
                  static_cast<long long>(art.total_steps),
                  static_cast<long long>(art.rejected_steps));
    sum << b;
    std::snprintf(b, sizeof b, "final_err_v_drift = %.17g\n", art.final_drift);
    sum << b;
    std::snprintf(b, sizeof b, "abs_final_err_v_drift = %.17g\n",
                  std::abs(art.final_drift));
    sum << b;
    std::snprintf(b, sizeof b, "min_energy = %.17g\n", art.min_energy);
    sum << b;
    std::snprintf(b, sizeof b, "audit = %s\n",
                  art.verdict.pass ? "PASS" : "FAIL");
    sum << b;
    std::snprintf(b, sizeof b, "audit_budget = %.17g\n", art.audit_budget);
    sum << b;
    std::snprintf(b, sizeof b, "max_qmass_deviation = %.17g\n",
                  art.verdict.max_qmass_deviation);
    sum << b;
    std::snprintf(b, sizeof b, "clip_budget = %.17g\n", art.clip_budget);
    sum << b;
    std::snprintf(b, sizeof b, "avg_picard = %.17g\navg_gmres = %.17g\n",
                  art.avg_picard, art.avg_gmres);
    sum << b;
    std::ofstream cfgout(art.config_path);
    cfgout << render_config(cfg);
  }
  return art;
}

RunConfig preset_flower(const std::string& kernel, double eps_dx, bool full) {
  RunConfig c;
  c.experiment = "flower";
  c.kernel = kernel;
  c.epsilon_dx = eps_dx;
  if (full) {
    c.nx = c.ny = 200;
    c.t_end = 0.02;
  } else {
    c.nx = c.ny = 100;
    c.t_end = 0.005;
  }
  c.lx = c.ly = 1.0;
  c.output_every = 1;
  return c;
}

RunConfig preset_droplets(const std::string& kernel, double eps_dx) {
  RunConfig c;
  c.experiment = "droplets";
  c.kernel = kernel;
  c.epsilon_dx = eps_dx;
  c.nx = 400;
  c.ny = 100;
  c.lx = 4.0;
  c.ly = 1.0;
  c.t_end = 0.02;
  // Four droplets on the midline, radii 0.15/0.10/0.06/0.03 (centers spread
  // so the diffuse layers never overlap at the widest epsilon).
  c.droplets = "0.7,0.5,0.15; 1.5,0.5,0.10; 2.2,0.5,0.06; 2.8,0.5,0.03";
  c.output_every = 1;
  return c;
}

RunConfig preset_two_droplets(const std::string& kernel) {
  RunConfig c;
  c.experiment = "droplets";
  c.kernel = kernel;
  c.epsilon_dx = 2.0;
  c.nx = 100;
  c.ny = 50;
  c.lx = 2.0;
  c.ly = 1.0;
  c.t_end = 0.005;
  c.droplets = "0.6,0.5,0.22; 1.35,0.5,0.14";
  c.output_every = 1;
  return c;
}

RunConfig preset_disc(const std::string& kernel, double eps_dx) {
  RunConfig c;
  c.experiment = "disc";
  c.kernel = kernel;
  c.epsilon_dx = eps_dx;
  c.nx = c.ny = 100;
  c.lx = c.ly = 1.0;
  c.disc_cx = c.disc_cy = 0.5;
  c.disc_r = 0.25;
  c.t_end = 0.005;
  c.output_every = 1;
  return c;
}

RunConfig preset_planar(const std::string& kernel) {
  RunConfig c;
  c.experiment = "planar";
  c.kernel = kernel;
  c.epsilon_dx = 2.0;
  c.nx = 64;
  c.ny = 16;
  c.lx = 4.0;
  c.ly = 1.0;
  c.planar_x = 2.0;
  c.t_end = 0.005;
  c.output_every = 1;
  return c;
}

RunConfig preset_by_name(const std::string& name, const std::string& kernel,
                         double eps_dx) {
  if (name == "flower_full") return preset_flower(kernel, eps_dx, true);
  if (name == "flower_fast") return preset_flower(kernel, eps_dx, false);
  if (name == "droplets") return preset_droplets(kernel, eps_dx);
  if (name == "two_droplets") return preset_two_droplets(kernel);
  if (name == "disc") return preset_disc(kernel, eps_dx);
  if (name == "planar") return preset_planar(kernel);
  throw ConfigError("unknown preset '" + name + "'");
}

std::vector<std::string> preset_names() {
  return {"flower_full", "flower_fast", "droplets",
          "two_droplets", "disc",       "planar"};
}

}  // namespace chic::app
