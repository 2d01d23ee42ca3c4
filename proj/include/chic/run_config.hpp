#pragma once

#include <string>

#include "chic/fv_solver.hpp"
#include "chic/initial_condition.hpp"
#include "chic/kernel.hpp"

namespace chic::app {

// One experiment = one flat key=value document ('#' comments). Exactly one of
// epsilon (absolute) / epsilon_dx (multiple of dx) must be positive;
// mobility_exponent 0 means "pair automatically with the kernel" (cubic for
// the k >= 2 polynomial kernels, quartic otherwise).
struct RunConfig {
  std::string experiment;  // flower | droplets | disc | planar | uniform
  int nx = 0, ny = 0;
  double lx = 0.0, ly = 0.0, x0 = 0.0, y0 = 0.0;
  double epsilon = 0.0;
  double epsilon_dx = 0.0;
  std::string kernel;
  int seed_table = 512;
  int mobility_exponent = 0;

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

  double t_end = 0.0;
  int output_every = 1;
  std::string out_dir;

  double flower_r0 = 0.25, flower_a = 0.08;
  int flower_petals = 6, flower_samples = 4096;
  double disc_cx = 0.5, disc_cy = 0.5, disc_r = 0.25;
  double planar_x = 0.5;
  double uniform_value = 1.0;
  std::string droplets;  // "cx,cy,r; cx,cy,r; ..."

  bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config(const std::string& text);  // throws ConfigError
RunConfig load_config(const std::string& path);
// Renders every field; parse_config(render_config(c)) == c (doubles are
// written with %.17g, so the round trip is exact).
std::string render_config(const RunConfig& cfg);

void validate(const RunConfig& cfg);  // structural checks, throws ConfigError

fv::Mesh2D make_mesh(const RunConfig& cfg);
// Absolute interface width; enforces the epsilon >= 1.5 dx resolvability guard.
double resolve_epsilon(const RunConfig& cfg, const fv::Mesh2D& mesh);
int resolve_mobility(const RunConfig& cfg, const kernel::KernelSpec& spec);
fv::SolverConfig make_solver_config(const RunConfig& cfg,
                                    const fv::Mesh2D& mesh,
                                    const kernel::KernelSpec& spec);
ic::InitialCondition make_initial_condition(const RunConfig& cfg);

}  // namespace chic::app
