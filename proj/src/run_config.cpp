#include "chic/run_config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "chic/errors.hpp"

namespace chic::app {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: bad number for '" + key + "': " + v);
  }
}

int to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const int x = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer for '" + key + "': " + v);
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config: bad boolean for '" + key + "': " + v);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    const std::string k = trim(line.substr(0, eq));
    const std::string v = trim(line.substr(eq + 1));

    if (k == "experiment") c.experiment = v;
    else if (k == "nx") c.nx = to_int(k, v);
    else if (k == "ny") c.ny = to_int(k, v);
    else if (k == "lx") c.lx = to_double(k, v);
    else if (k == "ly") c.ly = to_double(k, v);
    else if (k == "x0") c.x0 = to_double(k, v);
    else if (k == "y0") c.y0 = to_double(k, v);
    else if (k == "epsilon") c.epsilon = to_double(k, v);
    else if (k == "epsilon_dx") c.epsilon_dx = to_double(k, v);
    else if (k == "kernel") c.kernel = v;
    else if (k == "seed_table") c.seed_table = to_int(k, v);
    else if (k == "mobility_exponent") c.mobility_exponent = to_int(k, v);
    else if (k == "beta") c.beta = to_double(k, v);
    else if (k == "picard_tol") c.picard_tol = to_double(k, v);
    else if (k == "picard_max") c.picard_max = to_int(k, v);
    else if (k == "target_picard") c.target_picard = to_int(k, v);
    else if (k == "dt_min") c.dt_min = to_double(k, v);
    else if (k == "dt_max") c.dt_max = to_double(k, v);
    else if (k == "gmres_restart") c.gmres_restart = to_int(k, v);
    else if (k == "gmres_rel_tol") c.gmres_rel_tol = to_double(k, v);
    else if (k == "alpha_qprime") c.alpha_qprime = to_double(k, v);
    else if (k == "enforce_bounds") c.enforce_bounds = to_bool(k, v);
    else if (k == "t_end") c.t_end = to_double(k, v);
    else if (k == "output_every") c.output_every = to_int(k, v);
    else if (k == "out_dir") c.out_dir = v;
    else if (k == "flower_r0") c.flower_r0 = to_double(k, v);
    else if (k == "flower_a") c.flower_a = to_double(k, v);
    else if (k == "flower_petals") c.flower_petals = to_int(k, v);
    else if (k == "flower_samples") c.flower_samples = to_int(k, v);
    else if (k == "disc_cx") c.disc_cx = to_double(k, v);
    else if (k == "disc_cy") c.disc_cy = to_double(k, v);
    else if (k == "disc_r") c.disc_r = to_double(k, v);
    else if (k == "planar_x") c.planar_x = to_double(k, v);
    else if (k == "uniform_value") c.uniform_value = to_double(k, v);
    else if (k == "droplets") c.droplets = v;
    else
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": unknown key '" + k + "'");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string render_config(const RunConfig& c) {
  std::ostringstream o;
  o << "experiment = " << c.experiment << "\n";
  o << "nx = " << c.nx << "\n";
  o << "ny = " << c.ny << "\n";
  o << "lx = " << fmt(c.lx) << "\n";
  o << "ly = " << fmt(c.ly) << "\n";
  o << "x0 = " << fmt(c.x0) << "\n";
  o << "y0 = " << fmt(c.y0) << "\n";
  o << "epsilon = " << fmt(c.epsilon) << "\n";
  o << "epsilon_dx = " << fmt(c.epsilon_dx) << "\n";
  o << "kernel = " << c.kernel << "\n";
  o << "seed_table = " << c.seed_table << "\n";
  o << "mobility_exponent = " << c.mobility_exponent << "\n";
  o << "beta = " << fmt(c.beta) << "\n";
  o << "picard_tol = " << fmt(c.picard_tol) << "\n";
  o << "picard_max = " << c.picard_max << "\n";
  o << "target_picard = " << c.target_picard << "\n";
  o << "dt_min = " << fmt(c.dt_min) << "\n";
  o << "dt_max = " << fmt(c.dt_max) << "\n";
  o << "gmres_restart = " << c.gmres_restart << "\n";
  o << "gmres_rel_tol = " << fmt(c.gmres_rel_tol) << "\n";
  o << "alpha_qprime = " << fmt(c.alpha_qprime) << "\n";
  o << "enforce_bounds = " << (c.enforce_bounds ? "true" : "false") << "\n";
  o << "t_end = " << fmt(c.t_end) << "\n";
  o << "output_every = " << c.output_every << "\n";
  o << "out_dir = " << c.out_dir << "\n";
  o << "flower_r0 = " << fmt(c.flower_r0) << "\n";
  o << "flower_a = " << fmt(c.flower_a) << "\n";
  o << "flower_petals = " << c.flower_petals << "\n";
  o << "flower_samples = " << c.flower_samples << "\n";
  o << "disc_cx = " << fmt(c.disc_cx) << "\n";
  o << "disc_cy = " << fmt(c.disc_cy) << "\n";
  o << "disc_r = " << fmt(c.disc_r) << "\n";
  o << "planar_x = " << fmt(c.planar_x) << "\n";
  o << "uniform_value = " << fmt(c.uniform_value) << "\n";
  o << "droplets = " << c.droplets << "\n";
  return o.str();
}

void validate(const RunConfig& c) {
  static const char* kinds[] = {"flower", "droplets", "disc", "planar",
                                "uniform"};
  bool known = false;
  for (const char* k : kinds) known = known || c.experiment == k;
  if (!known)
    throw ConfigError("config: unknown experiment '" + c.experiment + "'");
  if (c.kernel.empty()) throw ConfigError("config: kernel is required");
  if (!(c.t_end > 0.0)) throw ConfigError("config: t_end must be > 0");
  if (c.output_every < 1) throw ConfigError("config: output_every must be >= 1");
  if ((c.epsilon > 0.0) == (c.epsilon_dx > 0.0))
    throw ConfigError(
        "config: exactly one of epsilon / epsilon_dx must be positive");
  if (c.seed_table < 16) throw ConfigError("config: seed_table too small");
  if (c.mobility_exponent < 0)
    throw ConfigError("config: mobility_exponent must be >= 0 (0 = auto)");
}

fv::Mesh2D make_mesh(const RunConfig& c) {
  return fv::Mesh2D::make(c.nx, c.ny, c.lx, c.ly, c.x0, c.y0);
}

double resolve_epsilon(const RunConfig& c, const fv::Mesh2D& mesh) {
  const double eps = c.epsilon_dx > 0.0 ? c.epsilon_dx * mesh.dx : c.epsilon;
  if (eps < 1.5 * mesh.dx)
    throw ConfigError("config: epsilon must be >= 1.5 dx (unresolved interface)");
  return eps;
}

int resolve_mobility(const RunConfig& c, const kernel::KernelSpec& spec) {
  if (c.mobility_exponent > 0) return c.mobility_exponent;
  // Experiment pairing: the k = 2 and k = 8 polynomial kernels run with a
  // cubic mobility for compatibility; everything else uses the quadratic one.
  if (spec.family == kernel::Family::Polynomial && (spec.k == 2 || spec.k == 8))
    return 3;
  return 2;
}

fv::SolverConfig make_solver_config(const RunConfig& c, const fv::Mesh2D& mesh,
                                    const kernel::KernelSpec& spec) {
  fv::SolverConfig s;
  s.epsilon = resolve_epsilon(c, mesh);
  s.mobility_exponent = resolve_mobility(c, spec);
  s.beta = c.beta;
  s.picard_tol = c.picard_tol;
  s.picard_max = c.picard_max;
  s.target_picard = c.target_picard;
  s.dt_min = c.dt_min;
  s.dt_max = c.dt_max;
  s.gmres_restart = c.gmres_restart;
  s.gmres_rel_tol = c.gmres_rel_tol;
  s.alpha_qprime = c.alpha_qprime;
  s.enforce_bounds = c.enforce_bounds;
  s.validate();
  return s;
}

ic::InitialCondition make_initial_condition(const RunConfig& c) {
  if (c.experiment == "uniform") return ic::Uniform{c.uniform_value};
  if (c.experiment == "planar") return ic::Planar{c.planar_x};
  if (c.experiment == "disc") return ic::Disc{c.disc_cx, c.disc_cy, c.disc_r};
  if (c.experiment == "flower")
    return ic::Flower{c.x0 + 0.5 * c.lx, c.y0 + 0.5 * c.ly,
                      c.flower_r0,       c.flower_a,
                      c.flower_petals,   c.flower_samples};
  if (c.experiment == "droplets") {
    ic::Droplets ds;
    std::istringstream ss(c.droplets);
    std::string item;
    while (std::getline(ss, item, ';')) {
      item = trim(item);
      if (item.empty()) continue;
      ic::Disc d;
      char c1, c2;
      std::istringstream fs(item);
      fs >> d.cx >> c1 >> d.cy >> c2 >> d.r;
      if (fs.fail() || c1 != ',' || c2 != ',')
        throw ConfigError("config: bad droplet entry '" + item +
                          "' (want cx,cy,r)");
      ds.discs.push_back(d);
    }
    if (ds.discs.empty())
      throw ConfigError("config: droplets experiment needs a droplets list");
    return ds;
  }
  throw ConfigError("config: unknown experiment '" + c.experiment + "'");
}

}  // namespace chic::app
