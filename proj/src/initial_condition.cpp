#include "chic/initial_condition.hpp"

#include <algorithm>
#include <cmath>

#include "chic/errors.hpp"
#include "chic/parallel.hpp"

namespace chic::ic {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_margin(bool ok) {
  if (!ok)
    throw ConfigError(
        "initial condition does not fit the domain with a 3*epsilon margin");
}

double disc_distance(const Disc& d, double x, double y) {
  return d.r - std::hypot(x - d.cx, y - d.cy);
}

struct FlowerGeometry {
  Flower f;
  std::vector<double> px, py;  // closed boundary polyline (first point repeated)

  explicit FlowerGeometry(const Flower& fl) : f(fl) {
    px.resize(f.samples + 1);
    py.resize(f.samples + 1);
    for (int k = 0; k <= f.samples; ++k) {
      const double th = 2.0 * kPi * k / f.samples;
      const double r = f.r0 + f.a * std::cos(f.petals * th);
      px[k] = f.cx + r * std::cos(th);
      py[k] = f.cy + r * std::sin(th);
    }
  }

  // band: distances beyond it are only needed up to their sign (the caller
  // clips d/epsilon), so the cheap annulus bound suffices there.
  double signed_distance(double x, double y, double band) const {
    const double rx = x - f.cx, ry = y - f.cy;
    const double rho = std::hypot(rx, ry);
    const double rcurve = f.r0 + f.a * std::cos(f.petals * std::atan2(ry, rx));
    const double sign = rho < rcurve ? 1.0 : -1.0;
    const double amax = f.r0 + std::abs(f.a), amin = f.r0 - std::abs(f.a);
    const double slack = std::max(rho - amax, amin - rho);
    if (slack >= band) return sign * slack;  // true |d| >= slack, clips anyway
    double best = 1e300;
    for (int k = 0; k < f.samples; ++k) {
      const double ax = px[k], ay = py[k];
      const double bx = px[k + 1], by = py[k + 1];
      const double ex = bx - ax, ey = by - ay;
      const double t = std::clamp(
          ((x - ax) * ex + (y - ay) * ey) / (ex * ex + ey * ey), 0.0, 1.0);
      const double qx = ax + t * ex - x, qy = ay + t * ey - y;
      best = std::min(best, qx * qx + qy * qy);
    }
    return sign * std::sqrt(best);
  }
};

}  // namespace

std::vector<double> init_field(const InitialCondition& icv, double epsilon,
                               const fv::Mesh2D& mesh) {
  const double margin = 3.0 * epsilon;
  const double xlo = mesh.x0, xhi = mesh.x0 + mesh.nx * mesh.dx;
  const double ylo = mesh.y0, yhi = mesh.y0 + mesh.ny * mesh.dy;
  auto fits_disc = [&](double cx, double cy, double r) {
    return cx - r - margin >= xlo && cx + r + margin <= xhi &&
           cy - r - margin >= ylo && cy + r + margin <= yhi;
  };

  std::vector<double> phi(mesh.cells());
  auto fill = [&](auto&& dist) {
    par::for_each_index(phi.size(), [&](std::size_t c) {
      const int i = static_cast<int>(c) % mesh.nx;
      const int j = static_cast<int>(c) / mesh.nx;
      const double d = dist(mesh.xc(i), mesh.yc(j));
      phi[c] = std::clamp(d / epsilon, -1.0, 1.0);
    });
  };

  if (const auto* u = std::get_if<Uniform>(&icv)) {
    if (std::abs(u->value) > 1.0)
      throw ConfigError("uniform initial value must lie in [-1,1]");
    std::fill(phi.begin(), phi.end(), u->value);
  } else if (const auto* p = std::get_if<Planar>(&icv)) {
    require_margin(p->position - margin >= xlo && p->position + margin <= xhi);
    fill([&](double x, double) { return p->position - x; });
  } else if (const auto* d = std::get_if<Disc>(&icv)) {
    require_margin(d->r > 0.0 && fits_disc(d->cx, d->cy, d->r));
    fill([&](double x, double y) { return disc_distance(*d, x, y); });
  } else if (const auto* ds = std::get_if<Droplets>(&icv)) {
    if (ds->discs.empty()) throw ConfigError("droplets list is empty");
    for (const auto& d : ds->discs)
      require_margin(d.r > 0.0 && fits_disc(d.cx, d.cy, d.r));
    fill([&](double x, double y) {
      double best = -1e300;
      for (const auto& d : ds->discs)
        best = std::max(best, disc_distance(d, x, y));
      return best;
    });
  } else {
    const auto& f = std::get<Flower>(icv);
    if (!(f.r0 > std::abs(f.a)))
      throw ConfigError("flower requires r0 > |a| (star-shaped)");
    if (f.petals < 1 || f.samples < 64)
      throw ConfigError("flower needs petals >= 1 and samples >= 64");
    require_margin(fits_disc(f.cx, f.cy, f.r0 + std::abs(f.a)));
    FlowerGeometry geo(f);
    fill([&](double x, double y) { return geo.signed_distance(x, y, epsilon); });
  }
  return phi;
}

}  // namespace chic::ic
