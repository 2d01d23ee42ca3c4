#pragma once

#include <variant>
#include <vector>

#include "chic/fv_solver.hpp"

namespace chic::ic {

struct Uniform {
  double value = 1.0;
};

// Vertical interface: phi = +1 for x < position.
struct Planar {
  double position = 0.5;
};

struct Disc {
  double cx = 0.5, cy = 0.5, r = 0.25;
};

struct Droplets {
  std::vector<Disc> discs;
};

// Polar curve r(theta) = r0 + a cos(petals * theta); star-shaped about the
// center (requires r0 > |a|). The signed distance has no closed form and is
// taken against a finely sampled boundary polyline.
struct Flower {
  double cx = 0.5, cy = 0.5;
  double r0 = 0.25, a = 0.08;
  int petals = 6;
  int samples = 4096;
};

using InitialCondition = std::variant<Uniform, Planar, Disc, Droplets, Flower>;

// phi = clip(d(x)/epsilon, -1, 1) at cell centers, d the signed distance to
// the shape (union of shapes via max). Throws ConfigError when the shape does
// not fit in the domain with a 3*epsilon margin.
std::vector<double> init_field(const InitialCondition& icv, double epsilon,
                               const fv::Mesh2D& mesh);

}  // namespace chic::ic
