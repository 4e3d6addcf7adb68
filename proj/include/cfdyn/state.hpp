#pragma once

#include <vector>

namespace cfdyn {

// jet point (t, r, theta, v, omega) on which all polar first integrals
// are evaluated; v = dr/dt, omega = dtheta/dt
struct PolarState {
  double t = 0.0;
  double r = 1.0;
  double theta = 0.0;
  double v = 0.0;
  double omega = 0.0;
};

// position/velocity in R^n, n in 2..8
struct CartesianState {
  double t = 0.0;
  std::vector<double> r;
  std::vector<double> v;

  int dim() const { return int(r.size()); }
};

}  // namespace cfdyn
