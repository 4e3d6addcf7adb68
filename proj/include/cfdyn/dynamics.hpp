#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cfdyn/potential.hpp"
#include "cfdyn/state.hpp"

namespace cfdyn {

struct Event {
  enum class Kind { periapsis, apoapsis, inertial_crossing };
  Kind kind;
  double t;
  PolarState state;  // refined to |v| ~ 0 for apsides
};

struct IntegratorStats {
  double tol = 0.0;
  std::size_t steps = 0;
  std::size_t rejected = 0;
};

// dense-output segment of the embedded RK pair (quartic interpolant per
// component)
struct DenseSegment {
  double t0 = 0.0;
  double h = 0.0;
  std::vector<std::array<double, 5>> cont;  // per component
};

class DenseOutput {
 public:
  void push(DenseSegment seg) { segments_.push_back(std::move(seg)); }
  std::vector<double> at(double t) const;
  bool empty() const { return segments_.empty(); }
  double t_front() const;
  double t_back() const;

 private:
  const DenseSegment& segment_for(double t) const;
  std::vector<DenseSegment> segments_;
};

struct Trajectory {
  std::vector<PolarState> states;  // strictly increasing times
  std::vector<Event> events;
  IntegratorStats stats;
  DenseOutput dense;
  bool collision = false;
  std::string failure;  // nonempty on step-size underflow

  PolarState state_at(double t) const;
  double t_begin() const { return states.front().t; }
  double t_end() const { return states.back().t; }
};

// Integrates the polar equations of motion
//   r'' = omega^2 r - U'(r),  theta'' = -2 omega v / r
// with an adaptive Dormand-Prince 5(4) pair and dense output. Apsis events
// (sign changes of v) are bisected on the dense output to 1e-12 in time;
// watch_radii get inertial_crossing events when r crosses them.
Trajectory integrate_polar(const RadialPotential& p, const PolarState& s0,
                           double t_end, double tol,
                           const std::vector<double>& watch_radii = {});

struct NdimTrajectory {
  std::vector<CartesianState> states;
  std::vector<Event> events;  // event state reduced to polar in the motion plane
  IntegratorStats stats;
  DenseOutput dense;
  bool collision = false;
  std::string failure;

  CartesianState state_at(double t) const;
};

NdimTrajectory integrate_ndim(const RadialPotential& p, const CartesianState& s0,
                              double t_end, double tol,
                              const std::vector<double>& watch_radii = {});

// orthonormal basis of the plane of motion
struct PlaneFrame {
  std::vector<double> e1, e2;
  bool degenerate_completion = false;  // collinear r, v: plane was completed

  int dim() const { return int(e1.size()); }
};

// e1 = rhat, e2 from Gram-Schmidt on v (deterministic completion when
// collinear); the polar state has theta = 0 by convention and omega >= 0.
std::pair<PlaneFrame, PolarState> reduce_to_plane(const CartesianState& s);

CartesianState embed_to_ndim(const PlaneFrame& frame, const PolarState& s);

}  // namespace cfdyn
