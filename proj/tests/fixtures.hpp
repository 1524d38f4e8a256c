#pragma once

#include <cmath>

#include "fluctlat/hydro.hpp"

namespace fixtures {

inline double bump(double x) { return 0.5 + 0.25 * (1.0 - x * x); }

/// Untilted "constant"-rate relaxation from the bump profile.
inline fluctlat::TrajectoryGrid relaxation(int nx, double T = 0.5) {
  fluctlat::HydroSetup s;
  s.initial = bump;
  s.nx = nx;
  s.T = T;
  return fluctlat::solve_hydro(s);
}

/// Smooth drift vanishing at x = -1 (and at x = 1 when `pinned`).
inline fluctlat::FieldGrid drift(const fluctlat::SpaceTimeGrid& g, double amp, bool pinned) {
  return fluctlat::FieldGrid::sample(g, [=](double t, double x) {
    const double base = pinned ? std::sin(M_PI * (x + 1.0) / 2.0) : 0.5 * (x + 1.0);
    return amp * (1.0 + 0.5 * t) * base;
  });
}

struct Tilted {
  fluctlat::TrajectoryGrid traj;
  fluctlat::FieldGrid g;
  fluctlat::FieldGrid h;
};

/// Relaxation under drifts (G0, H0); with `equal` G0 = H0 and H0(t,+-1) = 0.
inline Tilted tilted(int nx, bool equal, double T = 0.5) {
  fluctlat::HydroSetup s;
  s.initial = bump;
  s.nx = nx;
  s.T = T;
  const auto grid = s.grid();
  s.h = drift(grid, 0.4, equal);
  s.g = equal ? *s.h : fluctlat::FieldGrid::sample(grid, [](double t, double x) {
    return 0.3 * std::cos(M_PI * x / 2.0) * (1.0 - t);
  });
  return {fluctlat::solve_hydro(s), *s.g, *s.h};
}

}  // namespace fixtures
