#include "fluctlat/grid.hpp"

#include <algorithm>
#include <cmath>

namespace fluctlat {

double FieldGrid::at(double t, double x) const {
  const int nx = grid.nx;
  const int nt = grid.nt;
  const double fx = std::clamp((x + 1.0) / grid.dx(), 0.0, static_cast<double>(nx));
  const int j = std::min(static_cast<int>(fx), nx - 1);
  const double ax = fx - j;
  auto row = [&](int n) { return (1.0 - ax) * values(n, j) + ax * values(n, j + 1); };
  if (nt == 0) return row(0);
  const double ft = std::clamp(t / grid.dt(), 0.0, static_cast<double>(nt));
  const int n = std::min(static_cast<int>(ft), nt - 1);
  const double at = ft - n;
  return (1.0 - at) * row(n) + at * row(n + 1);
}

void TrajectoryGrid::integrate_currents() {
  const double dt = grid.dt();
  q = Grid::Zero(grid.nt + 1, grid.nx + 1);
  k = Grid::Zero(grid.nt + 1, grid.nx + 1);
  for (int n = 0; n < grid.nt; ++n) {
    q.row(n + 1) = q.row(n) + 0.5 * dt * (qdot.row(n) + qdot.row(n + 1));
    k.row(n + 1) = k.row(n) + 0.5 * dt * (kdot.row(n) + kdot.row(n + 1));
  }
}

}  // namespace fluctlat
