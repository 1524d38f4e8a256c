#pragma once

#include <Eigen/Dense>
#include <functional>

namespace fluctlat {

using Real = double;
using Vector = Eigen::VectorXd;
/// Space-time array: row n is time level t_n, column j is the node x_j.
using Grid = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Function of x in [-1,1].
using Profile = std::function<double(double)>;
/// Function of (t, x) on [0,T] x [-1,1].
using SpaceTimeFunction = std::function<double(double, double)>;

/// Uniform tensor grid on [0,T] x [-1,1] with nt+1 time levels and nx+1 nodes.
struct SpaceTimeGrid {
  int nx = 0;
  int nt = 0;
  double T = 0.0;

  double dx() const { return 2.0 / nx; }
  double dt() const { return T / nt; }
  double x(int j) const { return -1.0 + j * dx(); }
  double t(int n) const { return nt == 0 ? 0.0 : n * dt(); }
  /// Trapezoidal weight of node j.
  double wx(int j) const { return (j == 0 || j == nx) ? 0.5 * dx() : dx(); }
  /// Trapezoidal weight of time level n.
  double wt(int n) const { return (n == 0 || n == nt) ? 0.5 * dt() : dt(); }
  Vector nodes() const { return Vector::LinSpaced(nx + 1, -1.0, 1.0); }

  bool operator==(const SpaceTimeGrid& o) const {
    return nx == o.nx && nt == o.nt && T == o.T;
  }
};

/// Scalar space-time field: drifts G, H, test functions, perturbations.
struct FieldGrid {
  SpaceTimeGrid grid;
  Grid values;

  static FieldGrid zeros(const SpaceTimeGrid& g) {
    return {g, Grid::Zero(g.nt + 1, g.nx + 1)};
  }
  static FieldGrid sample(const SpaceTimeGrid& g, const SpaceTimeFunction& f) {
    FieldGrid out = zeros(g);
    for (int n = 0; n <= g.nt; ++n)
      for (int j = 0; j <= g.nx; ++j) out.values(n, j) = f(g.t(n), g.x(j));
    return out;
  }

  /// Bilinear interpolation; arguments are clamped to the grid.
  double at(double t, double x) const;
};

/// Density trajectory with its instantaneous and time-integrated currents.
struct TrajectoryGrid {
  SpaceTimeGrid grid;
  Grid rho;
  Grid qdot;
  Grid kdot;
  Grid q;
  Grid k;
  double rho_minus = 0.0;
  double rho_plus = 0.0;

  /// Recomputes q and k from qdot and kdot by cumulative trapezoidal sums.
  void integrate_currents();
};

/// Trapezoidal integral of a nodal profile.
inline double integrate_x(const SpaceTimeGrid& g, const Eigen::Ref<const Vector>& f) {
  double s = 0.0;
  for (int j = 0; j <= g.nx; ++j) s += g.wx(j) * f(j);
  return s;
}

/// Trapezoidal space-time integral of a grid.
inline double integrate_xt(const SpaceTimeGrid& g, const Grid& f) {
  double s = 0.0;
  for (int n = 0; n <= g.nt; ++n) {
    double row = 0.0;
    for (int j = 0; j <= g.nx; ++j) row += g.wx(j) * f(n, j);
    s += g.wt(n) * row;
  }
  return s;
}

/// Centered first derivative at the nodes, second-order one-sided at the ends.
template <typename Derived>
Vector centered_gradient(const Eigen::MatrixBase<Derived>& f, double dx) {
  const Eigen::Index m = f.size();
  Vector d(m);
  for (Eigen::Index j = 1; j + 1 < m; ++j) d(j) = (f(j + 1) - f(j - 1)) / (2.0 * dx);
  d(0) = (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * dx);
  d(m - 1) = (3.0 * f(m - 1) - 4.0 * f(m - 2) + f(m - 3)) / (2.0 * dx);
  return d;
}

}  // namespace fluctlat
