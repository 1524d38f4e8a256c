#include "fluctlat/hydro.hpp"

#include <cmath>
#include <sstream>

namespace fluctlat {

SpaceTimeGrid HydroSetup::grid() const {
  return {nx, nt > 0 ? nt : cfl_time_steps(nx, T), T};
}

int cfl_time_steps(int nx, double T) {
  const double dx = 2.0 / nx;
  return static_cast<int>(std::ceil(T / (dx * dx) * (1.0 - 1e-12)));
}

namespace {

void require_grid(const std::optional<FieldGrid>& f, const SpaceTimeGrid& g, const char* name) {
  if (f && !(f->grid == g)) throw GridMismatchError(std::string(name) + " grid does not match the solver grid");
  if (f && !f->values.allFinite()) throw DomainError(std::string(name) + " has non-finite values");
}

double field(const std::optional<FieldGrid>& f, int n, int j) { return f ? f->values(n, j) : 0.0; }

}  // namespace

TrajectoryGrid solve_hydro(const HydroSetup& s) {
  if (s.nx < 4) throw ConfigError("hydro grid needs nx >= 4");
  if (!(s.T > 0.0)) throw ConfigError("final time must be positive");
  const SpaceTimeGrid grid = s.grid();
  const double dx = grid.dx(), dt = grid.dt();
  if (dt > dx * dx * (1.0 + 1e-12))
    throw ConfigError("CFL violation: dt = " + std::to_string(dt) + " exceeds dx^2 = " +
                      std::to_string(dx * dx));
  require_grid(s.g, grid, "G");
  require_grid(s.h, grid, "H");
  for (double b : {s.rho_minus, s.rho_plus})
    if (!(b >= 0.0 && b <= 1.0)) throw DomainError("boundary densities must lie in [0,1]");
  if (std::abs(s.initial(-1.0) - s.rho_minus) > 1e-9 || std::abs(s.initial(1.0) - s.rho_plus) > 1e-9)
    throw ConfigError("initial profile must match the boundary densities");

  const MacroscopicCoefficients coeff(s.rate);
  const int nx = grid.nx;

  TrajectoryGrid traj;
  traj.grid = grid;
  traj.rho_minus = s.rho_minus;
  traj.rho_plus = s.rho_plus;
  traj.rho = Grid::Zero(grid.nt + 1, nx + 1);
  traj.qdot = Grid::Zero(grid.nt + 1, nx + 1);
  traj.kdot = Grid::Zero(grid.nt + 1, nx + 1);

  for (int j = 0; j <= nx; ++j) {
    const double v = s.initial(grid.x(j));
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("initial profile must take values in [0,1]");
    traj.rho(0, j) = v;
  }
  traj.rho(0, 0) = s.rho_minus;
  traj.rho(0, nx) = s.rho_plus;

  Vector sigma(nx + 1), reaction(nx + 1), hrow(nx + 1), flux(nx);
  for (int n = 0; n <= grid.nt; ++n) {
    const auto rho = traj.rho.row(n);
    for (int j = 0; j <= nx; ++j) {
      sigma(j) = rho(j) * (1.0 - rho(j));
      const double gj = field(s.g, n, j);
      reaction(j) = coeff.creation(rho(j)) * std::exp(gj) - coeff.annihilation(rho(j)) * std::exp(-gj);
      hrow(j) = field(s.h, n, j);
    }
    const Vector drho = centered_gradient(rho.transpose(), dx);
    const Vector dh = centered_gradient(hrow, dx);
    traj.qdot.row(n) = (-0.5 * drho + sigma.cwiseProduct(dh)).transpose();
    traj.kdot.row(n) = reaction.transpose();
    if (n == grid.nt) break;

    for (int b = 0; b < nx; ++b)
      flux(b) = -0.5 * (rho(b + 1) - rho(b)) / dx + 0.5 * (sigma(b) + sigma(b + 1)) * (hrow(b + 1) - hrow(b)) / dx;
    auto next = traj.rho.row(n + 1);
    next(0) = s.rho_minus;
    next(nx) = s.rho_plus;
    for (int j = 1; j < nx; ++j) {
      double v = rho(j) + dt * (-(flux(j) - flux(j - 1)) / dx + reaction(j));
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "hydro solver blew up at step " << n + 1 << ", node " << j;
        throw NumericalError(msg.str(), n + 1);
      }
      if (v < -1e-10 || v > 1.0 + 1e-10) {
        std::ostringstream msg;
        msg << "density " << v << " left [0,1] at step " << n + 1 << ", node " << j;
        throw NumericalError(msg.str(), n + 1);
      }
      next(j) = std::clamp(v, 0.0, 1.0);
    }
  }
  traj.integrate_currents();
  return traj;
}

double weak_residual(const TrajectoryGrid& traj, const CylinderRate& rate,
                     const std::optional<FieldGrid>& g, const std::optional<FieldGrid>& h,
                     const FieldGrid& phi, int level) {
  const SpaceTimeGrid& grid = traj.grid;
  require_grid(g, grid, "G");
  require_grid(h, grid, "H");
  if (!(phi.grid == grid)) throw GridMismatchError("test function grid does not match");
  if (level < 0 || level > grid.nt) throw DomainError("time level out of range");
  const MacroscopicCoefficients coeff(rate);
  const int nx = grid.nx;
  const double dx = grid.dx(), dt = grid.dt();

  // d_s phi by centered differences in time.
  auto dphi_dt = [&](int n, int j) {
    if (grid.nt == 0) return 0.0;
    if (n == 0) return (phi.values(1, j) - phi.values(0, j)) / dt;
    if (n == grid.nt) return (phi.values(n, j) - phi.values(n - 1, j)) / dt;
    return (phi.values(n + 1, j) - phi.values(n - 1, j)) / (2.0 * dt);
  };

  auto slice = [&](int n) {
    // int rho d_s phi  and the right-hand-side integrand at level n
    double lhs = 0.0, rhs = 0.0;
    for (int j = 0; j <= nx; ++j) {
      const double r = traj.rho(n, j);
      lhs += grid.wx(j) * r * dphi_dt(n, j);
      const double gj = field(g, n, j);
      rhs += grid.wx(j) * (coeff.creation(r) * std::exp(gj) - coeff.annihilation(r) * std::exp(-gj)) *
             phi.values(n, j);
    }
    for (int b = 0; b < nx; ++b) {
      const double r0 = traj.rho(n, b), r1 = traj.rho(n, b + 1);
      const double sig = 0.5 * (r0 * (1.0 - r0) + r1 * (1.0 - r1));
      const double grad_phi = (phi.values(n, b + 1) - phi.values(n, b)) / dx;
      const double grad_h = (field(h, n, b + 1) - field(h, n, b)) / dx;
      rhs += dx * (-0.5 * (r1 - r0) / dx + sig * grad_h) * grad_phi;
    }
    return std::pair{lhs, rhs};
  };

  double lhs = 0.0, rhs = 0.0;
  for (int j = 0; j <= nx; ++j)
    lhs += grid.wx(j) * (traj.rho(level, j) * phi.values(level, j) - traj.rho(0, j) * phi.values(0, j));
  for (int n = 0; n < level; ++n) {
    const auto [a0, b0] = slice(n);
    const auto [a1, b1] = slice(n + 1);
    lhs -= 0.5 * dt * (a0 + a1);
    rhs += 0.5 * dt * (b0 + b1);
  }
  return lhs - rhs;
}

L1ContractionReport l1_contraction_check(const TrajectoryGrid& a, const TrajectoryGrid& b,
                                         const CylinderRate& rate, double slack) {
  if (!(a.grid == b.grid)) throw GridMismatchError("trajectories live on different grids");
  if (a.rho_minus != b.rho_minus || a.rho_plus != b.rho_plus)
    throw GridMismatchError("trajectories have different boundary densities");
  L1ContractionReport report;
  report.l2_ok = check_assumptions(rate).l2_ok;
  const SpaceTimeGrid& g = a.grid;
  report.distances.resize(g.nt + 1);
  for (int n = 0; n <= g.nt; ++n) {
    double d = 0.0;
    for (int j = 0; j <= g.nx; ++j) d += g.wx(j) * std::abs(a.rho(n, j) - b.rho(n, j));
    report.distances[n] = d;
    if (n > 0) {
      const double inc = d - report.distances[n - 1];
      report.worst_increase = std::max(report.worst_increase, inc);
      if (inc > slack) report.nonincreasing = false;
    }
  }
  return report;
}

double energy(const TrajectoryGrid& traj) {
  const SpaceTimeGrid& g = traj.grid;
  const double dx = g.dx();
  double total = 0.0;
  for (int n = 0; n <= g.nt; ++n) {
    double row = 0.0;
    for (int b = 0; b < g.nx; ++b) {
      const double d = (traj.rho(n, b + 1) - traj.rho(n, b)) / dx;
      row += dx * d * d;
    }
    total += g.wt(n) * row;
  }
  return 0.5 * total;
}

double energy_lower_bound(const TrajectoryGrid& traj, int basis_size) {
  if (basis_size < 1) throw DomainError("basis_size must be positive");
  const SpaceTimeGrid& g = traj.grid;
  const int nx = g.nx;
  const int k = basis_size;
  const double dx = g.dx();

  // Legendre polynomials sampled at the bond midpoints. The phi-form
  //   rho_+ phi(1) - rho_- phi(-1) - int rho d_x phi
  // is taken in summation-by-parts form, which makes the bound a projection
  // of the bond gradients and hence never above energy().
  Eigen::MatrixXd values(nx, k);
  for (int b = 0; b < nx; ++b) {
    const double x = g.x(b) + 0.5 * dx;
    values(b, 0) = 1.0;
    if (k > 1) values(b, 1) = x;
    for (int m = 1; m + 1 < k; ++m)
      values(b, m + 1) = ((2 * m + 1) * x * values(b, m) - m * values(b, m - 1)) / (m + 1);
  }
  const Eigen::MatrixXd gram = dx * values.transpose() * values;
  const Eigen::LDLT<Eigen::MatrixXd> solver(gram);

  double total = 0.0;
  for (int n = 0; n <= g.nt; ++n) {
    Vector b = traj.rho_plus * values.row(nx - 1).transpose() - traj.rho_minus * values.row(0).transpose();
    for (int j = 1; j < nx; ++j) b -= traj.rho(n, j) * (values.row(j) - values.row(j - 1)).transpose();
    total += g.wt(n) * 0.5 * b.dot(solver.solve(b));
  }
  return total;
}

}  // namespace fluctlat
