#include "fluctlat/rate_functional.hpp"

#include <algorithm>
#include <sstream>

#include "fluctlat/hydro.hpp"

namespace fluctlat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_interior(const TrajectoryGrid& traj) {
  const Grid& rho = traj.rho;
  for (Eigen::Index n = 0; n < rho.rows(); ++n)
    for (Eigen::Index j = 1; j + 1 < rho.cols(); ++j)
      if (!(rho(n, j) > 0.0 && rho(n, j) < 1.0)) {
        std::ostringstream msg;
        msg << "density " << rho(n, j) << " touches {0,1} at time level " << n << ", node " << j;
        throw SingularityError(msg.str(), static_cast<long>(n));
      }
}

void require_same_grid(const SpaceTimeGrid& a, const SpaceTimeGrid& b, const char* what) {
  if (!(a == b)) throw GridMismatchError(std::string(what) + " grid does not match the trajectory");
}

double bond_sigma(const Grid& rho, Eigen::Index n, Eigen::Index b) {
  const double r0 = rho(n, b), r1 = rho(n, b + 1);
  return 0.5 * (r0 * (1.0 - r0) + r1 * (1.0 - r1));
}

/// Bond gradients of a nodal field, one row per time level.
Grid bond_gradient(const Grid& f, double dx) {
  return (f.rightCols(f.cols() - 1) - f.leftCols(f.cols() - 1)) / dx;
}

}  // namespace

double phi_legendre_oracle(double c, double a, double kappa, double tol) {
  if (!(c > 0.0 && a > 0.0)) throw DomainError("phi_legendre_oracle needs C, A > 0");
  auto f = [&](double l) { return kappa * l - c * std::expm1(l) - a * std::expm1(-l); };
  auto df = [&](double l) { return kappa - c * std::exp(l) + a * std::exp(-l); };

  double lo = -1.0, hi = 1.0;
  for (int i = 0; df(hi) > 0.0; ++i) {
    if (i == 200) throw IterationError("phi_legendre_oracle: bracket expansion failed");
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; df(lo) < 0.0; ++i) {
    if (i == 200) throw IterationError("phi_legendre_oracle: bracket expansion failed");
    hi = lo;
    lo *= 2.0;
  }

  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - ratio * (hi - lo), x2 = lo + ratio * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  int iter = 0;
  while (hi - lo > tol * (1.0 + std::abs(lo) + std::abs(hi))) {
    if (++iter > 500) throw IterationError("phi_legendre_oracle: golden section did not converge");
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = f(x1);
    }
  }
  return std::max(0.0, std::max(f1, f2));
}

double reaction_drift(double c, double a, double kappa) {
  if (c < 0.0 || a < 0.0) throw DomainError("reaction_drift: negative rate");
  if (c == 0.0 && a == 0.0) {
    if (kappa != 0.0) throw InfeasibilityError("reaction current without creation or annihilation");
    return 0.0;
  }
  if (c == 0.0) {
    if (!(kappa < 0.0)) throw InfeasibilityError("nonnegative reaction current with zero creation rate");
    return std::log(a / -kappa);
  }
  if (a == 0.0) {
    if (!(kappa > 0.0)) throw InfeasibilityError("nonpositive reaction current with zero annihilation rate");
    return std::log(kappa / c);
  }
  const double s = std::hypot(kappa, 2.0 * std::sqrt(a * c));
  return kappa >= 0.0 ? std::log((s + kappa) / (2.0 * c)) : std::log(2.0 * a / (s - kappa));
}

Grid bond_average(const Grid& nodal) {
  return 0.5 * (nodal.leftCols(nodal.cols() - 1) + nodal.rightCols(nodal.cols() - 1));
}

Drifts recover_drifts(const TrajectoryGrid& traj, const CylinderRate& rate) {
  require_interior(traj);
  const SpaceTimeGrid& g = traj.grid;
  const MacroscopicCoefficients coeff(rate);
  const double dx = g.dx();
  Drifts out{FieldGrid::zeros(g), FieldGrid::zeros(g)};
  const Grid bond_q = bond_average(traj.qdot);
  const Grid drho = bond_gradient(traj.rho, dx);
  for (int n = 0; n <= g.nt; ++n) {
    for (int j = 0; j <= g.nx; ++j) {
      const double r = traj.rho(n, j);
      try {
        out.g.values(n, j) = reaction_drift(coeff.creation(r), coeff.annihilation(r), traj.kdot(n, j));
      } catch (const InfeasibilityError& e) {
        std::ostringstream msg;
        msg << e.what() << " at time level " << n << ", node " << j;
        throw InfeasibilityError(msg.str(), n);
      }
    }
    double h = 0.0;
    for (int b = 0; b < g.nx; ++b) {
      h += dx * (bond_q(n, b) + 0.5 * drho(n, b)) / bond_sigma(traj.rho, n, b);
      out.h.values(n, b + 1) = h;
    }
  }
  return out;
}

double feasibility_threshold(const SpaceTimeGrid& g) {
  return 10.0 * (g.dx() * g.dx() + g.dt());
}

CurrentCost current_cost(const SpaceTimeGrid& g, const Grid& rho, const Grid& bond_qdot,
                         const Grid& kdot, const MacroscopicCoefficients& coeff) {
  const double dx = g.dx();
  CurrentCost cost;
  for (int n = 0; n <= g.nt; ++n) {
    double i1 = 0.0, i2 = 0.0;
    for (int b = 0; b < g.nx; ++b) {
      const double num = bond_qdot(n, b) + 0.5 * (rho(n, b + 1) - rho(n, b)) / dx;
      const double sig = bond_sigma(rho, n, b);
      if (sig > 0.0)
        i1 += dx * num * num / (2.0 * sig);
      else if (num != 0.0)
        i1 = kInf;
    }
    for (int j = 0; j <= g.nx; ++j) {
      const double r = rho(n, j);
      i2 += g.wx(j) * phi(coeff.creation(r), coeff.annihilation(r), kdot(n, j));
    }
    cost.i1 += g.wt(n) * i1;
    cost.i2 += g.wt(n) * i2;
  }
  return cost;
}

RateBreakdown evaluate_I0_explicit(const TrajectoryGrid& traj, const CylinderRate& rate,
                                   const Profile& gamma) {
  require_interior(traj);
  const SpaceTimeGrid& g = traj.grid;
  RateBreakdown out;
  out.conservation_residual = conservation_residual(traj, sine_basis());
  out.feasible = out.conservation_residual <= feasibility_threshold(g);
  const CurrentCost cost =
      current_cost(g, traj.rho, bond_average(traj.qdot), traj.kdot, MacroscopicCoefficients(rate));
  out.i1 = cost.i1;
  out.i2 = cost.i2;
  out.i0 = out.feasible ? cost.i1 + cost.i2 : kInf;
  if (gamma) out.h_gamma = initial_cost(g, traj.rho.row(0).transpose(), gamma);
  out.total = out.i0 + out.h_gamma;
  out.energy = energy(traj);
  return out;
}

double evaluate_J1(const TrajectoryGrid& traj, const FieldGrid& h) {
  const SpaceTimeGrid& g = traj.grid;
  require_same_grid(h.grid, g, "H");
  const double dx = g.dx(), dt = g.dt();
  const int nx = g.nx, nt = g.nt;
  const Grid a = bond_gradient(h.values, dx);
  const Grid qb = bond_average(traj.q);
  const Grid qdb = bond_average(traj.qdot);

  // <Q_T grad H_T> - sum_n <Q_n + dt/2 Qdot_n, grad H_{n+1} - grad H_n>
  double transport = dx * qb.row(nt).dot(a.row(nt));
  for (int n = 0; n < nt; ++n)
    transport -= dx * (qb.row(n) + 0.5 * dt * qdb.row(n)).dot(a.row(n + 1) - a.row(n));

  double rest = 0.0;
  for (int n = 0; n <= nt; ++n) {
    double row = 0.0;
    for (int j = 1; j < nx; ++j) row -= 0.5 * traj.rho(n, j) * (a(n, j) - a(n, j - 1));
    for (int b = 0; b < nx; ++b) row -= 0.5 * dx * bond_sigma(traj.rho, n, b) * a(n, b) * a(n, b);
    row += 0.5 * traj.rho_plus * a(n, nx - 1) - 0.5 * traj.rho_minus * a(n, 0);
    rest += g.wt(n) * row;
  }
  return transport + rest;
}

double evaluate_J2(const TrajectoryGrid& traj, const FieldGrid& gfield, const CylinderRate& rate) {
  const SpaceTimeGrid& g = traj.grid;
  require_same_grid(gfield.grid, g, "G");
  const MacroscopicCoefficients coeff(rate);
  const double dt = g.dt();
  const int nx = g.nx, nt = g.nt;
  const Grid& G = gfield.values;

  double total = 0.0;
  for (int j = 0; j <= nx; ++j) {
    double s = traj.k(nt, j) * G(nt, j);
    for (int n = 0; n < nt; ++n) s -= (traj.k(n, j) + 0.5 * dt * traj.kdot(n, j)) * (G(n + 1, j) - G(n, j));
    total += g.wx(j) * s;
  }
  for (int n = 0; n <= nt; ++n) {
    double row = 0.0;
    for (int j = 0; j <= nx; ++j) {
      const double r = traj.rho(n, j);
      row += g.wx(j) * (coeff.creation(r) * std::expm1(G(n, j)) + coeff.annihilation(r) * std::expm1(-G(n, j)));
    }
    total -= g.wt(n) * row;
  }
  return total;
}

double evaluate_J_GH(const TrajectoryGrid& traj, const FieldGrid& g, const FieldGrid& h,
                     const CylinderRate& rate) {
  return evaluate_J1(traj, h) + evaluate_J2(traj, g, rate);
}

double drift_quadratic_form(const TrajectoryGrid& traj, const FieldGrid& f) {
  const SpaceTimeGrid& g = traj.grid;
  require_same_grid(f.grid, g, "F");
  const Grid a = bond_gradient(f.values, g.dx());
  double total = 0.0;
  for (int n = 0; n <= g.nt; ++n) {
    double row = 0.0;
    for (int b = 0; b < g.nx; ++b) row += g.dx() * bond_sigma(traj.rho, n, b) * a(n, b) * a(n, b);
    total += g.wt(n) * row;
  }
  return 0.5 * total;
}

namespace {

double entropy_density(double m, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("initial_cost: reference profile must lie in (0,1)");
  if (!(m >= 0.0 && m <= 1.0)) throw DomainError("initial_cost: profile must lie in [0,1]");
  double v = 0.0;
  if (m > 0.0) v += m * std::log(m / gamma);
  if (m < 1.0) v += (1.0 - m) * std::log((1.0 - m) / (1.0 - gamma));
  return v;
}

}  // namespace

double initial_cost(const Profile& m, const Profile& gamma, int nx) {
  const SpaceTimeGrid g{nx, 1, 1.0};
  Vector values(nx + 1);
  for (int j = 0; j <= nx; ++j) values(j) = m(g.x(j));
  return initial_cost(g, values, gamma);
}

double initial_cost(const SpaceTimeGrid& g, const Eigen::Ref<const Vector>& m, const Profile& gamma) {
  double total = 0.0;
  for (int j = 0; j <= g.nx; ++j) total += g.wx(j) * entropy_density(m(j), gamma(g.x(j)));
  return total;
}

std::vector<Profile> sine_basis(int count) {
  std::vector<Profile> basis;
  for (int k = 1; k <= count; ++k)
    basis.emplace_back([k](double x) { return std::sin(k * M_PI * (x + 1.0) / 2.0); });
  return basis;
}

double conservation_residual(const TrajectoryGrid& traj, const std::vector<Profile>& basis) {
  const SpaceTimeGrid& g = traj.grid;
  const double dx = g.dx();
  const Grid qb = bond_average(traj.q);
  Vector w(g.nx + 1);
  for (int j = 0; j <= g.nx; ++j) w(j) = g.wx(j);
  double worst = 0.0;
  for (const Profile& phi_fn : basis) {
    Vector p(g.nx + 1);
    for (int j = 0; j <= g.nx; ++j) p(j) = phi_fn(g.x(j));
    const Vector wp = w.cwiseProduct(p);
    const Vector dp = (p.tail(g.nx) - p.head(g.nx)) / dx;
    const double mass0 = traj.rho.row(0).dot(wp);
    for (int n = 0; n <= g.nt; ++n) {
      const double r = traj.rho.row(n).dot(wp) - mass0 - dx * qb.row(n).dot(dp) - traj.k.row(n).dot(wp);
      worst = std::max(worst, std::abs(r));
    }
  }
  return worst;
}

double reduced_rate(const TrajectoryGrid& traj, const CylinderRate& rate) {
  const RateBreakdown b = evaluate_I0_explicit(traj, rate);
  if (!b.feasible) throw InfeasibilityError("trajectory violates the conservation law");
  const MacroscopicCoefficients coeff(rate);
  Grid sum(traj.rho.rows(), traj.rho.cols());
  for (Eigen::Index n = 0; n < sum.rows(); ++n)
    for (Eigen::Index j = 0; j < sum.cols(); ++j)
      sum(n, j) = coeff.creation(traj.rho(n, j)) + coeff.annihilation(traj.rho(n, j));
  return b.i0 - integrate_xt(traj.grid, sum);
}

ConvexityReport convex_decomposition_check(const TrajectoryGrid& a, const TrajectoryGrid& b,
                                           const CylinderRate& rate, double slack) {
  if (!(a.grid == b.grid)) throw GridMismatchError("trajectories live on different grids");
  if (a.rho_minus != b.rho_minus || a.rho_plus != b.rho_plus)
    throw GridMismatchError("trajectories have different boundary densities");
  TrajectoryGrid mid = a;
  mid.rho = 0.5 * (a.rho + b.rho);
  mid.qdot = 0.5 * (a.qdot + b.qdot);
  mid.kdot = 0.5 * (a.kdot + b.kdot);
  mid.q = 0.5 * (a.q + b.q);
  mid.k = 0.5 * (a.k + b.k);

  ConvexityReport r;
  r.l1_ok = check_assumptions(rate).l1_ok;
  r.value_a = reduced_rate(a, rate);
  r.value_b = reduced_rate(b, rate);
  r.value_mid = reduced_rate(mid, rate);
  r.gap = 0.5 * (r.value_a + r.value_b) - r.value_mid;
  r.holds = r.gap >= -slack;
  return r;
}

}  // namespace fluctlat
