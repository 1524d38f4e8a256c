#pragma once

#include <optional>
#include <vector>

#include "fluctlat/grid.hpp"
#include "fluctlat/rates.hpp"

namespace fluctlat {

/// Reaction-diffusion problem with Dirichlet reservoir data and optional drifts.
struct HydroSetup {
  Profile initial;
  double rho_minus = 0.5;
  double rho_plus = 0.5;
  CylinderRate rate = build_cylinder_rate("constant");
  std::optional<FieldGrid> g;  ///< reaction bias; zero when absent
  std::optional<FieldGrid> h;  ///< bond drift; zero when absent
  int nx = 64;
  int nt = 0;  ///< 0 selects the smallest CFL-admissible count
  double T = 1.0;

  SpaceTimeGrid grid() const;
};

/// Smallest nt with T/nt <= dx^2.
int cfl_time_steps(int nx, double T);

/// Explicit Euler for
///   d_t rho = 1/2 Lap_h rho - D_h(sigma(rho) D_h H) + C(rho) e^G - A(rho) e^-G
/// with bond fluxes built from arithmetic-mean conductivities. Stores the
/// nodal currents Qdot = -1/2 D_h rho + sigma D_h H, Kdot = C e^G - A e^-G.
TrajectoryGrid solve_hydro(const HydroSetup& setup);

/// Difference of the two sides of the weak formulation at time level `level`,
/// for a test function vanishing at x = +-1.
double weak_residual(const TrajectoryGrid& traj, const CylinderRate& rate,
                     const std::optional<FieldGrid>& g, const std::optional<FieldGrid>& h,
                     const FieldGrid& phi, int level);

struct L1ContractionReport {
  std::vector<double> distances;  ///< ||rho1_t - rho2_t||_1 per time level
  bool nonincreasing = true;
  double worst_increase = 0.0;
  bool l2_ok = false;
};

L1ContractionReport l1_contraction_check(const TrajectoryGrid& a, const TrajectoryGrid& b,
                                         const CylinderRate& rate, double slack = 1e-8);

/// 1/2 int int (D_h rho)^2 dx dt with bond differences.
double energy(const TrajectoryGrid& traj);

/// Supremum of the test-function form of the energy over Legendre polynomials
/// of degree < basis_size, taken independently on every time level.
double energy_lower_bound(const TrajectoryGrid& traj, int basis_size = 8);

}  // namespace fluctlat
