#pragma once

#include <cstdint>
#include <vector>

#include "fluctlat/grid.hpp"
#include "fluctlat/rates.hpp"

namespace fluctlat {

struct ContractionResult {
  FieldGrid h_opt;       ///< vanishes at x = +-1
  double f_rho = 0.0;    ///< dynamical cost, without the initial term
  TrajectoryGrid currents;  ///< rho with the optimal nodal Qdot, Kdot and their integrals
  Grid bond_qdot;        ///< optimal currents on the nx bonds
  std::vector<int> newton_iters;  ///< per time level
  double residual = 0.0;          ///< worst final residual over all levels
  int damping_events = 0;
};

struct ContractionOptions {
  double tol = 1e-10;
  int max_iters = 50;
};

/// Time derivative of the density: centered inside, one-sided second order at t = 0, T.
Grid density_time_derivative(const TrajectoryGrid& traj);

/// Solves d_t rho = 1/2 Lap rho - D(sigma D H) + C e^H - A e^-H for H with
/// H(t,+-1) = 0, one Newton solve per time level.
ContractionResult solve_optimal_drift(const TrajectoryGrid& rho, const CylinderRate& rate,
                                      const ContractionOptions& opts = {});

struct DensityRate {
  double f = 0.0;       ///< f_rho + initial cost
  double h_gamma = 0.0;
  ContractionResult result;
};

DensityRate density_rate(const TrajectoryGrid& rho, const Profile& gamma, const CylinderRate& rate,
                         const ContractionOptions& opts = {});

struct AuditReport {
  int samples = 0;
  int passed = 0;
  int excluded = 0;  ///< perturbations rejected for breaking the conservation law
  double min_gap = 0.0;  ///< min over samples of I(rho, Q', K') - F(rho)
  std::vector<double> gaps;
};

/// Perturbs the optimal currents by j = sigma grad h, h(+-1) = 0, with the
/// reaction current adjusted so the conservation law still holds, and checks
/// that the cost never drops below F(rho) - 1e-8.
AuditReport suboptimality_audit(const TrajectoryGrid& rho, const CylinderRate& rate,
                                const ContractionResult& result, int n_samples,
                                std::uint64_t seed = 0, double amplitude = 0.5);

}  // namespace fluctlat
