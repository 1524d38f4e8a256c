#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "fluctlat/grid.hpp"
#include "fluctlat/rates.hpp"

namespace fluctlat {

/// Poisson cost Phi(C, A, kappa) = sup_l { kappa l - C(e^l - 1) - A(e^-l - 1) }.
/// Returns +inf on the infeasible branches of the degenerate cases.
template <typename Scalar>
Scalar phi(Scalar c, Scalar a, Scalar kappa) {
  using std::log;
  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  if (!(c >= Scalar(0)) || !(a >= Scalar(0))) throw DomainError("phi: negative rate");
  if (c == Scalar(0) && a == Scalar(0)) return kappa == Scalar(0) ? Scalar(0) : inf;
  if (c == Scalar(0)) {
    if (kappa > Scalar(0)) return inf;
    if (kappa == Scalar(0)) return a;
    return std::max(Scalar(0), a + kappa - kappa * log(-kappa / a));
  }
  if (a == Scalar(0)) {
    if (kappa < Scalar(0)) return inf;
    if (kappa == Scalar(0)) return c;
    return std::max(Scalar(0), c - kappa + kappa * log(kappa / c));
  }
  const Scalar s = std::hypot(kappa, Scalar(2) * std::sqrt(a * c));
  // For kappa < 0, (s + kappa) / (2C) cancels; use the conjugate 2A / (s - kappa).
  const Scalar ratio = kappa >= Scalar(0) ? (s + kappa) / (Scalar(2) * c) : Scalar(2) * a / (s - kappa);
  return std::max(Scalar(0), c + a - s + kappa * log(ratio));
}

/// Golden-section evaluation of the Legendre supremum defining phi, for C, A > 0.
double phi_legendre_oracle(double c, double a, double kappa, double tol = 1e-14);

/// Pointwise maximizer of the Legendre problem: log((kappa + s) / (2C)).
double reaction_drift(double c, double a, double kappa);

struct Drifts {
  FieldGrid g;
  FieldGrid h;
};

/// Drifts that realise a trajectory: G from the reaction current, H from the
/// bond currents with H(t,-1) = 0.
Drifts recover_drifts(const TrajectoryGrid& traj, const CylinderRate& rate);

struct RateBreakdown {
  double i0 = 0.0;
  double i1 = 0.0;
  double i2 = 0.0;
  double h_gamma = 0.0;
  double total = 0.0;
  double energy = 0.0;
  double conservation_residual = 0.0;
  bool feasible = true;
};

/// Default residual threshold 10 (dx^2 + dt).
double feasibility_threshold(const SpaceTimeGrid& g);

/// I1 + I2 for bond currents (nt+1 x nx) and nodal reaction currents.
struct CurrentCost {
  double i1 = 0.0;
  double i2 = 0.0;
};
CurrentCost current_cost(const SpaceTimeGrid& g, const Grid& rho, const Grid& bond_qdot,
                         const Grid& kdot, const MacroscopicCoefficients& coeff);

/// Averages of nodal currents onto the nx bonds.
Grid bond_average(const Grid& nodal);

RateBreakdown evaluate_I0_explicit(const TrajectoryGrid& traj, const CylinderRate& rate,
                                   const Profile& gamma = {});

/// Conservative part J^1_H(rho, Q).
double evaluate_J1(const TrajectoryGrid& traj, const FieldGrid& h);
/// Reaction part J^2_G(rho, K).
double evaluate_J2(const TrajectoryGrid& traj, const FieldGrid& g, const CylinderRate& rate);
double evaluate_J_GH(const TrajectoryGrid& traj, const FieldGrid& g, const FieldGrid& h,
                     const CylinderRate& rate);

/// 1/2 int int sigma(rho) |grad F|^2 with the bond discretization used by J.
double drift_quadratic_form(const TrajectoryGrid& traj, const FieldGrid& f);

/// Relative entropy int m log(m/gamma) + (1-m) log((1-m)/(1-gamma)) dx.
double initial_cost(const Profile& m, const Profile& gamma, int nx = 1024);
/// Same on the nodes of a grid row.
double initial_cost(const SpaceTimeGrid& g, const Eigen::Ref<const Vector>& m, const Profile& gamma);

/// Default test functions sin(k pi (x+1)/2), k = 1..4.
std::vector<Profile> sine_basis(int count = 4);

/// max_{phi, n} |<rho_n phi> - <rho_0 phi> - <Q_n grad phi> - <K_n phi>|.
double conservation_residual(const TrajectoryGrid& traj, const std::vector<Profile>& basis);

struct ConvexityReport {
  double value_a = 0.0;
  double value_b = 0.0;
  double value_mid = 0.0;
  /// (value_a + value_b)/2 - value_mid; nonnegative when convexity holds.
  double gap = 0.0;
  bool holds = false;
  bool l1_ok = false;
};

/// I0 minus int int (C(rho) + A(rho)).
double reduced_rate(const TrajectoryGrid& traj, const CylinderRate& rate);

ConvexityReport convex_decomposition_check(const TrajectoryGrid& a, const TrajectoryGrid& b,
                                           const CylinderRate& rate, double slack = 1e-8);

}  // namespace fluctlat
