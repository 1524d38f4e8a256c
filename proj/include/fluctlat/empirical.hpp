#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fluctlat/rates.hpp"
#include "fluctlat/simulator.hpp"

namespace fluctlat {

enum class SiteMeasure { density, creation };

/// <rho^N phi> = (1/N) sum_{x=-N}^{N-1} eta(x) phi(x/N), or the same pairing
/// of the bulk creation counters K(x) over x = -N..N.
///
/// The density sum stops at N-1; the missing edge term is O(1/N).
double pair_site_measure(const LatticeState& state, SiteMeasure kind, const Profile& phi);

/// <Q^N phi> = (1/N^2) sum_x Q(x) phi(x/N).
double pair_q_measure(const LatticeState& state, const Profile& phi);

/// <Q^N grad phi> = (1/N) sum_x Q(x) [phi((x+1)/N) - phi(x/N)].
double pair_q_gradient(const LatticeState& state, const Profile& phi);

/// Mean occupation over {y : |y - x| <= l} clipped to the lattice.
double local_average(const LatticeState& state, int x, int l);

/// Time-trapezoidal average of
///   (2(N-R))^{-1} sum_{x=-N+R}^{N-R} phi(s, x/N) [psi(tau_x eta_s) - nu_{eta-bar^{eps N}(x)}(psi)]
/// over equally spaced snapshots. Throws WindowError when eps N < R.
double local_equilibrium_statistic(std::span<const LatticeState> snapshots,
                                   const CylinderFunction& psi, const SpaceTimeFunction& phi,
                                   double eps);

/// Per-site residual eta_t - eta_0 - [Q(x-1) - Q(x)] - K(x), with the
/// reservoir counters at the end sites. Zero on every consistent state.
std::vector<std::int64_t> conservation_residual_micro(const LatticeState& state);

/// Throws BookkeepingError when the residual is not identically zero.
void require_conserved(const LatticeState& state);

}  // namespace fluctlat
