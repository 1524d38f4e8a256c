#include "fluctlat/empirical.hpp"

#include <algorithm>
#include <cmath>

namespace fluctlat {

double pair_site_measure(const LatticeState& state, SiteMeasure kind, const Profile& phi) {
  const int n = state.n;
  double s = 0.0;
  if (kind == SiteMeasure::density) {
    for (int x = -n; x <= n - 1; ++x)
      if (state.occupancy(x)) s += phi(static_cast<double>(x) / n);
  } else {
    for (int x = -n; x <= n; ++x)
      if (state.creation(x) != 0) s += static_cast<double>(state.creation(x)) * phi(static_cast<double>(x) / n);
  }
  return s / n;
}

double pair_q_measure(const LatticeState& state, const Profile& phi) {
  const int n = state.n;
  double s = 0.0;
  for (int x = -n; x <= n - 1; ++x)
    s += static_cast<double>(state.bond_current(x)) * phi(static_cast<double>(x) / n);
  return s / (static_cast<double>(n) * n);
}

double pair_q_gradient(const LatticeState& state, const Profile& phi) {
  const int n = state.n;
  double s = 0.0;
  for (int x = -n; x <= n - 1; ++x) {
    const auto qx = state.bond_current(x);
    if (qx != 0)
      s += static_cast<double>(qx) * (phi(static_cast<double>(x + 1) / n) - phi(static_cast<double>(x) / n));
  }
  return s / n;
}

double local_average(const LatticeState& state, int x, int l) {
  const int lo = std::max(-state.n, x - l);
  const int hi = std::min(state.n, x + l);
  if (lo > hi) throw DomainError("local_average: window does not meet the lattice");
  int count = 0;
  for (int y = lo; y <= hi; ++y) count += state.occupancy(y);
  return static_cast<double>(count) / (hi - lo + 1);
}

double local_equilibrium_statistic(std::span<const LatticeState> snapshots,
                                   const CylinderFunction& psi, const SpaceTimeFunction& phi,
                                   double eps) {
  if (snapshots.empty()) throw DomainError("local_equilibrium_statistic: no snapshots");
  const int n = snapshots.front().n;
  const int r = psi.range();
  const int l = static_cast<int>(std::floor(eps * n));
  if (l < r) throw WindowError("local window eps*N is smaller than the observable range");
  if (n <= r) throw WindowError("lattice too small for the observable");

  auto slice = [&](const LatticeState& s) {
    // Running sums give every local average in O(N).
    std::vector<int> prefix(s.sites() + 1, 0);
    for (int i = 0; i < s.sites(); ++i) prefix[i + 1] = prefix[i] + s.eta[i];
    double acc = 0.0;
    for (int x = -n + r; x <= n - r; ++x) {
      const int i = x + n;
      std::uint32_t w = 0;
      for (int y = -r; y <= r; ++y) w = (w << 1) | s.eta[i + y];
      const int lo = std::max(0, i - l), hi = std::min(s.sites() - 1, i + l);
      const double bar = static_cast<double>(prefix[hi + 1] - prefix[lo]) / (hi - lo + 1);
      acc += phi(s.t, static_cast<double>(x) / n) * (psi(w) - psi.bernoulli_mean(bar));
    }
    return acc / (2.0 * (n - r));
  };

  if (snapshots.size() == 1) return slice(snapshots.front());
  double integral = 0.0;
  for (std::size_t m = 0; m < snapshots.size(); ++m) {
    const double w = (m == 0 || m + 1 == snapshots.size()) ? 0.5 : 1.0;
    integral += w * slice(snapshots[m]);
  }
  return integral / static_cast<double>(snapshots.size() - 1);
}

std::vector<std::int64_t> conservation_residual_micro(const LatticeState& s) {
  const int n = s.n;
  std::vector<std::int64_t> res(s.sites());
  for (int x = -n; x <= n; ++x) {
    const int i = x + n;
    const std::int64_t inflow_left = x > -n ? s.q[i - 1] : 0;
    const std::int64_t outflow_right = x < n ? s.q[i] : 0;
    std::int64_t r = static_cast<std::int64_t>(s.eta[i]) - static_cast<std::int64_t>(s.eta0[i]) -
                     (inflow_left - outflow_right) - s.k[i];
    if (x == n) r -= s.r_plus;
    if (x == -n) r -= s.r_minus;
    res[i] = r;
  }
  return res;
}

void require_conserved(const LatticeState& state) {
  const auto res = conservation_residual_micro(state);
  for (std::size_t i = 0; i < res.size(); ++i)
    if (res[i] != 0)
      throw BookkeepingError("conservation identity broken at site " +
                             std::to_string(static_cast<long>(i) - state.n));
}

}  // namespace fluctlat
