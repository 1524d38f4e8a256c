#include "fluctlat/contraction.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "fluctlat/errors.hpp"
#include "fluctlat/rate_functional.hpp"
#include "fluctlat/tridiagonal.hpp"

namespace fluctlat {

Grid density_time_derivative(const TrajectoryGrid& traj) {
  const int nt = traj.grid.nt;
  if (nt < 2) throw ConfigError("at least two time steps are needed for the time derivative");
  const double dt = traj.grid.dt();
  const Grid& r = traj.rho;
  Grid d(r.rows(), r.cols());
  for (int n = 1; n < nt; ++n) d.row(n) = (r.row(n + 1) - r.row(n - 1)) / (2.0 * dt);
  d.row(0) = (-3.0 * r.row(0) + 4.0 * r.row(1) - r.row(2)) / (2.0 * dt);
  d.row(nt) = (3.0 * r.row(nt) - 4.0 * r.row(nt - 1) + r.row(nt - 2)) / (2.0 * dt);
  return d;
}

namespace {

struct Slice {
  Vector sigma;  ///< bond conductivities, nx entries
  Vector c, a;   ///< nodal rates
  Vector source; ///< -d_t rho + 1/2 Lap rho at interior nodes
};

Vector slice_residual(const Slice& s, const Vector& h, double dx) {
  const Eigen::Index m = s.source.size();  // interior unknowns, nodes 1..nx-1
  Vector r(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index j = i + 1;
    const double flux_right = s.sigma(j) * (h(j + 1) - h(j));
    const double flux_left = s.sigma(j - 1) * (h(j) - h(j - 1));
    r(i) = s.source(i) - (flux_right - flux_left) / (dx * dx) + s.c(j) * std::exp(h(j)) -
           s.a(j) * std::exp(-h(j));
  }
  return r;
}

}  // namespace

ContractionResult solve_optimal_drift(const TrajectoryGrid& traj, const CylinderRate& rate,
                                      const ContractionOptions& opts) {
  const SpaceTimeGrid& g = traj.grid;
  const int nx = g.nx, nt = g.nt;
  const double dx = g.dx();
  for (int n = 0; n <= nt; ++n)
    for (int j = 1; j < nx; ++j)
      if (!(traj.rho(n, j) > 0.0 && traj.rho(n, j) < 1.0)) {
        std::ostringstream msg;
        msg << "density touches {0,1} at time level " << n << ", node " << j;
        throw SingularityError(msg.str(), n);
      }

  const MacroscopicCoefficients coeff(rate);
  const Grid drho_dt = density_time_derivative(traj);

  ContractionResult out;
  out.h_opt = FieldGrid::zeros(g);
  out.newton_iters.assign(nt + 1, 0);
  out.bond_qdot = Grid::Zero(nt + 1, nx);

  Slice s;
  s.sigma.resize(nx);
  s.c.resize(nx + 1);
  s.a.resize(nx + 1);
  s.source.resize(nx - 1);
  Vector h = Vector::Zero(nx + 1);

  for (int n = 0; n <= nt; ++n) {
    const auto rho = traj.rho.row(n);
    for (int b = 0; b < nx; ++b)
      s.sigma(b) = 0.5 * (rho(b) * (1.0 - rho(b)) + rho(b + 1) * (1.0 - rho(b + 1)));
    for (int j = 0; j <= nx; ++j) {
      s.c(j) = coeff.creation(rho(j));
      s.a(j) = coeff.annihilation(rho(j));
    }
    for (int j = 1; j < nx; ++j)
      s.source(j - 1) = -drho_dt(n, j) + 0.5 * (rho(j + 1) - 2.0 * rho(j) + rho(j - 1)) / (dx * dx);

    Vector r = slice_residual(s, h, dx);
    double norm = r.lpNorm<Eigen::Infinity>();
    int iter = 0;
    while (norm > opts.tol) {
      if (iter == opts.max_iters) {
        std::ostringstream msg;
        msg << "Newton did not converge on time level " << n << " (residual " << norm << ")";
        throw IterationError(msg.str(), n);
      }
      ++iter;
      const Eigen::Index m = nx - 1;
      Vector lower(m), diag(m), upper(m);
      for (Eigen::Index i = 0; i < m; ++i) {
        const Eigen::Index j = i + 1;
        lower(i) = -s.sigma(j - 1) / (dx * dx);
        upper(i) = -s.sigma(j) / (dx * dx);
        diag(i) = (s.sigma(j - 1) + s.sigma(j)) / (dx * dx) + s.c(j) * std::exp(h(j)) +
                  s.a(j) * std::exp(-h(j));
      }
      const Vector step = solve_tridiagonal<double>(lower, diag, upper, -r);
      double scale = 1.0;
      bool accepted = false;
      for (int halvings = 0; halvings <= 30; ++halvings) {
        Vector trial = h;
        trial.segment(1, m) += scale * step;
        const Vector tr = slice_residual(s, trial, dx);
        const double tn = tr.lpNorm<Eigen::Infinity>();
        if (std::isfinite(tn) && tn < norm) {
          h = trial;
          r = tr;
          norm = tn;
          accepted = true;
          break;
        }
        scale *= 0.5;
        ++out.damping_events;
      }
      if (!accepted) {
        if (norm <= 100.0 * opts.tol) break;  // rounding floor reached
        std::ostringstream msg;
        msg << "Newton stalled on time level " << n << " (residual " << norm << ")";
        throw IterationError(msg.str(), n);
      }
    }
    out.newton_iters[n] = iter;
    out.residual = std::max(out.residual, norm);
    out.h_opt.values.row(n) = h.transpose();
  }

  // Optimal currents and the cost evaluated at H.
  TrajectoryGrid cur;
  cur.grid = g;
  cur.rho = traj.rho;
  cur.rho_minus = traj.rho_minus;
  cur.rho_plus = traj.rho_plus;
  cur.qdot = Grid::Zero(nt + 1, nx + 1);
  cur.kdot = Grid::Zero(nt + 1, nx + 1);
  double f = 0.0;
  for (int n = 0; n <= nt; ++n) {
    const Vector rho = traj.rho.row(n).transpose();
    const Vector hn = out.h_opt.values.row(n).transpose();
    Vector sig(nx + 1);
    for (int j = 0; j <= nx; ++j) sig(j) = rho(j) * (1.0 - rho(j));
    cur.qdot.row(n) = (-0.5 * centered_gradient(rho, dx) + sig.cwiseProduct(centered_gradient(hn, dx))).transpose();
    double row = 0.0;
    for (int b = 0; b < nx; ++b) {
      const double grad = (hn(b + 1) - hn(b)) / dx;
      const double sb = 0.5 * (sig(b) + sig(b + 1));
      out.bond_qdot(n, b) = -0.5 * (rho(b + 1) - rho(b)) / dx + sb * grad;
      row += dx * 0.5 * sb * grad * grad;
    }
    for (int j = 0; j <= nx; ++j) {
      const double c = coeff.creation(rho(j)), a = coeff.annihilation(rho(j));
      const double ep = std::exp(hn(j)), em = std::exp(-hn(j));
      cur.kdot(n, j) = c * ep - a * em;
      row += g.wx(j) * (c * (1.0 - ep + hn(j) * ep) + a * (1.0 - em - hn(j) * em));
    }
    f += g.wt(n) * row;
  }
  cur.integrate_currents();
  out.currents = std::move(cur);
  out.f_rho = f;
  return out;
}

DensityRate density_rate(const TrajectoryGrid& rho, const Profile& gamma, const CylinderRate& rate,
                         const ContractionOptions& opts) {
  DensityRate out;
  out.result = solve_optimal_drift(rho, rate, opts);
  if (gamma) out.h_gamma = initial_cost(rho.grid, rho.rho.row(0).transpose(), gamma);
  out.f = out.result.f_rho + out.h_gamma;
  return out;
}

AuditReport suboptimality_audit(const TrajectoryGrid& traj, const CylinderRate& rate,
                                const ContractionResult& result, int n_samples,
                                std::uint64_t seed, double amplitude) {
  const SpaceTimeGrid& g = traj.grid;
  const int nx = g.nx, nt = g.nt;
  const double dx = g.dx();
  const MacroscopicCoefficients coeff(rate);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, amplitude);

  const CurrentCost base = current_cost(g, traj.rho, result.bond_qdot, result.currents.kdot, coeff);
  const double f_ref = base.i1 + base.i2;

  AuditReport report;
  report.samples = n_samples;
  report.min_gap = std::numeric_limits<double>::infinity();
  for (int s = 0; s < n_samples; ++s) {
    // h(t,x) = sum_k (a_k + b_k t / T) sin(k pi (x+1)/2)
    double coef[3][2];
    for (auto& c : coef)
      for (double& v : c) v = normal(rng);
    Grid q = result.bond_qdot;
    Grid k = result.currents.kdot;
    for (int n = 0; n <= nt; ++n) {
      const double tau = g.t(n) / g.T;
      Vector hp(nx + 1);
      for (int j = 0; j <= nx; ++j) {
        double v = 0.0;
        for (int m = 0; m < 3; ++m) v += (coef[m][0] + coef[m][1] * tau) * std::sin((m + 1) * M_PI * (g.x(j) + 1.0) / 2.0);
        hp(j) = v;
      }
      hp(0) = hp(nx) = 0.0;
      Vector jb(nx);
      for (int b = 0; b < nx; ++b) {
        const double r0 = traj.rho(n, b), r1 = traj.rho(n, b + 1);
        jb(b) = 0.5 * (r0 * (1.0 - r0) + r1 * (1.0 - r1)) * (hp(b + 1) - hp(b)) / dx;
        q(n, b) += jb(b);
      }
      // d_t rho + D Q - K = 0 is kept by moving the divergence into K.
      for (int j = 1; j < nx; ++j) k(n, j) += (jb(j) - jb(j - 1)) / dx;
    }
    const CurrentCost c = current_cost(g, traj.rho, q, k, coeff);
    const double gap = c.i1 + c.i2 - f_ref;
    report.gaps.push_back(gap);
    report.min_gap = std::min(report.min_gap, gap);
    if (gap >= -1e-8) ++report.passed;
  }
  if (n_samples == 0) report.min_gap = 0.0;
  return report;
}

}  // namespace fluctlat
