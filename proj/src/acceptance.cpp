#include "fluctlat/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "fluctlat/contraction.hpp"
#include "fluctlat/empirical.hpp"
#include "fluctlat/experiment.hpp"
#include "fluctlat/hydro.hpp"
#include "fluctlat/rate_functional.hpp"
#include "fluctlat/simulator.hpp"

namespace fluctlat {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double bump(double x) { return 0.5 + 0.25 * (1.0 - x * x); }

const CylinderRate& constant_rate() {
  static const CylinderRate rate = build_cylinder_rate("constant");
  return rate;
}

double grid_tol(const SpaceTimeGrid& g) { return g.dx() * g.dx() + g.dt(); }

struct Outcome {
  bool passed;
  std::string detail;
};

// ---------------------------------------------------------------------------
// Simulation fixtures, cached so a full validation run simulates each once.

constexpr double kRelaxT = 0.5;
constexpr int kRelaxReplicas = 50;
constexpr int kRelaxSamples = 51;

SimParams relaxation_params(int n) {
  SimParams p;
  p.n = n;
  p.T = kRelaxT;
  p.initial = bump;
  p.sample_times = equally_spaced(kRelaxT, kRelaxSamples);
  p.seed = static_cast<std::uint64_t>(n) << 32;
  return p;
}

const std::vector<RunResult>& relaxation_runs(int n, int threads) {
  static std::map<int, std::vector<RunResult>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, run_replicas(relaxation_params(n), kRelaxReplicas, threads)).first;
  return it->second;
}

const TrajectoryGrid& relaxation_pde() {
  static const TrajectoryGrid traj = [] {
    HydroSetup s;
    s.initial = bump;
    s.nx = 256;
    s.T = kRelaxT;
    return solve_hydro(s);
  }();
  return traj;
}

constexpr int kEquilibriumN = 128;
constexpr int kEquilibriumReplicas = 20;

const std::vector<RunResult>& equilibrium_runs(int threads) {
  static std::optional<std::vector<RunResult>> cache;
  if (!cache) {
    SimParams p;
    p.n = kEquilibriumN;
    p.T = 0.5;
    p.sample_times = equally_spaced(0.5, 101);
    p.seed = 9ull << 32;
    cache = run_replicas(p, kEquilibriumReplicas, threads);
  }
  return *cache;
}

struct MartingaleSample {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t snapshots = 0;
  std::size_t broken = 0;
};

const MartingaleSample& martingale_sample(const SimParams& tilted, int threads) {
  static std::optional<MartingaleSample> cache;
  if (!cache) {
    SimParams base = tilted;
    base.tilt = Tilt::none();
    base.record_events = true;
    base.sample_times = {0.5 * base.T, base.T};
    base.seed = 3ull << 32;
    const int paths = 10000;
    const auto runs = run_replicas(base, paths, threads);
    MartingaleSample m;
    double s = 0.0, s2 = 0.0;
    for (const RunResult& r : runs) {
      const double w = std::exp(log_radon_nikodym(*r.log, tilted));
      s += w;
      s2 += w * w;
      for (const LatticeState& st : r.snapshots) {
        ++m.snapshots;
        for (auto v : conservation_residual_micro(st)) m.broken += v != 0;
      }
    }
    m.mean = s / paths;
    m.standard_error = std::sqrt((s2 / paths - m.mean * m.mean) / (paths - 1));
    cache = m;
  }
  return *cache;
}

SimParams martingale_params() {
  SimParams p;
  p.n = 2;
  p.T = 0.1;
  p.tilt = Tilt::stationary([](double) { return 0.3; }, [](double x) { return x; });
  return p;
}

// ---------------------------------------------------------------------------
// PDE fixtures

TrajectoryGrid relaxation(int nx, double T) {
  HydroSetup s;
  s.initial = bump;
  s.nx = nx;
  s.T = T;
  return solve_hydro(s);
}

struct TiltedFixture {
  TrajectoryGrid traj;
  FieldGrid g, h;
};

/// Relaxation under drifts; `equal` uses G = H with H(t,+-1) = 0, otherwise
/// G and H are unrelated and H only vanishes at x = -1.
TiltedFixture tilted_fixture(int nx, double T, bool equal) {
  HydroSetup s;
  s.initial = bump;
  s.nx = nx;
  s.T = T;
  const SpaceTimeGrid grid = s.grid();
  s.h = FieldGrid::sample(grid, [equal](double t, double x) {
    const double base = equal ? std::sin(M_PI * (x + 1.0) / 2.0) : 0.5 * (x + 1.0);
    return 0.4 * (1.0 + 0.5 * t) * base;
  });
  s.g = equal ? *s.h : FieldGrid::sample(grid, [](double t, double x) {
    return 0.3 * std::cos(M_PI * x / 2.0) * (1.0 - t);
  });
  return {solve_hydro(s), *s.g, *s.h};
}

// ---------------------------------------------------------------------------
// Criteria

Outcome hydrodynamic_limit(int threads) {
  const auto tests = std::vector<TestFunction>{default_test_functions().front()};
  std::ostringstream d;
  std::vector<double> gaps;
  for (int n : {32, 64, 128}) {
    const auto& runs = relaxation_runs(n, threads);
    const double gap = compare_micro_macro(runs, relaxation_params(n), relaxation_pde(), tests).front().density;
    // replica spread of the time-integrated pairing
    std::vector<double> per;
    for (const auto& r : runs) per.push_back(
        compare_micro_macro({r}, relaxation_params(n), relaxation_pde(), tests).front().density);
    double m = 0.0, m2 = 0.0;
    for (double v : per) m += v;
    m /= per.size();
    for (double v : per) m2 += (v - m) * (v - m);
    const double se = std::sqrt(m2 / (per.size() - 1) / per.size());
    d << "N=" << n << " gap " << num(gap) << " (replica se " << num(se) << ") ";
    gaps.push_back(gap);
  }
  const bool passed = gaps[0] < 0.08 && gaps[1] < gaps[0] && gaps[2] < gaps[1];
  return {passed, d.str()};
}

Outcome current_lln(int threads) {
  const auto tests = std::vector<TestFunction>{default_test_functions().front()};
  const auto gap = compare_micro_macro(relaxation_runs(128, threads), relaxation_params(128),
                                       relaxation_pde(), tests).front();
  return {gap.current < 0.08 && gap.creation < 0.08,
          "N=128 current gap " + num(gap.current) + ", creation gap " + num(gap.creation)};
}

Outcome mean_one(int threads) {
  const SimParams p = martingale_params();
  const double exact = exact_tilted_moment(p);
  const MartingaleSample& mc = martingale_sample(p, threads);
  const bool passed = std::abs(exact - 1.0) <= 1e-8 && std::abs(mc.mean - 1.0) <= 3.0 * mc.standard_error;
  return {passed, "exact " + num(exact) + " (|err| " + num(std::abs(exact - 1.0)) + "), Monte Carlo " +
                      num(mc.mean) + " +- " + num(mc.standard_error) + " over 10000 paths"};
}

Outcome legendre_duality() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> rate(1e-3, 10.0), kappa(-10.0, 10.0);
  double worst_dual = 0.0, worst_zero = 0.0, worst_branch = 0.0, worst_limit = 0.0;
  bool infinities = true;
  for (int i = 0; i < 10000; ++i) {
    const double c = rate(rng), a = rate(rng), k = kappa(rng);
    worst_dual = std::max(worst_dual, std::abs(phi(c, a, k) - phi_legendre_oracle(c, a, k)));
    worst_zero = std::max(worst_zero, std::abs(phi(c, a, c - a)));

    const double kneg = -std::abs(k) - 1e-3;
    const double expected_c0 = a + kneg - kneg * std::log(-kneg / a);
    worst_branch = std::max(worst_branch, std::abs(phi(0.0, a, kneg) - expected_c0));
    const double kpos = -kneg;
    const double expected_a0 = c - kpos + kpos * std::log(kpos / c);
    worst_branch = std::max(worst_branch, std::abs(phi(c, 0.0, kpos) - expected_a0));
    infinities = infinities && std::isinf(phi(0.0, a, kpos)) && std::isinf(phi(c, 0.0, kneg));
    // dPhi/dC is at most A/|kappa| here, so a 1e-15 step must stay within 1e-9
    worst_limit = std::max(worst_limit, std::abs(phi(1e-15, a, kneg) - phi(0.0, a, kneg)));
  }
  const double worked = std::abs(phi(0.5, 0.5, 0.75) - (1.0 - 1.25 + 0.75 * std::log(2.0))) +
                        std::abs(phi(0.0, 1.0, -1.0));
  const bool passed = worst_dual < 1e-9 && worst_zero <= 1e-12 && worst_branch <= 1e-12 && infinities &&
                      worst_limit < 1e-9 && worked <= 1e-12;
  return {passed, "max |phi - oracle| " + num(worst_dual) + ", max phi at the mean " + num(worst_zero) +
                      ", degenerate branch error " + num(worst_branch) + ", C->0 limit error " +
                      num(worst_limit) + ", worked values error " + num(worked) + (infinities ? ", +inf branches ok" : ", +inf branch missing")};
}

Outcome variational_sup() {
  const TiltedFixture f = tilted_fixture(64, 0.5, false);
  const SpaceTimeGrid& g = f.traj.grid;
  const auto i0 = evaluate_I0_explicit(f.traj, constant_rate());
  const Drifts d = recover_drifts(f.traj, constant_rate());
  const double j_star = evaluate_J_GH(f.traj, d.g, d.h, constant_rate());
  const double tol = 5.0 * grid_tol(g);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 0.3);
  int decreased = 0;
  double worst_rel = 0.0;
  for (int s = 0; s < 20; ++s) {
    double a[6];
    for (double& v : a) v = normal(rng);
    const FieldGrid fh = FieldGrid::sample(g, [&](double t, double x) {
      return a[0] * std::sin(M_PI * x) + a[1] * t * x * x + a[2] * std::cos(2.0 * x) * (1.0 - t);
    });
    const FieldGrid fg = FieldGrid::sample(g, [&](double t, double x) {
      return a[3] * std::cos(M_PI * x / 2.0) + a[4] * t * x + a[5];
    });
    FieldGrid h2 = d.h, g2 = d.g;
    h2.values += fh.values;
    g2.values += fg.values;
    if (evaluate_J_GH(f.traj, g2, h2, constant_rate()) < j_star) ++decreased;
    const double drop = j_star - evaluate_J_GH(f.traj, d.g, h2, constant_rate());
    const double expected = drift_quadratic_form(f.traj, fh);
    worst_rel = std::max(worst_rel, std::abs(drop - expected) / expected);
  }
  const bool passed = i0.feasible && std::abs(j_star - i0.i0) <= tol && decreased == 20 && worst_rel <= 1e-8;
  return {passed, "|J* - I0| " + num(std::abs(j_star - i0.i0)) + " (tol " + num(tol) + "), " +
                      std::to_string(decreased) + "/20 perturbations decrease J, worst relative gap error " +
                      num(worst_rel)};
}

Outcome zero_cost() {
  std::ostringstream d;
  bool passed = true;
  double prev = std::numeric_limits<double>::infinity();
  for (int nx : {64, 128, 256}) {
    const TrajectoryGrid traj = relaxation(nx, kRelaxT);
    const auto b = evaluate_I0_explicit(traj, constant_rate());
    const double tol = 10.0 * grid_tol(traj.grid);
    passed = passed && b.feasible && b.i0 <= tol && b.i0 < prev;
    prev = b.i0;
    d << "nx=" << nx << " I0 " << num(b.i0) << " (tol " << num(tol) << ") ";
  }
  return {passed, d.str()};
}

Outcome contraction_principle() {
  const TiltedFixture f = tilted_fixture(64, 0.5, true);
  const SpaceTimeGrid& g = f.traj.grid;
  const double tol = 10.0 * grid_tol(g);
  const DensityRate dr = density_rate(f.traj, bump, constant_rate());
  const double h_err = (dr.result.h_opt.values - f.h.values).cwiseAbs().maxCoeff();
  const auto i0 = evaluate_I0_explicit(dr.result.currents, constant_rate());
  const double f_err = std::abs(dr.f - i0.i0);
  const AuditReport audit = suboptimality_audit(f.traj, constant_rate(), dr.result, 20, 7);
  const bool passed = h_err <= tol && i0.feasible && f_err <= tol && audit.passed == 20;
  return {passed, "max |H - H0| " + num(h_err) + ", |F - I0| " + num(f_err) + " (tol " + num(tol) +
                      "), audits " + std::to_string(audit.passed) + "/20, min gap " + num(audit.min_gap) +
                      ", Newton residual " + num(dr.result.residual)};
}

Outcome l1_contraction() {
  HydroSetup flat;
  flat.initial = [](double) { return 0.5; };
  flat.nx = 64;
  flat.T = kRelaxT;
  const auto r = l1_contraction_check(relaxation(64, kRelaxT), solve_hydro(flat), constant_rate());
  return {r.nonincreasing && r.l2_ok, "distance " + num(r.distances.front()) + " -> " + num(r.distances.back()) +
                                          ", worst step increase " + num(r.worst_increase)};
}

Outcome local_equilibrium(int threads) {
  const auto& runs = equilibrium_runs(threads);
  std::vector<double> table(8);
  for (std::uint32_t w = 0; w < 8; ++w) table[w] = CylinderFunction::bit(w, 1, 0) * CylinderFunction::bit(w, 1, 1);
  const CylinderFunction psi(1, table);  // eta(0) eta(1)
  const auto one = [](double, double) { return 1.0; };
  std::vector<double> stats;
  for (const RunResult& r : runs) stats.push_back(local_equilibrium_statistic(r.snapshots, psi, one, 0.1));
  double m = 0.0, m2 = 0.0;
  for (double v : stats) m += v;
  m /= stats.size();
  for (double v : stats) m2 += (v - m) * (v - m);
  const double se = std::sqrt(m2 / (stats.size() - 1) / stats.size());
  const int l = static_cast<int>(std::floor(0.1 * kEquilibriumN));
  const double window_bias = -0.25 / (2 * l + 1);
  return {std::abs(m) <= 3.0 * se, "statistic " + num(m) + " +- " + num(se) + " (N=128, " +
                                       std::to_string(kEquilibriumReplicas) +
                                       " replicas); finite-window bias -1/(4(2l+1)) = " + num(window_bias)};
}

Outcome exact_bookkeeping(int threads) {
  std::size_t snapshots = 0, broken = 0;
  auto scan = [&](const std::vector<RunResult>& runs) {
    for (const RunResult& r : runs)
      for (const LatticeState& s : r.snapshots) {
        ++snapshots;
        for (auto v : conservation_residual_micro(s)) broken += v != 0;
      }
  };
  for (int n : {32, 64, 128}) scan(relaxation_runs(n, threads));
  scan(equilibrium_runs(threads));
  const MartingaleSample& mc = martingale_sample(martingale_params(), threads);
  snapshots += mc.snapshots;
  broken += mc.broken;

  // tilted, time-dependent dynamics with a range-one rate
  SimParams tilted;
  tilted.n = 32;
  tilted.T = 0.2;
  tilted.rate = build_cylinder_rate("neighbor-sum");
  tilted.initial = bump;
  tilted.tilt.g = [](double t, double x) { return std::log(3.0) * (1.0 - t) * x; };
  tilted.tilt.h = [](double t, double x) { return (1.0 + t) * x; };
  tilted.tilt.time_dependent = true;
  tilted.sample_times = equally_spaced(0.2, 21);
  tilted.seed = 10ull << 32;
  scan(run_replicas(tilted, 10, threads));

  return {broken == 0, std::to_string(snapshots) + " snapshots, " + std::to_string(broken) + " nonzero site residuals"};
}

Outcome convex_decomposition() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto random_trajectory = [&] {
    const double amp = 0.2 * u(rng), a = 0.5 * u(rng), b = u(rng), c = 0.5 * u(rng), e = u(rng);
    HydroSetup s;
    s.initial = [amp](double x) { return 0.5 + amp * (1.0 - x * x); };
    s.nx = 32;
    s.T = 0.25;
    const SpaceTimeGrid grid = s.grid();
    s.g = FieldGrid::sample(grid, [=](double t, double x) { return a * std::cos(M_PI * x / 2.0) * (1.0 + b * t); });
    s.h = FieldGrid::sample(grid, [=](double t, double x) { return c * std::sin(M_PI * x) * (1.0 + e * t); });
    return solve_hydro(s);
  };
  int held = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 10; ++i) {
    const TrajectoryGrid a = random_trajectory();
    const TrajectoryGrid b = random_trajectory();
    const ConvexityReport r = convex_decomposition_check(a, b, constant_rate(), 1e-8);
    held += r.holds;
    worst = std::min(worst, r.gap);
  }
  return {held == 10, std::to_string(held) + "/10 pairs convex, smallest midpoint gap " + num(worst)};
}

const char* criterion_name(int id) {
  static const char* names[] = {"",
                                "hydrodynamic limit",
                                "current law of large numbers",
                                "mean-one tilt weight",
                                "Legendre duality of phi",
                                "variational supremum",
                                "zero cost of the hydrodynamics",
                                "contraction to the density",
                                "L1 contraction",
                                "local equilibrium",
                                "exact bookkeeping",
                                "convex decomposition"};
  return names[id];
}

}  // namespace

CriterionResult run_criterion(int id, std::ostream& log, int threads) {
  if (id < 1 || id > kCriteria) throw DomainError("criterion id must be in 1.." + std::to_string(kCriteria));
  const auto start = std::chrono::steady_clock::now();
  CriterionResult result;
  result.id = id;
  result.name = criterion_name(id);
  Outcome o{false, ""};
  try {
    switch (id) {
      case 1: o = hydrodynamic_limit(threads); break;
      case 2: o = current_lln(threads); break;
      case 3: o = mean_one(threads); break;
      case 4: o = legendre_duality(); break;
      case 5: o = variational_sup(); break;
      case 6: o = zero_cost(); break;
      case 7: o = contraction_principle(); break;
      case 8: o = l1_contraction(); break;
      case 9: o = local_equilibrium(threads); break;
      case 10: o = exact_bookkeeping(threads); break;
      case 11: o = convex_decomposition(); break;
    }
  } catch (const std::exception& e) {
    o = {false, std::string("error: ") + e.what()};
  }
  result.passed = o.passed;
  result.detail = o.detail;
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  log << (result.passed ? "[PASS] " : "[FAIL] ") << id << " " << result.name << ": " << result.detail << " ("
      << num(result.seconds) << " s)" << std::endl;
  return result;
}

std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids, std::ostream& log, int threads) {
  std::vector<int> todo = ids;
  if (todo.empty())
    for (int i = 1; i <= kCriteria; ++i) todo.push_back(i);
  std::vector<CriterionResult> out;
  for (int id : todo) out.push_back(run_criterion(id, log, threads));
  return out;
}

}  // namespace fluctlat
