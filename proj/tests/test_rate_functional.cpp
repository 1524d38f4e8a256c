#include "doctest.h"

#include <limits>
#include <random>

#include "fixtures.hpp"
#include "fluctlat/rate_functional.hpp"

using namespace fluctlat;

namespace {
const double kInf = std::numeric_limits<double>::infinity();
const CylinderRate kConstant = build_cylinder_rate("constant");
}  // namespace

TEST_CASE("phi at reference points") {
  CHECK(std::abs(phi(0.7, 0.2, 0.5)) < 1e-15);
  CHECK(phi(1.0, 0.25, 0.0) == doctest::Approx(0.25).epsilon(1e-14));
  // -1/4 + (3/4) ln 2
  CHECK(phi(0.5, 0.5, 0.75) == doctest::Approx(-0.25 + 0.75 * std::log(2.0)).epsilon(1e-14));
  CHECK(phi(0.5, 0.5, 0.75) == doctest::Approx(0.269860).epsilon(1e-6));
  CHECK(phi(0.0, 1.0, -1.0) == doctest::Approx(0.0).scale(1e-15));
  CHECK_THROWS_AS(phi(-1.0, 1.0, 0.0), DomainError);
  CHECK_THROWS_AS(phi(1.0, -1.0, 0.0), DomainError);
}

TEST_CASE("phi degenerate branches") {
  CHECK(phi(0.0, 1.0, 0.5) == kInf);
  CHECK(phi(0.0, 2.0, -0.5) == doctest::Approx(2.0 - 0.5 + 0.5 * std::log(0.25)));
  CHECK(phi(0.0, 2.0, 0.0) == 2.0);
  CHECK(phi(1.0, 0.0, -0.5) == kInf);
  CHECK(phi(3.0, 0.0, 1.5) == doctest::Approx(3.0 - 1.5 + 1.5 * std::log(0.5)));
  CHECK(phi(0.0, 0.0, 0.0) == 0.0);
  CHECK(phi(0.0, 0.0, 1e-3) == kInf);
  // continuity into the degenerate branch
  CHECK(phi(1e-14, 2.0, -0.5) == doctest::Approx(phi(0.0, 2.0, -0.5)).epsilon(1e-9));
}

TEST_CASE("phi is nonnegative, vanishes only at the mean, convex in kappa") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(1e-3, 10.0), k(-20.0, 20.0);
  for (int i = 0; i < 10000; ++i) {
    const double c = u(rng), a = u(rng), kappa = k(rng);
    const double v = phi(c, a, kappa);
    CHECK(v >= 0.0);
    if (std::abs(kappa - (c - a)) > 1e-3) CHECK(v > 0.0);
  }
  const double c = 0.8, a = 1.7, h = 0.01;
  for (double kappa = -5.0; kappa < 5.0; kappa += 0.1)
    CHECK(phi(c, a, kappa + h) - 2 * phi(c, a, kappa) + phi(c, a, kappa - h) > 0.0);
}

TEST_CASE("Legendre oracle agrees with the closed form") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(1e-3, 10.0), k(-10.0, 10.0);
  for (int i = 0; i < 2000; ++i) {
    const double c = u(rng), a = u(rng), kappa = k(rng);
    CHECK(std::abs(phi(c, a, kappa) - phi_legendre_oracle(c, a, kappa)) < 1e-9);
  }
  CHECK(phi_legendre_oracle(0.6, 0.2, 0.4) < 1e-9);
  CHECK(phi_legendre_oracle(1.0, 0.25, 0.0) == doctest::Approx(0.25).epsilon(1e-9));
  CHECK_THROWS_AS(phi_legendre_oracle(0.0, 1.0, 0.0), DomainError);
}

TEST_CASE("reaction drift") {
  // C e^G - A e^-G = 0 with C = 1, A = 1/4 gives e^G = 1/2
  const double g = reaction_drift(1.0, 0.25, 0.0);
  CHECK(g == doctest::Approx(-std::log(2.0)));
  CHECK(std::abs(std::exp(g) - 0.25 * std::exp(-g)) < 1e-15);
  CHECK_THROWS_AS(reaction_drift(0.0, 1.0, 0.1), InfeasibilityError);
  CHECK_THROWS_AS(reaction_drift(1.0, 0.0, -0.1), InfeasibilityError);
  CHECK(reaction_drift(0.0, 0.0, 0.0) == 0.0);
  const double gc = reaction_drift(0.0, 2.0, -0.5);
  CHECK(-2.0 * std::exp(-gc) == doctest::Approx(-0.5));
}

TEST_CASE("initial cost") {
  auto half = [](double) { return 0.5; };
  CHECK(initial_cost(half, half) == 0.0);
  CHECK(initial_cost(fixtures::bump, fixtures::bump) == doctest::Approx(0.0).scale(1e-15));
  // integrated over [-1, 1]
  CHECK(initial_cost([](double) { return 1.0; }, half) == doctest::Approx(2.0 * std::log(2.0)));
  CHECK(initial_cost([](double) { return 0.0; }, half) == doctest::Approx(2.0 * std::log(2.0)));
  CHECK_THROWS_AS(initial_cost(half, [](double) { return 0.0; }), DomainError);
  CHECK_THROWS_AS(initial_cost(half, [](double) { return 1.0; }), DomainError);
}

TEST_CASE("hydrodynamic trajectory has vanishing cost") {
  double prev = kInf;
  for (int nx : {16, 32}) {
    const auto traj = fixtures::relaxation(nx, 0.25);
    const auto b = evaluate_I0_explicit(traj, kConstant, fixtures::bump);
    const SpaceTimeGrid& g = traj.grid;
    CHECK(b.feasible);
    CHECK(b.i0 == doctest::Approx(b.i1 + b.i2));
    CHECK(b.total == doctest::Approx(b.i0 + b.h_gamma));
    CHECK(b.h_gamma == doctest::Approx(0.0).scale(1e-15));
    CHECK(b.i0 <= 10 * (g.dx() * g.dx() + g.dt()));
    CHECK(b.i0 < prev);
    prev = b.i0;
  }
}

TEST_CASE("drift recovery round trip") {
  const auto f = fixtures::tilted(32, false);
  const auto d = recover_drifts(f.traj, kConstant);
  const SpaceTimeGrid& g = f.traj.grid;
  const double tol = g.dx() * g.dx() + g.dt();
  CHECK((d.g.values - f.g.values).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((d.h.values - f.h.values).cwiseAbs().maxCoeff() < 10 * tol);
  CHECK(d.h.values.col(0).cwiseAbs().maxCoeff() == 0.0);

  // Qdot = -1/2 D rho gives H = 0
  auto zero = fixtures::relaxation(16, 0.1);
  zero.qdot = Grid::Zero(zero.qdot.rows(), zero.qdot.cols());
  const double dx = zero.grid.dx();
  const Grid bonds = -0.5 * (zero.rho.rightCols(16) - zero.rho.leftCols(16)) / dx;
  // nodal values whose bond averages are exactly -1/2 D rho
  for (int n = 0; n <= zero.grid.nt; ++n) {
    zero.qdot(n, 0) = bonds(n, 0);
    for (int b = 0; b < 16; ++b) zero.qdot(n, b + 1) = 2 * bonds(n, b) - zero.qdot(n, b);
  }
  const auto dz = recover_drifts(zero, kConstant);
  CHECK(dz.h.values.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("singular and infeasible trajectories") {
  auto traj = fixtures::relaxation(16, 0.1);
  traj.rho(3, 5) = 1.0;
  CHECK_THROWS_AS(recover_drifts(traj, kConstant), SingularityError);
  CHECK_THROWS_AS(evaluate_I0_explicit(traj, kConstant), SingularityError);

  auto pure = fixtures::relaxation(16, 0.1);
  pure.kdot(2, 4) = 0.5;  // creation without any creation mechanism
  CHECK_THROWS_AS(recover_drifts(pure, build_cylinder_rate("zero")), InfeasibilityError);
}

TEST_CASE("conservation residual") {
  const auto traj = fixtures::relaxation(32, 0.25);
  const auto basis = sine_basis();
  CHECK(conservation_residual(traj, basis) <= feasibility_threshold(traj.grid));

  auto broken = traj;
  broken.q.setZero();
  broken.qdot.setZero();
  CHECK(conservation_residual(broken, basis) > 0.01);

  TrajectoryGrid flat = traj;
  flat.rho.setConstant(0.5);
  flat.q.setZero();
  flat.k.setZero();
  CHECK(conservation_residual(flat, basis) == 0.0);

  // one unit of unaccounted mass in the central cell
  auto leak = traj;
  const int mid = traj.grid.nx / 2;
  for (int n = 1; n <= traj.grid.nt; ++n) leak.k(n, mid) += 1.0 / traj.grid.dx();
  const auto b = evaluate_I0_explicit(leak, kConstant);
  CHECK_FALSE(b.feasible);
  CHECK(b.total == kInf);
}

TEST_CASE("J vanishes at zero drifts and is maximal at the recovered drifts") {
  const auto f = fixtures::tilted(32, false);
  const SpaceTimeGrid& g = f.traj.grid;
  const auto zero = FieldGrid::zeros(g);
  CHECK(evaluate_J_GH(f.traj, zero, zero, kConstant) == 0.0);

  const auto i0 = evaluate_I0_explicit(f.traj, kConstant);
  const auto d = recover_drifts(f.traj, kConstant);
  const double j_star = evaluate_J_GH(f.traj, d.g, d.h, kConstant);
  CHECK(j_star == doctest::Approx(i0.i0).epsilon(1e-10));
  CHECK(std::abs(j_star - i0.i0) <= 5 * (g.dx() * g.dx() + g.dt()));

  // pieces decouple
  CHECK(evaluate_J1(f.traj, d.h) == doctest::Approx(i0.i1).epsilon(1e-10));
  CHECK(evaluate_J2(f.traj, d.g, kConstant) == doctest::Approx(i0.i2).epsilon(1e-10));

  // continuous value of the cost of (G0, H0)
  const MacroscopicCoefficients m(kConstant);
  Grid react(g.nt + 1, g.nx + 1);
  for (int n = 0; n <= g.nt; ++n)
    for (int j = 0; j <= g.nx; ++j) {
      const double r = f.traj.rho(n, j), G = f.g.values(n, j);
      react(n, j) = m.creation(r) * (1 - std::exp(G) + G * std::exp(G)) +
                    m.annihilation(r) * (1 - std::exp(-G) - G * std::exp(-G));
    }
  const double expected = drift_quadratic_form(f.traj, f.h) + integrate_xt(g, react);
  CHECK(std::abs(i0.i0 - expected) <= 5 * (g.dx() * g.dx() + g.dt()));

  std::mt19937_64 rng(5);
  std::normal_distribution<double> nrm(0.0, 0.3);
  for (int s = 0; s < 5; ++s) {
    const double a = nrm(rng), b = nrm(rng);
    const auto pert = FieldGrid::sample(g, [&](double t, double x) {
      return a * std::sin(M_PI * x) + b * t * x * x;
    });
    FieldGrid h2 = d.h;
    h2.values += pert.values;
    const double drop = j_star - evaluate_J_GH(f.traj, d.g, h2, kConstant);
    CHECK(drop == doctest::Approx(drift_quadratic_form(f.traj, pert)).epsilon(1e-8));
    FieldGrid g2 = d.g;
    g2.values += pert.values;
    CHECK(evaluate_J_GH(f.traj, g2, d.h, kConstant) < j_star);
    // J1 does not see G and J2 does not see H
    CHECK(evaluate_J1(f.traj, h2) == doctest::Approx(evaluate_J_GH(f.traj, d.g, h2, kConstant) -
                                                     evaluate_J2(f.traj, d.g, kConstant)));
  }
}

TEST_CASE("midpoint convexity of the reduced rate") {
  const auto a = fixtures::relaxation(32, 0.25);
  const auto b = fixtures::tilted(32, false, 0.25).traj;
  const auto same = convex_decomposition_check(a, a, kConstant);
  CHECK(same.gap == doctest::Approx(0.0).scale(1e-12));
  CHECK(same.holds);
  const auto r = convex_decomposition_check(a, b, kConstant);
  CHECK(r.holds);
  CHECK(r.l1_ok);
  CHECK_THROWS_AS(convex_decomposition_check(a, fixtures::relaxation(16, 0.25), kConstant),
                  GridMismatchError);
}
