#include "doctest.h"

#include "fixtures.hpp"
#include "fluctlat/contraction.hpp"
#include "fluctlat/rate_functional.hpp"

using namespace fluctlat;

namespace {
const CylinderRate kConstant = build_cylinder_rate("constant");
}

TEST_CASE("hydrodynamic density needs no drift") {
  const auto traj = fixtures::relaxation(32, 0.25);
  const auto& g = traj.grid;
  const double tol = g.dx() * g.dx() + g.dt();
  const auto r = solve_optimal_drift(traj, kConstant);
  CHECK(r.h_opt.values.cwiseAbs().maxCoeff() < 10 * tol);
  CHECK(r.f_rho >= 0.0);
  CHECK(r.f_rho < 10 * tol);
  CHECK(r.residual <= 1e-10);
  CHECK(r.h_opt.values.col(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.h_opt.values.col(g.nx).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("round trip with G = H") {
  const auto f = fixtures::tilted(32, true, 0.25);
  const auto& g = f.traj.grid;
  const double tol = g.dx() * g.dx() + g.dt();
  const auto dr = density_rate(f.traj, fixtures::bump, kConstant);
  const auto& r = dr.result;
  CHECK((r.h_opt.values - f.h.values).cwiseAbs().maxCoeff() < 10 * tol);
  CHECK(dr.h_gamma == doctest::Approx(0.0).scale(1e-15));
  const auto i0 = evaluate_I0_explicit(r.currents, kConstant);
  CHECK(i0.feasible);
  CHECK(std::abs(dr.f - i0.i0) < 10 * tol);

  const auto audit = suboptimality_audit(f.traj, kConstant, r, 20, 1);
  CHECK(audit.passed == 20);
  CHECK(audit.excluded == 0);
  CHECK(audit.min_gap >= -1e-8);

  const auto none = suboptimality_audit(f.traj, kConstant, r, 0);
  CHECK(none.samples == 0);
}

TEST_CASE("the initial cost is additive") {
  const auto traj = fixtures::relaxation(16, 0.1);
  auto half = [](double) { return 0.5; };
  const auto a = density_rate(traj, fixtures::bump, kConstant);
  const auto b = density_rate(traj, half, kConstant);
  CHECK(b.f - a.f == doctest::Approx(initial_cost(traj.grid, traj.rho.row(0).transpose(), half)));
}

TEST_CASE("contraction error paths") {
  auto traj = fixtures::relaxation(16, 0.1);
  traj.rho(4, 3) = 0.0;
  CHECK_THROWS_AS(solve_optimal_drift(traj, kConstant), SingularityError);
  ContractionOptions opts;
  opts.max_iters = 0;
  const auto tilted = fixtures::tilted(16, true, 0.1);
  CHECK_THROWS_AS(solve_optimal_drift(tilted.traj, kConstant, opts), IterationError);
}
