#include "doctest.h"

#include <cmath>
#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>

#include "fluctlat/empirical.hpp"
#include "fluctlat/expm.hpp"
#include "fluctlat/hydro.hpp"
#include "fluctlat/simulator.hpp"

using namespace fluctlat;

namespace {

std::vector<double> linspace(double a, double b, int count) {
  std::vector<double> v(count);
  for (int i = 0; i < count; ++i) v[i] = a + (b - a) * i / (count - 1);
  return v;
}

double mean_density(const LatticeState& s) {
  double acc = 0.0;
  for (auto e : s.eta) acc += e;
  return acc / s.sites();
}

}  // namespace

TEST_CASE("initial sampling") {
  SimParams p;
  p.n = 20;
  p.initial = [](double) { return 1.0; };
  for (auto e : sample_initial(p).eta) CHECK(e == 1);
  p.initial = [](double) { return 0.0; };
  for (auto e : sample_initial(p).eta) CHECK(e == 0);

  p.n = 1000;
  p.initial = [](double) { return 0.5; };
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    p.seed = seed;
    const auto s = sample_initial(p);
    CHECK(mean_density(s) >= 0.45);
    CHECK(mean_density(s) <= 0.55);
    CHECK(s.eta == s.eta0);
    for (auto q : s.q) CHECK(q == 0);
    CHECK(s.t == 0.0);
  }
  p.initial = [](double) { return 1.5; };
  CHECK_THROWS_AS(sample_initial(p), ValidationError);
}

TEST_CASE("parameter validation") {
  SimParams p;
  p.n = 1;
  p.rate = build_cylinder_rate("neighbor-sum");
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.n = 4;
  p.T = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.T = 1.0;
  p.beta_plus = -1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.beta_plus = 1.0;
  p.sample_times = {0.5, 0.2};
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.sample_times = {0.2, 1.5};
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("jump rates") {
  SimParams p;
  p.n = 10;
  LatticeState s = sample_initial(p);
  std::fill(s.eta.begin(), s.eta.end(), 0);
  s.eta[10] = 1;  // x = 0 occupied, x = 1 empty
  const auto r = jump_rates(s, p);
  CHECK(r.bond[10] == 50.0);          // bond (0,1)
  CHECK(r.bond[9] == 50.0);           // bond (-1,0)
  CHECK(r.bond[0] == 0.0);            // both empty
  CHECK(r.boundary_plus == 50.0);     // beta = 1
  CHECK(r.bulk[0] == 0.0);            // reservoir site carries no Glauber rate
  CHECK(r.bulk[5] == 1.0);

  p.tilt = Tilt::stationary([](double) { return std::log(2.0); }, {});
  const auto rt = jump_rates(s, p);
  CHECK(rt.bulk[5] == doctest::Approx(2.0));   // empty site
  CHECK(rt.bulk[10] == doctest::Approx(0.5));  // occupied site
  CHECK(rt.boundary_plus == 50.0);

  p.tilt = Tilt::stationary({}, [](double x) { return x; });
  const auto rh = jump_rates(s, p);
  CHECK(rh.bond[10] == doctest::Approx(50.0 * std::exp(0.1)));   // right jump with the drift
  CHECK(rh.bond[9] == doctest::Approx(50.0 * std::exp(-0.1)));   // left jump against it
}

TEST_CASE("frozen dynamics") {
  SimParams p;
  p.n = 8;
  p.beta_plus = p.beta_minus = 0.0;
  p.rate = build_cylinder_rate("zero");
  p.initial = [](double) { return 0.0; };
  p.sample_times = linspace(0.0, 1.0, 5);
  const auto r = run(p);
  CHECK(r.event_count == 0);
  REQUIRE(r.snapshots.size() == 5);
  for (const auto& s : r.snapshots) {
    for (auto e : s.eta) CHECK(e == 0);
    for (auto q : s.q) CHECK(q == 0);
    for (auto k : s.k) CHECK(k == 0);
  }
}

TEST_CASE("equilibrium density, bookkeeping and two-point function") {
  SimParams p;
  p.n = 64;
  p.T = 0.25;
  p.sample_times = linspace(0.0, 0.25, 26);
  p.seed = 2024;
  const auto runs = run_replicas(p, 50, 2);
  double avg = 0.0, pair = 0.0, pair2 = 0.0;
  int pairs = 0;
  for (const auto& r : runs) {
    REQUIRE(r.snapshots.size() == 26);
    for (const auto& s : r.snapshots) {
      for (auto e : s.eta) CHECK(e <= 1);
      CHECK_NOTHROW(require_conserved(s));
      avg += mean_density(s);
    }
    double acc = 0.0;
    for (std::size_t m = 13; m < 26; ++m) acc += r.snapshots[m].occupancy(0) * r.snapshots[m].occupancy(1);
    acc /= 13.0;
    pair += acc;
    pair2 += acc * acc;
    ++pairs;
  }
  avg /= 50.0 * 26.0;
  CHECK(std::abs(avg - 0.5) < 0.05);
  const double mean = pair / pairs;
  const double se = std::sqrt((pair2 / pairs - mean * mean) / (pairs - 1));
  CHECK(std::abs(mean - 0.25) < 4 * se + 1e-3);
}

TEST_CASE("determinism across thread counts") {
  SimParams p;
  p.n = 16;
  p.T = 0.1;
  p.rate = build_cylinder_rate("neighbor-sum");
  p.sample_times = {0.05, 0.1};
  p.seed = 99;
  const auto a = run_replicas(p, 6, 1);
  const auto b = run_replicas(p, 6, 3);
  for (int r = 0; r < 6; ++r) {
    CHECK(a[r].event_count == b[r].event_count);
    CHECK(a[r].snapshots.back().eta == b[r].snapshots.back().eta);
    CHECK(a[r].snapshots.back().q == b[r].snapshots.back().q);
  }
  p.record_events = true;
  const auto l1 = run(p).log;
  const auto l2 = run(p).log;
  REQUIRE(l1);
  CHECK(l1->events == l2->events);
  CHECK(l1->initial == l2->initial);
}

TEST_CASE("event records round trip") {
  SimParams p;
  p.n = 6;
  p.T = 0.2;
  p.record_events = true;
  const auto log = *run(p).log;
  REQUIRE(!log.events.empty());
  std::stringstream buf;
  write_event_records(buf, log.events);
  CHECK(buf.str().size() == log.events.size() * 13);
  CHECK(read_event_records(buf) == log.events);

  std::stringstream cut(buf.str().substr(0, 20));
  CHECK_THROWS_AS(read_event_records(cut), ConsistencyError);

  p.event_cap = 3;
  const auto capped = *run(p).log;
  CHECK(capped.events.size() == 3);
  CHECK(capped.truncated);
  CHECK_THROWS_AS(log_radon_nikodym(capped, p), ConsistencyError);
}

TEST_CASE("Radon-Nikodym derivative: trivial tilts") {
  SimParams p;
  p.n = 8;
  p.T = 0.2;
  p.record_events = true;
  const auto log = *run(p).log;
  CHECK(log_radon_nikodym(log, p) == 0.0);
  SimParams flat = p;
  flat.tilt = Tilt::stationary({}, [](double) { return 0.7; });
  CHECK(log_radon_nikodym(log, flat) == 0.0);

  SimParams other = p;
  other.n = 9;
  CHECK_THROWS_AS(log_radon_nikodym(log, other), ConsistencyError);
  auto shuffled = log;
  std::swap(shuffled.events.front(), shuffled.events.back());
  CHECK_THROWS_AS(log_radon_nikodym(shuffled, flat), ConsistencyError);
}

TEST_CASE("exact tilted moment") {
  SimParams p;
  p.n = 2;
  p.T = 0.1;
  CHECK(exact_tilted_moment(p) == doctest::Approx(1.0).epsilon(1e-12));
  p.tilt = Tilt::stationary({}, [](double x) { return x; });
  CHECK(std::abs(exact_tilted_moment(p) - 1.0) < 1e-8);
  p.tilt = Tilt::stationary([](double) { return 0.3; }, [](double x) { return x; });
  CHECK(std::abs(exact_tilted_moment(p, [](double) { return 0.3; }) - 1.0) < 1e-8);

  SimParams still;
  still.n = 1;
  still.rate = build_cylinder_rate("zero");
  still.beta_plus = still.beta_minus = 0.0;
  still.tilt = Tilt::stationary([](double) { return 2.0; }, {});
  CHECK(exact_tilted_moment(still) == doctest::Approx(1.0).epsilon(1e-14));

  SimParams big;
  big.n = 5;
  CHECK_THROWS_AS(exact_tilted_moment(big), CapacityError);
  SimParams moving = p;
  moving.tilt.time_dependent = true;
  CHECK_THROWS_AS(exact_tilted_moment(moving), ConfigError);
}

TEST_CASE("matrix exponential agrees with Eigen's") {
  std::srand(4);
  for (int size : {3, 8, 20}) {
    const Eigen::MatrixXd a = 3.0 * Eigen::MatrixXd::Random(size, size);
    const Eigen::MatrixXd ours = expm(a);
    const Eigen::MatrixXd ref = a.exp();
    CHECK((ours - ref).norm() <= 1e-10 * ref.norm());
  }
}

TEST_CASE("Monte Carlo mean of the tilt weight") {
  SimParams base;
  base.n = 2;
  base.T = 0.1;
  base.record_events = true;
  SimParams tilted = base;
  tilted.tilt = Tilt::stationary([](double) { return 0.3; }, [](double x) { return x; });
  SimParams moving = base;
  moving.tilt.h = [](double t, double x) { return (1.0 + 5.0 * t) * x; };
  moving.tilt.time_dependent = true;

  for (const SimParams* target : {&tilted, &moving}) {
    double s = 0.0, s2 = 0.0;
    const int paths = 2000;
    for (int i = 0; i < paths; ++i) {
      base.seed = 1000 + i;
      const double w = std::exp(log_radon_nikodym(*run(base).log, *target));
      s += w;
      s2 += w * w;
    }
    const double mean = s / paths;
    const double se = std::sqrt((s2 / paths - mean * mean) / (paths - 1));
    CHECK(std::abs(mean - 1.0) < 4 * se);
  }
}

TEST_CASE("tilted simulation follows the tilted hydrodynamics") {
  SimParams p;
  p.n = 32;
  p.T = 0.5;
  p.tilt = Tilt::stationary([](double) { return std::log(3.0); }, {});
  p.sample_times = {0.5};
  p.seed = 5;
  const auto runs = run_replicas(p, 20, 2);
  double micro = 0.0;
  for (const auto& r : runs) {
    CHECK_NOTHROW(require_conserved(r.snapshots.back()));
    micro += pair_site_measure(r.snapshots.back(), SiteMeasure::density,
                               [](double x) { return std::abs(x) < 0.5 ? 1.0 : 0.0; });
  }
  micro /= 20.0;

  HydroSetup h;
  h.initial = [](double) { return 0.5; };
  h.nx = 64;
  h.T = 0.5;
  h.g = FieldGrid::sample(h.grid(), [](double, double) { return std::log(3.0); });
  const auto traj = solve_hydro(h);
  double macro = 0.0;
  for (int j = 0; j <= h.nx; ++j) {
    const double x = traj.grid.x(j);
    if (std::abs(x) < 0.5) macro += traj.grid.dx() * traj.rho(traj.grid.nt, j);
  }
  CHECK(macro > 0.6);  // creation is favoured
  CHECK(std::abs(micro - macro) < 0.05);
}
