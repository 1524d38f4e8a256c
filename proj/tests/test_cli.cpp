#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fluctlat/config.hpp"
#include "fluctlat/experiment.hpp"
#include "fluctlat/io.hpp"

namespace fs = std::filesystem;
using namespace fluctlat;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fluctlat_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int fluctlat_cli(const std::string& args) {
  const char* bin = std::getenv("FLUCTLAT_BIN");
  REQUIRE(bin != nullptr);
  const std::string cmd = std::string(bin) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "run.cfg";
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("oracle mode returns moment one without a tilt") {
  const fs::path dir = scratch("oracle");
  const fs::path cfg = write_config(dir, "sim.n = 2\nsim.t = 0.1\n");
  REQUIRE(fluctlat_cli("oracle --config " + cfg.string() + " --out " + (dir / "out").string()) == 0);
  const auto s = read_json(dir / "out" / "summary.json");
  CHECK(std::abs(s["moment"].get<double>() - 1.0) < 1e-12);
}

TEST_CASE("hydro mode keeps the stationary profile") {
  const fs::path dir = scratch("hydro");
  const fs::path cfg = write_config(dir, "# flat profile, balanced reservoirs\nsim.initial = const:0.5\nsim.t = 0.2\ngrid.nx = 32\n");
  REQUIRE(fluctlat_cli("hydro --config " + cfg.string() + " --out " + (dir / "out").string()) == 0);
  const auto s = read_json(dir / "out" / "summary.json");
  CHECK(s["max_abs_rho_minus_half"].get<double>() < 1e-12);
  const FieldsTable f = read_fields_csv(dir / "out" / "fields.csv");
  CHECK((f.traj.rho.array() == 0.5).all());
}

TEST_CASE("simulation output is reproducible for a fixed seed") {
  const fs::path dir = scratch("repro");
  const fs::path cfg = write_config(dir, "sim.n = 16\nsim.t = 0.2\nsim.initial = bump:0.5,0.25\nsim.samples = 5\n");
  const std::string base = "simulate --config " + cfg.string() + " --seed 17 --replicas 3 --out ";
  REQUIRE(fluctlat_cli(base + (dir / "a").string()) == 0);
  REQUIRE(fluctlat_cli(base + (dir / "b").string()) == 0);
  for (const char* name : {"rho.csv", "q.csv", "k.csv"}) {
    const std::string a = slurp(dir / "a" / name);
    CHECK(a.size() > 100);
    CHECK(a == slurp(dir / "b" / name));
  }
  REQUIRE(fluctlat_cli("simulate --config " + cfg.string() + " --seed 18 --replicas 3 --out " + (dir / "c").string()) == 0);
  CHECK(slurp(dir / "a" / "rho.csv") != slurp(dir / "c" / "rho.csv"));
}

TEST_CASE("usage errors exit with status 2") {
  const fs::path dir = scratch("usage");
  CHECK(fluctlat_cli("teleport --out " + dir.string()) == 2);
  CHECK(fluctlat_cli("hydro") == 2);
  const fs::path cfg = write_config(dir, "sim.unknown = 1\n");
  CHECK(fluctlat_cli("hydro --config " + cfg.string() + " --out " + dir.string()) == 2);
  const fs::path bad_rate = write_config(dir, "rate = nonsense\n");
  CHECK(fluctlat_cli("hydro --config " + bad_rate.string() + " --out " + dir.string()) == 2);

  ExperimentConfig c;
  c.mode = "teleport";
  std::ostringstream log;
  CHECK_THROWS_AS(run_experiment(c, dir, log), ConfigError);
}

TEST_CASE("manifest round trip is a fixpoint") {
  const fs::path dir = scratch("manifest");
  const fs::path cfg = write_config(dir, "sim.n = 2\nsim.t = 0.3\nsim.beta_plus = 0.7\ntilt.h = linear:0,0.2\n");
  REQUIRE(fluctlat_cli("oracle --config " + cfg.string() + " --seed 5 --out " + (dir / "out").string()) == 0);
  const auto m = read_json(dir / "out" / "manifest.json");
  const ExperimentConfig c = config_from_manifest(m);
  CHECK(c.seed == 5);
  CHECK(c.T == 0.3);
  CHECK(manifest_json(c) == m);
  CHECK(config_from_manifest(manifest_json(c)).to_key_values() == c.to_key_values());
}

TEST_CASE("empty result sets give header-only files") {
  const fs::path dir = scratch("empty");
  write_simulation_csv(dir, {}, 8, {});
  for (const char* name : {"rho.csv", "q.csv", "k.csv"}) CHECK(slurp(dir / name) == "run_count,t,x,value\n");
}

TEST_CASE("micro-macro comparison is exact on the frozen empty lattice") {
  SimParams p;
  p.n = 8;
  p.T = 0.2;
  p.beta_plus = p.beta_minus = 0.0;
  p.rate = build_cylinder_rate("zero");
  p.initial = [](double) { return 0.0; };
  p.sample_times = equally_spaced(p.T, 5);
  const auto runs = run_replicas(p, 2, 1);

  HydroSetup s;
  s.initial = p.initial;
  s.rho_minus = s.rho_plus = 0.0;
  s.rate = p.rate;
  s.nx = 16;
  s.T = p.T;
  const TrajectoryGrid pde = solve_hydro(s);
  for (const MicroMacroGap& g : compare_micro_macro(runs, p, pde, default_test_functions())) {
    CHECK(g.density == 0.0);
    CHECK(g.current == 0.0);
    CHECK(g.creation == 0.0);
  }
}
