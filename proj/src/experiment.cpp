#include "fluctlat/experiment.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <thread>

#include "fluctlat/acceptance.hpp"
#include "fluctlat/contraction.hpp"
#include "fluctlat/empirical.hpp"
#include "fluctlat/io.hpp"
#include "fluctlat/rate_functional.hpp"

namespace fluctlat {

int default_threads() {
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* cap = std::getenv("FLUCTLAT_THREADS")) {
    const int v = std::atoi(cap);
    if (v >= 1) threads = std::min(threads, v);
  }
  return threads;
}

std::vector<double> equally_spaced(double T, int count) {
  if (count <= 0) return {};
  if (count == 1) return {T};
  std::vector<double> t(count);
  for (int i = 0; i < count; ++i) t[i] = T * i / (count - 1);
  t.back() = T;
  return t;
}

namespace {

std::optional<FieldsTable> load_tilt_file(const ExperimentConfig& c) {
  if (c.tilt_file.empty()) return std::nullopt;
  return read_fields_csv(c.tilt_file);
}

std::optional<FieldGrid> drift_on(const SpaceTimeGrid& grid, const std::string& profile,
                                  const std::optional<FieldsTable>& file, bool want_g) {
  if (!profile.empty()) {
    const Profile f = parse_profile(profile);
    return FieldGrid::sample(grid, [f](double, double x) { return f(x); });
  }
  if (file) {
    const FieldGrid& src = want_g ? file->g : file->h;
    return FieldGrid::sample(grid, [&src](double t, double x) { return src.at(t, x); });
  }
  return std::nullopt;
}

}  // namespace

SimParams sim_params(const ExperimentConfig& c) {
  SimParams p;
  p.n = c.n;
  p.T = c.T;
  p.beta_plus = c.beta_plus;
  p.beta_minus = c.beta_minus;
  p.rate = c.build_rate();
  p.initial = parse_profile(c.initial);
  p.seed = c.seed;
  p.sample_times = equally_spaced(c.T, c.samples);
  p.tilt_substep = c.substep;
  p.record_events = c.record_events;
  if (const auto file = load_tilt_file(c)) {
    if (!c.tilt_g.empty() || !c.tilt_h.empty())
      throw ConfigError("tilt.file cannot be combined with tilt.g or tilt.h");
    p.tilt = Tilt::from_fields(file->g, file->h);
  } else if (!c.tilt_g.empty() || !c.tilt_h.empty()) {
    p.tilt = Tilt::stationary(c.tilt_g.empty() ? Profile{} : parse_profile(c.tilt_g),
                              c.tilt_h.empty() ? Profile{} : parse_profile(c.tilt_h));
  }
  p.validate();
  return p;
}

HydroSetup hydro_setup(const ExperimentConfig& c) {
  HydroSetup s;
  s.initial = parse_profile(c.initial);
  s.rho_minus = boundary_density(c.beta_minus);
  s.rho_plus = boundary_density(c.beta_plus);
  s.rate = c.build_rate();
  s.nx = c.nx;
  s.nt = c.nt;
  s.T = c.T;
  const auto file = load_tilt_file(c);
  const SpaceTimeGrid grid = s.grid();
  s.g = drift_on(grid, c.tilt_g, file, true);
  s.h = drift_on(grid, c.tilt_h, file, false);
  return s;
}

std::vector<TestFunction> default_test_functions() {
  return {{"cos(pi x/2)", [](double x) { return std::cos(M_PI * x / 2.0); }},
          {"1-x^2", [](double x) { return 1.0 - x * x; }},
          {"sin(pi x)", [](double x) { return std::sin(M_PI * x); }}};
}

std::vector<MicroMacroGap> compare_micro_macro(const std::vector<RunResult>& runs, const SimParams& p,
                                               const TrajectoryGrid& pde,
                                               const std::vector<TestFunction>& tests) {
  const auto& ts = p.sample_times;
  if (ts.size() < 2 || ts.front() != 0.0 || ts.back() != p.T)
    throw GridMismatchError("snapshots must cover [0,T] including both ends");
  if (std::abs(pde.grid.T - p.T) > 1e-12 * p.T)
    throw GridMismatchError("simulation and PDE horizons differ");
  if (std::abs(pde.rho_minus - boundary_density(p.beta_minus)) > 1e-12 ||
      std::abs(pde.rho_plus - boundary_density(p.beta_plus)) > 1e-12)
    throw GridMismatchError("simulation and PDE boundary densities differ");
  if (runs.empty()) throw DomainError("no simulation runs to compare");
  for (const RunResult& r : runs)
    if (r.snapshots.size() != ts.size()) throw GridMismatchError("run lacks snapshots");

  const SpaceTimeGrid& g = pde.grid;
  std::vector<MicroMacroGap> out;
  for (const auto& [name, phi] : tests) {
    MicroMacroGap gap;
    gap.name = name;
    double micro_density = 0.0, micro_q = 0.0, micro_k = 0.0;
    for (const RunResult& r : runs) {
      for (std::size_t m = 0; m + 1 < ts.size(); ++m) {
        const double dt = ts[m + 1] - ts[m];
        micro_density += 0.5 * dt *
                         (pair_site_measure(r.snapshots[m], SiteMeasure::density, phi) +
                          pair_site_measure(r.snapshots[m + 1], SiteMeasure::density, phi));
      }
      micro_q += pair_q_measure(r.snapshots.back(), phi);
      micro_k += pair_site_measure(r.snapshots.back(), SiteMeasure::creation, phi);
    }
    const double count = static_cast<double>(runs.size());
    micro_density /= count;
    micro_q /= count;
    micro_k /= count;

    Vector phi_nodes(g.nx + 1);
    for (int j = 0; j <= g.nx; ++j) phi_nodes(j) = phi(g.x(j));
    double macro_density = 0.0;
    for (int n = 0; n <= g.nt; ++n)
      macro_density += g.wt(n) * integrate_x(g, pde.rho.row(n).transpose().cwiseProduct(phi_nodes));
    const double macro_q = integrate_x(g, pde.q.row(g.nt).transpose().cwiseProduct(phi_nodes));
    const double macro_k = integrate_x(g, pde.k.row(g.nt).transpose().cwiseProduct(phi_nodes));

    gap.density = std::abs(micro_density - macro_density);
    gap.current = std::abs(micro_q - macro_q);
    gap.creation = std::abs(micro_k - macro_k);
    out.push_back(gap);
  }
  return out;
}

namespace {

using nlohmann::json;

TrajectoryGrid input_trajectory(const ExperimentConfig& c, std::ostream& log) {
  if (!c.input_fields.empty()) {
    log << "reading trajectory from " << c.input_fields << "\n";
    return read_fields_csv(c.input_fields).traj;
  }
  log << "solving the hydrodynamic equation for the input trajectory\n";
  return solve_hydro(hydro_setup(c));
}

int mode_simulate(const ExperimentConfig& c, const std::filesystem::path& out, std::ostream& log) {
  const SimParams p = sim_params(c);
  const auto runs = run_replicas(p, c.replicas, default_threads());
  std::uint64_t events = 0;
  double final_density = 0.0;
  for (const RunResult& r : runs) {
    events += r.event_count;
    for (const LatticeState& s : r.snapshots) require_conserved(s);
    if (!r.snapshots.empty())
      final_density += pair_site_measure(r.snapshots.back(), SiteMeasure::density, [](double) { return 0.5; });
  }
  write_simulation_csv(out, runs, p.n, p.sample_times);
  if (p.record_events && runs.front().log) {
    std::ofstream bin(out / "events.bin", std::ios::binary | std::ios::trunc);
    if (!bin) throw IoError("cannot open " + (out / "events.bin").string());
    write_event_records(bin, runs.front().log->events);
  }
  json s;
  s["mode"] = "simulate";
  s["replicas"] = c.replicas;
  s["events"] = events;
  s["bookkeeping_exact"] = true;
  s["mean_final_density"] = runs.front().snapshots.empty() ? json(nullptr) : json(final_density / c.replicas);
  write_json(out / "summary.json", s);
  log << "simulated " << c.replicas << " replicas, " << events << " events\n";
  return 0;
}

int mode_hydro(const ExperimentConfig& c, const std::filesystem::path& out, std::ostream& log) {
  const HydroSetup setup = hydro_setup(c);
  const TrajectoryGrid traj = solve_hydro(setup);
  write_fields_csv(out / "fields.csv", traj, setup.g ? &*setup.g : nullptr, setup.h ? &*setup.h : nullptr);
  json s;
  s["mode"] = "hydro";
  s["nx"] = traj.grid.nx;
  s["nt"] = traj.grid.nt;
  s["max_abs_rho_minus_half"] = (traj.rho.array() - 0.5).abs().maxCoeff();
  s["min_rho"] = traj.rho.minCoeff();
  s["max_rho"] = traj.rho.maxCoeff();
  s["energy"] = energy(traj);
  s["conservation_residual"] = conservation_residual(traj, sine_basis());
  write_json(out / "summary.json", s);
  log << "solved on " << traj.grid.nx << " x " << traj.grid.nt << " grid\n";
  return 0;
}

json breakdown_json(const RateBreakdown& b) {
  json s;
  s["i0"] = json_real(b.i0);
  s["i1"] = json_real(b.i1);
  s["i2"] = json_real(b.i2);
  s["h_gamma"] = json_real(b.h_gamma);
  s["total"] = json_real(b.total);
  s["energy"] = json_real(b.energy);
  s["conservation_residual"] = json_real(b.conservation_residual);
  s["feasible"] = b.feasible;
  return s;
}

int mode_rate_eval(const ExperimentConfig& c, const std::filesystem::path& out, std::ostream& log) {
  const TrajectoryGrid traj = input_trajectory(c, log);
  const CylinderRate rate = c.build_rate();
  const RateBreakdown b = evaluate_I0_explicit(traj, rate, parse_profile(c.initial));
  json s = breakdown_json(b);
  s["mode"] = "rate-eval";
  if (b.feasible) {
    const Drifts d = recover_drifts(traj, rate);
    s["j_at_recovered_drifts"] = json_real(evaluate_J_GH(traj, d.g, d.h, rate));
    write_fields_csv(out / "fields.csv", traj, &d.g, &d.h);
  } else {
    write_fields_csv(out / "fields.csv", traj);
  }
  write_json(out / "summary.json", s);
  log << "I0 = " << b.i0 << ", total = " << b.total << (b.feasible ? "" : " (infeasible)") << "\n";
  return 0;
}

int mode_contract(const ExperimentConfig& c, const std::filesystem::path& out, std::ostream& log) {
  const TrajectoryGrid traj = input_trajectory(c, log);
  const CylinderRate rate = c.build_rate();
  const DensityRate dr = density_rate(traj, parse_profile(c.initial), rate);
  const ContractionResult& r = dr.result;
  const AuditReport audit = suboptimality_audit(traj, rate, r, c.audits, c.seed);
  write_fields_csv(out / "fields.csv", r.currents, &r.h_opt, &r.h_opt);
  json s;
  s["mode"] = "contract";
  s["f_rho"] = json_real(r.f_rho);
  s["h_gamma"] = json_real(dr.h_gamma);
  s["f"] = json_real(dr.f);
  s["newton_iters_max"] = *std::max_element(r.newton_iters.begin(), r.newton_iters.end());
  int total = 0;
  for (int it : r.newton_iters) total += it;
  s["newton_iters_total"] = total;
  s["residual"] = r.residual;
  s["damping_events"] = r.damping_events;
  s["audit_samples"] = audit.samples;
  s["audit_passed"] = audit.passed;
  s["audit_excluded"] = audit.excluded;
  s["audit_min_gap"] = json_real(audit.min_gap);
  write_json(out / "summary.json", s);
  log << "F = " << dr.f << ", audits " << audit.passed << "/" << audit.samples << "\n";
  return audit.passed == audit.samples ? 0 : 1;
}

int mode_oracle(const ExperimentConfig& c, const std::filesystem::path& out, std::ostream& log) {
  const SimParams p = sim_params(c);
  json s;
  s["mode"] = "oracle";
  s["moment"] = exact_tilted_moment(p);
  if (c.replicas > 1) {
    SimParams base = p;
    base.tilt = Tilt::none();
    base.record_events = true;
    base.sample_times.clear();
    const auto runs = run_replicas(base, c.replicas, default_threads());
    double sum = 0.0, sum2 = 0.0;
    for (const RunResult& r : runs) {
      const double w = std::exp(log_radon_nikodym(*r.log, p));
      sum += w;
      sum2 += w * w;
    }
    const double mean = sum / c.replicas;
    s["mc_mean"] = mean;
    s["mc_standard_error"] = std::sqrt(std::max(0.0, sum2 / c.replicas - mean * mean) / (c.replicas - 1));
  }
  write_json(out / "summary.json", s);
  log << "moment = " << format_real(s["moment"].get<double>()) << "\n";
  return 0;
}

int mode_validate(const std::filesystem::path& out, std::ostream& log) {
  const auto results = run_acceptance({}, log, default_threads());
  json s;
  s["mode"] = "validate";
  json list = json::array();
  bool all = true;
  for (const auto& r : results) {
    all = all && r.passed;
    list.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
  }
  s["criteria"] = list;
  s["all_passed"] = all;
  write_json(out / "summary.json", s);
  return all ? 0 : 1;
}

}  // namespace

int run_experiment(const ExperimentConfig& config, const std::filesystem::path& out, std::ostream& log) {
  static const std::vector<std::string> modes{"simulate", "hydro", "rate-eval", "contract", "oracle", "validate"};
  if (std::find(modes.begin(), modes.end(), config.mode) == modes.end())
    throw ConfigError("unknown mode '" + config.mode + "'");
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());
  write_json(out / "manifest.json", manifest_json(config));

  if (config.mode == "simulate") return mode_simulate(config, out, log);
  if (config.mode == "hydro") return mode_hydro(config, out, log);
  if (config.mode == "rate-eval") return mode_rate_eval(config, out, log);
  if (config.mode == "contract") return mode_contract(config, out, log);
  if (config.mode == "oracle") return mode_oracle(config, out, log);
  return mode_validate(out, log);
}

}  // namespace fluctlat
