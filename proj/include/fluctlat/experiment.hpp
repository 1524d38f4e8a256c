#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "fluctlat/config.hpp"
#include "fluctlat/hydro.hpp"
#include "fluctlat/simulator.hpp"

namespace fluctlat {

/// Replica concurrency: hardware threads, capped by FLUCTLAT_THREADS.
int default_threads();

std::vector<double> equally_spaced(double T, int count);

SimParams sim_params(const ExperimentConfig& config);
HydroSetup hydro_setup(const ExperimentConfig& config);

using TestFunction = std::pair<std::string, Profile>;

/// cos(pi x/2), 1 - x^2 and sin(pi x).
std::vector<TestFunction> default_test_functions();

struct MicroMacroGap {
  std::string name;
  double density = 0.0;   ///< |int <rho^N phi> dt - int <rho phi> dt|
  double current = 0.0;   ///< |<Q^N_T phi> - <Q_T phi>|
  double creation = 0.0;  ///< |<K^N_T phi> - <K_T phi>|
};

/// Replica means of the empirical pairings against the PDE trajectory. The
/// snapshots must sit at params.sample_times, which have to start at 0 and end
/// at T.
std::vector<MicroMacroGap> compare_micro_macro(const std::vector<RunResult>& runs, const SimParams& params,
                                               const TrajectoryGrid& pde,
                                               const std::vector<TestFunction>& tests);

/// Runs one mode and writes its artifacts plus manifest.json into `out`.
/// Returns the process exit status; errors propagate as exceptions.
int run_experiment(const ExperimentConfig& config, const std::filesystem::path& out, std::ostream& log);

}  // namespace fluctlat
