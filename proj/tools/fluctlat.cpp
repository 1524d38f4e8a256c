#include <iostream>

#include "CLI11.hpp"
#include "fluctlat/config.hpp"
#include "fluctlat/errors.hpp"
#include "fluctlat/experiment.hpp"

namespace {

constexpr int kUsage = 2;
constexpr int kFailure = 1;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and rate-functional toolkit for exclusion processes with reaction and reservoirs"};
  std::string mode, config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> replicas;
  app.add_option("mode", mode, "simulate | hydro | rate-eval | contract | oracle | validate")
      ->required()
      ->check(CLI::IsMember({"simulate", "hydro", "rate-eval", "contract", "oracle", "validate"}));
  app.add_option("--config", config_path, "key=value configuration file");
  app.add_option("--out", out_dir, "output directory")->required();
  app.add_option("--seed", seed, "override the configured seed");
  app.add_option("--replicas", replicas, "override the configured replica count");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    fluctlat::KeyValues kv;
    if (!config_path.empty()) kv = fluctlat::load_key_values(config_path);
    if (kv.count("mode") && kv["mode"] != mode)
      throw fluctlat::ConfigError("config file mode '" + kv["mode"] + "' differs from command line '" + mode + "'");
    kv["mode"] = mode;
    if (seed) kv["seed"] = std::to_string(*seed);
    if (replicas) kv["replicas"] = std::to_string(*replicas);
    const auto config = fluctlat::ExperimentConfig::from_key_values(kv);
    return fluctlat::run_experiment(config, out_dir, std::cerr);
  } catch (const fluctlat::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const fluctlat::ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kUsage;
  } catch (const fluctlat::ShapeError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kUsage;
  } catch (const fluctlat::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}
