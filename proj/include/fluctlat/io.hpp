#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fluctlat/config.hpp"
#include "fluctlat/simulator.hpp"

namespace fluctlat {

/// Decimal with 17 significant digits, which round-trips every double.
std::string format_real(double v);

/// Header row and '\n' line endings; every value goes through format_real.
class CsvWriter {
public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(std::initializer_list<double> values);
  void close();

private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t columns_;
};

/// rho.csv, q.csv and k.csv with columns run_count,t,x,value: replica means
/// of eta(x), Q(x)/N at the bond midpoint (x+1/2)/N, and K(x).
void write_simulation_csv(const std::filesystem::path& dir, const std::vector<RunResult>& runs, int n,
                          const std::vector<double>& sample_times);

/// fields.csv with columns t,x,rho,qdot,kdot,g,h; absent drifts are written as 0.
void write_fields_csv(const std::filesystem::path& path, const TrajectoryGrid& traj,
                      const FieldGrid* g = nullptr, const FieldGrid* h = nullptr);

struct FieldsTable {
  TrajectoryGrid traj;  ///< q and k rebuilt from qdot and kdot
  FieldGrid g;
  FieldGrid h;
};

FieldsTable read_fields_csv(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const nlohmann::json& value);
nlohmann::json read_json(const std::filesystem::path& path);

/// Infinite or NaN values become null.
nlohmann::json json_real(double v);

extern const char* const kToolVersion;

nlohmann::json manifest_json(const ExperimentConfig& config);
ExperimentConfig config_from_manifest(const nlohmann::json& manifest);

}  // namespace fluctlat
