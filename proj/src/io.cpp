#include "fluctlat/io.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <sstream>

namespace fluctlat {

const char* const kToolVersion = "1.0.0";

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), columns_(header.size()) {
  if (!out_) throw IoError("cannot open " + path.string() + ": " + std::strerror(errno));
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::row(std::initializer_list<double> values) {
  std::size_t i = 0;
  for (double v : values) out_ << (i++ ? "," : "") << format_real(v);
  out_ << '\n';
}

void CsvWriter::close() {
  out_.close();
  if (!out_) throw IoError("write failed for " + path_.string());
}

void write_simulation_csv(const std::filesystem::path& dir, const std::vector<RunResult>& runs, int n,
                          const std::vector<double>& sample_times) {
  const std::vector<std::string> header{"run_count", "t", "x", "value"};
  CsvWriter rho(dir / "rho.csv", header), q(dir / "q.csv", header), k(dir / "k.csv", header);
  const double count = static_cast<double>(runs.size());
  if (!runs.empty()) {
    for (std::size_t m = 0; m < sample_times.size(); ++m) {
      const double t = sample_times[m];
      for (int x = -n; x <= n; ++x) {
        double eta = 0.0, kk = 0.0, qq = 0.0;
        for (const RunResult& r : runs) {
          const LatticeState& s = r.snapshots.at(m);
          eta += s.occupancy(x);
          kk += static_cast<double>(s.creation(x));
          if (x < n) qq += static_cast<double>(s.bond_current(x));
        }
        const double xs = static_cast<double>(x) / n;
        rho.row({count, t, xs, eta / count});
        k.row({count, t, xs, kk / count});
        if (x < n) q.row({count, t, (x + 0.5) / n, qq / count / n});
      }
    }
  }
  rho.close();
  q.close();
  k.close();
}

void write_fields_csv(const std::filesystem::path& path, const TrajectoryGrid& traj, const FieldGrid* g,
                      const FieldGrid* h) {
  CsvWriter out(path, {"t", "x", "rho", "qdot", "kdot", "g", "h"});
  const SpaceTimeGrid& grid = traj.grid;
  for (int n = 0; n <= grid.nt; ++n)
    for (int j = 0; j <= grid.nx; ++j)
      out.row({grid.t(n), grid.x(j), traj.rho(n, j), traj.qdot(n, j), traj.kdot(n, j),
               g ? g->values(n, j) : 0.0, h ? h->values(n, j) : 0.0});
  out.close();
}

FieldsTable read_fields_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,x,rho,qdot,kdot,g,h")
    throw ConfigError(path.string() + ": expected header t,x,rho,qdot,kdot,g,h");

  std::vector<std::array<double, 7>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::array<double, 7> r{};
    std::stringstream ss(line);
    std::string cell;
    for (int c = 0; c < 7; ++c) {
      if (!std::getline(ss, cell, ','))
        throw ConfigError(path.string() + ": line " + std::to_string(lineno) + " has too few columns");
      try {
        r[c] = std::stod(cell);
      } catch (const std::exception&) {
        throw ConfigError(path.string() + ": bad number on line " + std::to_string(lineno));
      }
    }
    rows.push_back(r);
  }
  // Rows come time-major; count nodes from the first time level.
  std::size_t nodes = 0;
  while (nodes < rows.size() && rows[nodes][0] == rows[0][0]) ++nodes;
  if (nodes < 5 || rows.size() % nodes != 0)
    throw ConfigError(path.string() + ": rows do not form a space-time grid");
  const int nx = static_cast<int>(nodes) - 1;
  const int nt = static_cast<int>(rows.size() / nodes) - 1;
  if (nt < 1) throw ConfigError(path.string() + ": at least two time levels are needed");

  FieldsTable out;
  const SpaceTimeGrid grid{nx, nt, rows.back()[0]};
  out.traj.grid = grid;
  out.traj.rho = Grid(nt + 1, nx + 1);
  out.traj.qdot = Grid(nt + 1, nx + 1);
  out.traj.kdot = Grid(nt + 1, nx + 1);
  out.g = FieldGrid::zeros(grid);
  out.h = FieldGrid::zeros(grid);
  for (int n = 0; n <= nt; ++n)
    for (int j = 0; j <= nx; ++j) {
      const auto& r = rows[static_cast<std::size_t>(n) * nodes + j];
      if (std::abs(r[1] - grid.x(j)) > 1e-9 || std::abs(r[0] - grid.t(n)) > 1e-9 * (1.0 + grid.T))
        throw GridMismatchError(path.string() + ": rows are not on a uniform grid over [-1,1]");
      out.traj.rho(n, j) = r[2];
      out.traj.qdot(n, j) = r[3];
      out.traj.kdot(n, j) = r[4];
      out.g.values(n, j) = r[5];
      out.h.values(n, j) = r[6];
    }
  out.traj.rho_minus = out.traj.rho(0, 0);
  out.traj.rho_plus = out.traj.rho(0, nx);
  out.traj.integrate_currents();
  return out;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& value) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + ": " + std::strerror(errno));
  out << value.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  return nlohmann::json::parse(in);
}

nlohmann::json json_real(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

nlohmann::json manifest_json(const ExperimentConfig& config) {
  nlohmann::json m;
  m["tool"] = "fluctlat";
  m["version"] = kToolVersion;
  m["mode"] = config.mode;
  m["seed"] = config.seed;
  nlohmann::json echo = nlohmann::json::object();
  for (const auto& [k, v] : config.to_key_values()) echo[k] = v;
  m["config"] = echo;
  return m;
}

ExperimentConfig config_from_manifest(const nlohmann::json& manifest) {
  KeyValues kv;
  for (const auto& [k, v] : manifest.at("config").items()) kv[k] = v.get<std::string>();
  return ExperimentConfig::from_key_values(kv);
}

}  // namespace fluctlat
