#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fluctlat/grid.hpp"
#include "fluctlat/rates.hpp"

namespace fluctlat {

/// Flat key=value settings with dotted keys. Blank lines and lines starting
/// with '#' are ignored.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(const std::string& text);
KeyValues load_key_values(const std::filesystem::path& path);

/// Profiles written as "const:v", "linear:left,right", "bump:base,amp",
/// "sine:base,amp,k" (base + amp sin(k pi (x+1)/2)) or "table:v0,v1,..."
/// (piecewise linear on equally spaced nodes of [-1,1]).
Profile parse_profile(const std::string& text);

struct ExperimentConfig {
  std::string mode;
  int n = 32;
  double T = 1.0;
  double beta_plus = 1.0;
  double beta_minus = 1.0;
  std::string initial = "const:0.5";
  int samples = 11;
  double substep = 0.0;
  bool record_events = false;
  std::string rate = "constant";
  int rate_range = 0;
  std::vector<double> rate_table;
  int nx = 64;
  int nt = 0;
  std::string tilt_g;     ///< profile string; empty for none
  std::string tilt_h;
  std::string tilt_file;  ///< fields.csv whose g and h columns give a gridded tilt
  std::string input_fields;
  int audits = 20;
  int replicas = 1;
  std::uint64_t seed = 0;

  static ExperimentConfig from_key_values(const KeyValues& kv);
  /// Every setting, defaults included; from_key_values(to_key_values()) is a fixpoint.
  KeyValues to_key_values() const;

  CylinderRate build_rate() const;
};

}  // namespace fluctlat
