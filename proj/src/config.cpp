#include "fluctlat/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fluctlat/errors.hpp"

namespace fluctlat {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  }
}

long long to_integer(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
  return out;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("'" + key + "' expects an unsigned integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_double(key, item));
  }
  return out;
}

std::string shortest(double v) {
  // Shortest representation that reads back to the same double.
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::stod(buf) == v) break;
  }
  return buf;
}

}  // namespace

KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (kv.count(key)) throw ConfigError("duplicate key '" + key + "'");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValues load_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str());
}

Profile parse_profile(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("profile '" + text + "' lacks a kind prefix");
  const std::string kind = text.substr(0, colon);
  const std::vector<double> a = to_list("profile", text.substr(colon + 1));
  auto need = [&](std::size_t count) {
    if (a.size() != count)
      throw ConfigError("profile kind '" + kind + "' takes " + std::to_string(count) + " values");
  };
  if (kind == "const") {
    need(1);
    return [v = a[0]](double) { return v; };
  }
  if (kind == "linear") {
    need(2);
    return [l = a[0], r = a[1]](double x) { return l + 0.5 * (x + 1.0) * (r - l); };
  }
  if (kind == "bump") {
    need(2);
    return [b = a[0], m = a[1]](double x) { return b + m * (1.0 - x * x); };
  }
  if (kind == "sine") {
    need(3);
    return [b = a[0], m = a[1], k = a[2]](double x) { return b + m * std::sin(k * M_PI * (x + 1.0) / 2.0); };
  }
  if (kind == "table") {
    if (a.size() < 2) throw ConfigError("table profile needs at least two values");
    return [a](double x) {
      const double f = std::clamp((x + 1.0) / 2.0, 0.0, 1.0) * static_cast<double>(a.size() - 1);
      const std::size_t i = std::min(static_cast<std::size_t>(f), a.size() - 2);
      const double w = f - static_cast<double>(i);
      return (1.0 - w) * a[i] + w * a[i + 1];
    };
  }
  throw ConfigError("unknown profile kind '" + kind + "'");
}

ExperimentConfig ExperimentConfig::from_key_values(const KeyValues& kv) {
  ExperimentConfig c;
  for (const auto& [key, v] : kv) {
    if (key == "mode") c.mode = v;
    else if (key == "sim.n") c.n = static_cast<int>(to_integer(key, v));
    else if (key == "sim.t") c.T = to_double(key, v);
    else if (key == "sim.beta_plus") c.beta_plus = to_double(key, v);
    else if (key == "sim.beta_minus") c.beta_minus = to_double(key, v);
    else if (key == "sim.initial") c.initial = v;
    else if (key == "sim.samples") c.samples = static_cast<int>(to_integer(key, v));
    else if (key == "sim.substep") c.substep = to_double(key, v);
    else if (key == "sim.record_events") c.record_events = to_bool(key, v);
    else if (key == "rate") c.rate = v;
    else if (key == "rate.range") c.rate_range = static_cast<int>(to_integer(key, v));
    else if (key == "rate.table") c.rate_table = to_list(key, v);
    else if (key == "grid.nx") c.nx = static_cast<int>(to_integer(key, v));
    else if (key == "grid.nt") c.nt = static_cast<int>(to_integer(key, v));
    else if (key == "tilt.g") c.tilt_g = v;
    else if (key == "tilt.h") c.tilt_h = v;
    else if (key == "tilt.file") c.tilt_file = v;
    else if (key == "input.fields") c.input_fields = v;
    else if (key == "audit.samples") c.audits = static_cast<int>(to_integer(key, v));
    else if (key == "replicas") c.replicas = static_cast<int>(to_integer(key, v));
    else if (key == "seed") c.seed = to_unsigned(key, v);
    else throw ConfigError("unknown config key '" + key + "'");
  }
  if (c.replicas < 1) throw ConfigError("replicas must be at least 1");
  if (c.samples < 0) throw ConfigError("sim.samples must be nonnegative");
  if (c.nx < 4) throw ConfigError("grid.nx must be at least 4");
  if (c.nt < 0) throw ConfigError("grid.nt must be nonnegative");
  if (!c.initial.empty()) parse_profile(c.initial);
  if (!c.tilt_g.empty()) parse_profile(c.tilt_g);
  if (!c.tilt_h.empty()) parse_profile(c.tilt_h);
  return c;
}

KeyValues ExperimentConfig::to_key_values() const {
  KeyValues kv;
  kv["mode"] = mode;
  kv["sim.n"] = std::to_string(n);
  kv["sim.t"] = shortest(T);
  kv["sim.beta_plus"] = shortest(beta_plus);
  kv["sim.beta_minus"] = shortest(beta_minus);
  kv["sim.initial"] = initial;
  kv["sim.samples"] = std::to_string(samples);
  kv["sim.substep"] = shortest(substep);
  kv["sim.record_events"] = record_events ? "true" : "false";
  kv["rate"] = rate;
  kv["rate.range"] = std::to_string(rate_range);
  std::string table;
  for (std::size_t i = 0; i < rate_table.size(); ++i) table += (i ? "," : "") + shortest(rate_table[i]);
  kv["rate.table"] = table;
  kv["grid.nx"] = std::to_string(nx);
  kv["grid.nt"] = std::to_string(nt);
  kv["tilt.g"] = tilt_g;
  kv["tilt.h"] = tilt_h;
  kv["tilt.file"] = tilt_file;
  kv["input.fields"] = input_fields;
  kv["audit.samples"] = std::to_string(audits);
  kv["replicas"] = std::to_string(replicas);
  kv["seed"] = std::to_string(seed);
  return kv;
}

CylinderRate ExperimentConfig::build_rate() const {
  try {
    if (rate == "custom") return build_cylinder_rate(rate, rate_range, rate_table);
    return build_cylinder_rate(rate, 0, rate_table);
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  } catch (const ShapeError& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace fluctlat
