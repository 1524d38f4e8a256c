#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "fluctlat/grid.hpp"
#include "fluctlat/rates.hpp"

namespace fluctlat {

/// Bond drift H and reaction bias G of the tilted dynamics.
struct Tilt {
  SpaceTimeFunction g;
  SpaceTimeFunction h;
  bool time_dependent = false;

  bool active() const { return static_cast<bool>(g) || static_cast<bool>(h); }

  static Tilt none() { return {}; }
  static Tilt stationary(Profile g, Profile h);
  /// Bilinear interpolation of gridded fields; either may be empty.
  static Tilt from_fields(std::optional<FieldGrid> g, std::optional<FieldGrid> h);
};

struct SimParams {
  int n = 32;
  double T = 1.0;
  double beta_plus = 1.0;
  double beta_minus = 1.0;
  CylinderRate rate = build_cylinder_rate("constant");
  Profile initial = [](double) { return 0.5; };
  Tilt tilt;
  std::uint64_t seed = 0;
  std::vector<double> sample_times;
  /// Freezing interval for time-dependent tilts; 0 selects T/1000.
  double tilt_substep = 0.0;
  bool record_events = false;
  std::size_t event_cap = 100'000'000;

  void validate() const;
  double effective_substep() const { return tilt_substep > 0.0 ? tilt_substep : T / 1000.0; }
};

/// Microscopic configuration on -N..N with its current counters.
struct LatticeState {
  int n = 0;
  double t = 0.0;
  std::vector<std::uint8_t> eta;   ///< site x at index x + n
  std::vector<std::uint8_t> eta0;  ///< configuration at t = 0
  std::vector<std::int64_t> q;     ///< bond (x, x+1) at index x + n; net left-to-right transfers
  std::vector<std::int64_t> k;     ///< net bulk creations per site
  std::int64_t r_plus = 0;         ///< net reservoir injections at +N
  std::int64_t r_minus = 0;        ///< net reservoir injections at -N

  int sites() const { return 2 * n + 1; }
  int occupancy(int x) const { return eta[x + n]; }
  std::int64_t bond_current(int x) const { return q[x + n]; }
  std::int64_t creation(int x) const { return k[x + n]; }
};

/// Channel layout: bonds 0..2N-1 (bond x,x+1 at x+N), then one flip channel per
/// site at 2N + (x+N); the flips at +-N are the reservoirs.
struct ChannelLayout {
  int n;
  int bonds() const { return 2 * n; }
  int channels() const { return 4 * n + 1; }
  int bond_channel(int x) const { return x + n; }
  int site_channel(int x) const { return 2 * n + x + n; }
  bool is_bond(int ch) const { return ch < 2 * n; }
  int bond_left_site(int ch) const { return ch - n; }
  int flip_site(int ch) const { return ch - 3 * n; }
};

/// Instantaneous rates of every elementary move.
struct RateCatalogue {
  std::vector<double> bond;      ///< 2N entries
  std::vector<double> bulk;      ///< 2N+1 entries, zero outside the Glauber window
  double boundary_minus = 0.0;
  double boundary_plus = 0.0;

  double total() const;
};

/// Rates at time t; the tilt is applied when params.tilt is active.
RateCatalogue jump_rates(const LatticeState& state, const SimParams& params, double t = 0.0);

struct EventRecord {
  double time;
  std::int32_t channel;
  std::int8_t direction;  ///< +1: particle moved right / was created; -1 otherwise

  bool operator==(const EventRecord&) const = default;
};

struct EventLog {
  int n = 0;
  double T = 0.0;
  std::vector<std::uint8_t> initial;
  std::vector<EventRecord> events;
  bool truncated = false;
};

struct RunResult {
  std::vector<LatticeState> snapshots;
  std::optional<EventLog> log;
  std::uint64_t event_count = 0;
};

/// Independent Bernoulli(gamma(x/N)) occupancies with zeroed counters, drawn
/// from the same stream run() uses for params.seed.
LatticeState sample_initial(const SimParams& params);

/// Exact continuous-time simulation; snapshots at params.sample_times.
RunResult run(const SimParams& params);

/// Runs replicas r = 0..count-1 with seeds params.seed ^ r on up to `threads` workers.
std::vector<RunResult> run_replicas(const SimParams& params, int count, int threads = 1);

/// log dP_{omega,G,H} / dP_gamma along a path of the untilted dynamics.
double log_radon_nikodym(const EventLog& log, const SimParams& tilted,
                         const Profile& omega = {});

/// E[dP_{G,H}/dP] from the Feynman-Kac matrix exponential on the full state space.
double exact_tilted_moment(const SimParams& tilted, const Profile& omega = {});

/// Packed little-endian records: f64 time, i32 channel, i8 direction.
void write_event_records(std::ostream& out, const std::vector<EventRecord>& events);
std::vector<EventRecord> read_event_records(std::istream& in);

}  // namespace fluctlat
