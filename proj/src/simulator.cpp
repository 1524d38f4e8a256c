#include "fluctlat/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <thread>

#include "fluctlat/expm.hpp"
#include "fluctlat/rate_tree.hpp"

namespace fluctlat {

// ---------------------------------------------------------------------------
// RateTree

RateTree::RateTree(std::size_t channels) : channels_(channels) {
  leaves_ = 1;
  while (leaves_ < std::max<std::size_t>(channels, 1)) leaves_ <<= 1;
  nodes_.assign(2 * leaves_, 0.0);
}

void RateTree::set(std::size_t channel, double rate) {
  std::size_t i = leaves_ + channel;
  nodes_[i] = rate;
  for (i >>= 1; i >= 1; i >>= 1) nodes_[i] = nodes_[2 * i] + nodes_[2 * i + 1];
}

std::size_t RateTree::find(double target) const {
  std::size_t i = 1;
  while (i < leaves_) {
    const double left = nodes_[2 * i];
    if (target < left) {
      i = 2 * i;
    } else {
      target -= left;
      i = 2 * i + 1;
    }
  }
  std::size_t ch = i - leaves_;
  // Round-off can land on an empty leaf when target is within an ulp of a
  // partial sum; step back to the nearest live channel.
  if (ch >= channels_ || nodes_[i] <= 0.0) {
    std::size_t j = std::min(ch, channels_ - 1);
    while (j > 0 && nodes_[leaves_ + j] <= 0.0) --j;
    if (nodes_[leaves_ + j] <= 0.0)
      for (j = 0; j < channels_ && nodes_[leaves_ + j] <= 0.0; ++j) {
      }
    ch = j;
  }
  return ch;
}

// ---------------------------------------------------------------------------
// Tilt

Tilt Tilt::stationary(Profile g, Profile h) {
  Tilt tilt;
  if (g) tilt.g = [g = std::move(g)](double, double x) { return g(x); };
  if (h) tilt.h = [h = std::move(h)](double, double x) { return h(x); };
  return tilt;
}

Tilt Tilt::from_fields(std::optional<FieldGrid> g, std::optional<FieldGrid> h) {
  Tilt tilt;
  bool varying = false;
  if (g) {
    varying |= g->grid.nt > 0;
    tilt.g = [f = std::move(*g)](double t, double x) { return f.at(t, x); };
  }
  if (h) {
    varying |= h->grid.nt > 0;
    tilt.h = [f = std::move(*h)](double t, double x) { return f.at(t, x); };
  }
  tilt.time_dependent = varying;
  return tilt;
}

void SimParams::validate() const {
  if (n < 1) throw ConfigError("lattice scale N must be positive");
  if (n < rate.range() + 1) throw ConfigError("lattice scale N must be at least M+1");
  if (!(T > 0.0)) throw ConfigError("final time T must be positive");
  if (!(beta_plus >= 0.0) || !(beta_minus >= 0.0))
    throw ConfigError("reservoir intensities must be nonnegative");
  if (!initial) throw ConfigError("initial profile missing");
  if (!std::is_sorted(sample_times.begin(), sample_times.end()))
    throw ConfigError("sample times must be sorted");
  for (double s : sample_times)
    if (s < 0.0 || s > T) throw ConfigError("sample time outside [0,T]");
  if (tilt.time_dependent && !(effective_substep() > 0.0))
    throw ConfigError("tilt substep must be positive");
}

double RateCatalogue::total() const {
  double s = boundary_minus + boundary_plus;
  for (double r : bond) s += r;
  for (double r : bulk) s += r;
  return s;
}

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1p-53; }
double uniform_open0(std::mt19937_64& rng) {
  return static_cast<double>((rng() >> 11) + 1) * 0x1p-53;
}

/// Tilt values at the lattice points x/N, frozen at one time.
struct TiltCache {
  std::vector<double> g;
  std::vector<double> h;
};

TiltCache freeze_tilt(const SimParams& p, double t) {
  TiltCache c;
  const int sites = 2 * p.n + 1;
  c.g.assign(sites, 0.0);
  c.h.assign(sites, 0.0);
  for (int i = 0; i < sites; ++i) {
    const double x = static_cast<double>(i - p.n) / p.n;
    if (p.tilt.g) c.g[i] = p.tilt.g(t, x);
    if (p.tilt.h) c.h[i] = p.tilt.h(t, x);
    if (!std::isfinite(c.g[i]) || !std::isfinite(c.h[i]))
      throw DomainError("tilt field is not finite");
  }
  return c;
}

std::uint32_t window_at(const LatticeState& s, int i, int m) {
  std::uint32_t w = 0;
  for (int y = -m; y <= m; ++y) w = (w << 1) | s.eta[i + y];
  return w;
}

bool in_glauber_window(int x, int n, int m) { return std::abs(x) <= n - m - 1; }

double untilted_rate(const LatticeState& s, const SimParams& p, int ch) {
  const ChannelLayout lay{p.n};
  const double speed = 0.5 * static_cast<double>(p.n) * p.n;
  if (lay.is_bond(ch)) {
    const int i = ch;
    return s.eta[i] != s.eta[i + 1] ? speed : 0.0;
  }
  const int x = lay.flip_site(ch);
  const int i = x + p.n;
  if (x == p.n) return speed * (s.eta[i] ? 1.0 : p.beta_plus);
  if (x == -p.n) return speed * (s.eta[i] ? 1.0 : p.beta_minus);
  if (!in_glauber_window(x, p.n, p.rate.range())) return 0.0;
  return p.rate(window_at(s, i, p.rate.range()));
}

/// log(tilted rate / untilted rate) of a channel; reservoirs are not tilted.
double log_tilt(const LatticeState& s, const SimParams& p, const TiltCache& c, int ch) {
  const ChannelLayout lay{p.n};
  if (lay.is_bond(ch)) {
    const int i = ch;
    return (static_cast<int>(s.eta[i]) - static_cast<int>(s.eta[i + 1])) * (c.h[i + 1] - c.h[i]);
  }
  const int x = lay.flip_site(ch);
  if (std::abs(x) == p.n) return 0.0;
  const int i = x + p.n;
  return s.eta[i] ? -c.g[i] : c.g[i];
}

/// Fires a channel and returns the event direction.
int apply_event(LatticeState& s, int ch) {
  const ChannelLayout lay{s.n};
  if (lay.is_bond(ch)) {
    const int i = ch;
    const int dir = s.eta[i] ? 1 : -1;
    std::swap(s.eta[i], s.eta[i + 1]);
    s.q[i] += dir;
    return dir;
  }
  const int i = ch - 2 * s.n;
  s.eta[i] ^= 1u;
  const int dir = s.eta[i] ? 1 : -1;
  if (i == 0)
    s.r_minus += dir;
  else if (i == 2 * s.n)
    s.r_plus += dir;
  else
    s.k[i] += dir;
  return dir;
}

/// Channels whose rate may change when `ch` fires.
template <typename F>
void for_each_affected(const SimParams& p, int ch, F&& f) {
  const ChannelLayout lay{p.n};
  const int m = p.rate.range();
  const int sites = 2 * p.n + 1;
  int lo, hi;
  if (lay.is_bond(ch)) {
    lo = ch;
    hi = ch + 1;
  } else {
    lo = hi = ch - 2 * p.n;
  }
  for (int b = lo - 1; b <= hi; ++b)
    if (b >= 0 && b < lay.bonds()) f(b);
  for (int i = std::max(0, lo - m); i <= std::min(sites - 1, hi + m); ++i) f(2 * p.n + i);
}

/// Rate trees over the untilted and/or tilted dynamics of one state.
class Engine {
public:
  Engine(const SimParams& p, LatticeState& s, bool untilted, bool tilted)
      : p_(p), s_(s), track_{untilted, tilted} {
    const int channels = ChannelLayout{p.n}.channels();
    for (int k = 0; k < 2; ++k)
      if (track_[k]) trees_[k] = RateTree(channels);
    if (tilted) cache_ = freeze_tilt(p, 0.0);
    for (int ch = 0; ch < channels; ++ch) refresh(ch);
  }

  void freeze(double t) {
    if (!track_[1]) return;
    cache_ = freeze_tilt(p_, t);
    const int channels = ChannelLayout{p_.n}.channels();
    for (int ch = 0; ch < channels; ++ch) refresh(ch);
  }

  const RateTree& tree(bool tilted) const { return trees_[tilted ? 1 : 0]; }
  double log_weight(int ch) const { return log_tilt(s_, p_, cache_, ch); }

  int fire(int ch) {
    const int dir = apply_event(s_, ch);
    for_each_affected(p_, ch, [this](int c) { refresh(c); });
    return dir;
  }

private:
  void refresh(int ch) {
    const double base = untilted_rate(s_, p_, ch);
    if (track_[0]) trees_[0].set(ch, base);
    if (track_[1]) trees_[1].set(ch, base > 0.0 ? base * std::exp(log_tilt(s_, p_, cache_, ch)) : 0.0);
  }

  const SimParams& p_;
  LatticeState& s_;
  bool track_[2];
  RateTree trees_[2];
  TiltCache cache_;
};

LatticeState empty_state(int n) {
  LatticeState s;
  s.n = n;
  s.eta.assign(2 * n + 1, 0);
  s.q.assign(2 * n, 0);
  s.k.assign(2 * n + 1, 0);
  return s;
}

LatticeState draw_initial(const SimParams& p, std::mt19937_64& rng) {
  LatticeState s = empty_state(p.n);
  for (int i = 0; i < s.sites(); ++i) {
    const double gamma = p.initial(static_cast<double>(i - p.n) / p.n);
    if (!(gamma >= 0.0 && gamma <= 1.0))
      throw ValidationError("initial profile must take values in [0,1]");
    s.eta[i] = uniform01(rng) < gamma ? 1 : 0;
  }
  s.eta0 = s.eta;
  return s;
}

}  // namespace

RateCatalogue jump_rates(const LatticeState& state, const SimParams& params, double t) {
  const ChannelLayout lay{params.n};
  const bool tilted = params.tilt.active();
  const TiltCache cache = tilted ? freeze_tilt(params, t) : TiltCache{};
  auto rate = [&](int ch) {
    const double base = untilted_rate(state, params, ch);
    return (tilted && base > 0.0) ? base * std::exp(log_tilt(state, params, cache, ch)) : base;
  };
  RateCatalogue out;
  out.bond.resize(lay.bonds());
  for (int b = 0; b < lay.bonds(); ++b) out.bond[b] = rate(b);
  out.bulk.assign(state.sites(), 0.0);
  for (int x = -params.n + 1; x <= params.n - 1; ++x) out.bulk[x + params.n] = rate(lay.site_channel(x));
  out.boundary_minus = rate(lay.site_channel(-params.n));
  out.boundary_plus = rate(lay.site_channel(params.n));
  return out;
}

LatticeState sample_initial(const SimParams& params) {
  params.validate();
  std::mt19937_64 rng(params.seed);
  return draw_initial(params, rng);
}

RunResult run(const SimParams& p) {
  p.validate();
  std::mt19937_64 rng(p.seed);
  LatticeState state = draw_initial(p, rng);
  const bool tilted = p.tilt.active();
  Engine engine(p, state, !tilted, tilted);
  const RateTree& tree = engine.tree(tilted);

  RunResult result;
  if (p.record_events) {
    result.log.emplace();
    result.log->n = p.n;
    result.log->T = p.T;
    result.log->initial = state.eta;
  }

  const bool stepped = tilted && p.tilt.time_dependent;
  const double substep = p.effective_substep();
  long freeze_index = 1;
  double next_freeze = stepped ? substep : std::numeric_limits<double>::infinity();

  std::size_t next_sample = 0;
  auto emit_until = [&](double limit, bool inclusive) {
    while (next_sample < p.sample_times.size() &&
           (p.sample_times[next_sample] < limit ||
            (inclusive && p.sample_times[next_sample] <= limit))) {
      result.snapshots.push_back(state);
      result.snapshots.back().t = p.sample_times[next_sample];
      ++next_sample;
    }
  };

  double t = 0.0;
  for (;;) {
    const double total = tree.total();
    const double t_event =
        total > 0.0 ? t - std::log(uniform_open0(rng)) / total : std::numeric_limits<double>::infinity();
    const double horizon = std::min(next_freeze, p.T);
    if (t_event > horizon) {
      emit_until(horizon, true);
      if (horizon >= p.T) break;
      t = horizon;
      engine.freeze(t);
      next_freeze = static_cast<double>(++freeze_index) * substep;
      continue;
    }
    emit_until(t_event, false);
    t = t_event;
    state.t = t;
    const int ch = static_cast<int>(tree.find(uniform01(rng) * total));
    const int dir = engine.fire(ch);
    ++result.event_count;
    if (result.log) {
      if (result.log->events.size() < p.event_cap)
        result.log->events.push_back({t, ch, static_cast<std::int8_t>(dir)});
      else
        result.log->truncated = true;
    }
  }
  emit_until(p.T, true);
  state.t = p.T;
  return result;
}

std::vector<RunResult> run_replicas(const SimParams& params, int count, int threads) {
  params.validate();
  std::vector<RunResult> out(std::max(count, 0));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < count; r = next++) {
      SimParams local = params;
      local.seed = params.seed ^ static_cast<std::uint64_t>(r);
      out[r] = run(local);
    }
  };
  const int workers = std::clamp(threads, 1, std::max(count, 1));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  return out;
}

double log_radon_nikodym(const EventLog& log, const SimParams& p, const Profile& omega) {
  p.validate();
  if (log.n != p.n) throw ConsistencyError("event log lattice size does not match parameters");
  if (log.T != p.T) throw ConsistencyError("event log horizon does not match parameters");
  if (log.truncated) throw ConsistencyError("event log was truncated");
  if (static_cast<int>(log.initial.size()) != 2 * p.n + 1)
    throw ConsistencyError("event log initial configuration has wrong size");

  LatticeState state = empty_state(p.n);
  state.eta = log.initial;
  state.eta0 = log.initial;

  double value = 0.0;
  if (omega) {
    for (int i = 0; i < state.sites(); ++i) {
      const double x = static_cast<double>(i - p.n) / p.n;
      const double g = p.initial(x), w = omega(x);
      if (g == w) continue;
      const bool occupied = state.eta[i] != 0;
      if ((occupied && g == 0.0) || (!occupied && g == 1.0))
        throw ConsistencyError("initial configuration impossible under the reference profile");
      value += occupied ? std::log(w / g) : std::log((1.0 - w) / (1.0 - g));
    }
  }
  if (!p.tilt.active()) return value;

  Engine engine(p, state, true, true);
  const bool stepped = p.tilt.time_dependent;
  const double substep = p.effective_substep();
  long freeze_index = 1;
  double next_freeze = stepped ? substep : std::numeric_limits<double>::infinity();
  const int channels = ChannelLayout{p.n}.channels();

  double t = 0.0;
  auto integrate_to = [&](double target) {
    while (next_freeze <= target) {
      value -= (next_freeze - t) * (engine.tree(true).total() - engine.tree(false).total());
      t = next_freeze;
      engine.freeze(t);
      next_freeze = static_cast<double>(++freeze_index) * substep;
    }
    value -= (target - t) * (engine.tree(true).total() - engine.tree(false).total());
    t = target;
  };

  for (const EventRecord& e : log.events) {
    if (!(e.time >= t) || e.time > p.T) throw ConsistencyError("event times must be sorted in [0,T]");
    if (e.channel < 0 || e.channel >= channels) throw ConsistencyError("event channel out of range");
    integrate_to(e.time);
    if (engine.tree(false).rate(e.channel) <= 0.0)
      throw ConsistencyError("event fired on a channel with zero rate");
    value += engine.log_weight(e.channel);
    if (engine.fire(e.channel) != e.direction)
      throw ConsistencyError("event direction disagrees with the configuration");
  }
  integrate_to(p.T);
  return value;
}

double exact_tilted_moment(const SimParams& p, const Profile& omega) {
  p.validate();
  const int sites = 2 * p.n + 1;
  if (sites > 9) throw CapacityError("exact moment limited to N <= 4 (512 states)");
  if (p.tilt.time_dependent) throw ConfigError("exact moment requires a time-independent tilt");

  const int states = 1 << sites;
  const int channels = ChannelLayout{p.n}.channels();
  TiltCache cache{std::vector<double>(sites, 0.0), std::vector<double>(sites, 0.0)};
  if (p.tilt.active()) cache = freeze_tilt(p, 0.0);

  Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(states, states);
  Eigen::VectorXd initial(states);
  LatticeState s = empty_state(p.n);
  for (int code = 0; code < states; ++code) {
    // nu_gamma reweighted by d nu_omega / d nu_gamma is nu_omega itself.
    double weight = 1.0;
    for (int i = 0; i < sites; ++i) {
      s.eta[i] = (code >> i) & 1;
      const double x = static_cast<double>(i - p.n) / p.n;
      const double w = omega ? omega(x) : p.initial(x);
      weight *= s.eta[i] ? w : 1.0 - w;
    }
    initial(code) = weight;
    for (int ch = 0; ch < channels; ++ch) {
      const double base = untilted_rate(s, p, ch);
      if (base <= 0.0) continue;
      const double ratio = std::exp(log_tilt(s, p, cache, ch));
      LatticeState next = s;
      apply_event(next, ch);
      int target = 0;
      for (int i = 0; i < sites; ++i) target |= next.eta[i] << i;
      // Feynman-Kac weight exp(log ratio) on the jump, compensator on the diagonal.
      gen(code, target) += base * ratio;
      gen(code, code) -= base + (base * ratio - base);
    }
  }
  const Eigen::MatrixXd semigroup = expm(p.T * gen);
  return initial.dot(semigroup * Eigen::VectorXd::Ones(states));
}

void write_event_records(std::ostream& out, const std::vector<EventRecord>& events) {
  static_assert(std::endian::native == std::endian::little, "event log assumes little-endian host");
  for (const EventRecord& e : events) {
    out.write(reinterpret_cast<const char*>(&e.time), sizeof(double));
    out.write(reinterpret_cast<const char*>(&e.channel), sizeof(std::int32_t));
    out.write(reinterpret_cast<const char*>(&e.direction), sizeof(std::int8_t));
  }
}

std::vector<EventRecord> read_event_records(std::istream& in) {
  std::vector<EventRecord> events;
  for (;;) {
    EventRecord e{};
    if (!in.read(reinterpret_cast<char*>(&e.time), sizeof(double))) {
      if (in.gcount() != 0) throw ConsistencyError("truncated event record");
      break;
    }
    if (!in.read(reinterpret_cast<char*>(&e.channel), sizeof(std::int32_t)) ||
        !in.read(reinterpret_cast<char*>(&e.direction), sizeof(std::int8_t)))
      throw ConsistencyError("truncated event record");
    events.push_back(e);
  }
  return events;
}

}  // namespace fluctlat
