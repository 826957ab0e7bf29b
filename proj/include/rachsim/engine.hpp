#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <queue>
#include <stdexcept>
#include <span>
#include <utility>
#include <vector>

#include "rachsim/random.hpp"
#include "rachsim/scenario.hpp"
#include "rachsim/time.hpp"
#include "rachsim/topology.hpp"
#include "rachsim/traffic.hpp"

namespace rachsim {

using DeviceId = std::int32_t;

// ---------------------------------------------------------------------------
// Vocabulary
// ---------------------------------------------------------------------------

struct Transmission {
  int preamble = 0;
  DeviceId device = 0;
  DeviceClass cls = DeviceClass::urllc;
};

/// Contention state of one RA subframe at one gNB. Preambles [0, reserved)
/// form the reserved pool, [reserved, n_preambles) the contention pool.
struct RaOpportunity {
  Tick time = 0;
  int gnb = 0;
  int n_preambles = 54;
  int reserved = 0;
  std::vector<Transmission> tx;
};

enum class AttemptOutcome : std::uint8_t { collided, undetected, detected };

enum class EventKind : std::uint8_t {
  arrival,
  deferred,
  msg1,
  collided,
  undetected,
  rar_overflow,
  rar,
  msg3,
  msg4,
  connected,
  contention_timeout,
  backoff,
  failed,
};

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::arrival: return "arrival";
    case EventKind::deferred: return "deferred";
    case EventKind::msg1: return "msg1";
    case EventKind::collided: return "collided";
    case EventKind::undetected: return "undetected";
    case EventKind::rar_overflow: return "rar_overflow";
    case EventKind::rar: return "rar";
    case EventKind::msg3: return "msg3";
    case EventKind::msg4: return "msg4";
    case EventKind::connected: return "connected";
    case EventKind::contention_timeout: return "contention_timeout";
    case EventKind::backoff: return "backoff";
    case EventKind::failed: return "failed";
  }
  return "?";
}

struct TraceEvent {
  Tick time = 0;
  DeviceId device = 0;
  EventKind kind = EventKind::arrival;
  int preamble = -1;
  int gnb = -1;
  int attempt = 0;
};

/// Per-device outcome. For a successful device the delay components
/// (wait + msg1 + msg2 + msg3 + msg4) sum exactly to t_total().
struct AccessRecord {
  DeviceId device = 0;
  DeviceClass cls = DeviceClass::urllc;
  bool success = false;
  bool edt = false;
  int msg1_count = 0;
  int gnb = -1;  // gNB whose RAR completed the procedure
  Tick arrival = 0;
  Tick first_attempt = 0;
  Tick final_msg1 = 0;  // start of the last Msg-1
  Tick rar = 0;         // Msg-2 delivery of the final attempt (success only)
  Tick completion = 0;  // connection or failure time
  int msg3_tx = 0;
  int msg4_tx = 0;
  double tx_power_dbm = 0.0;  // last Msg-1, serving macro link
  double sinr_db = 0.0;

  Tick wait = 0;
  Tick t_msg1 = 0;
  Tick t_msg2 = 0;
  Tick t_msg3 = 0;
  Tick t_msg4 = 0;

  Tick t_total() const { return completion - arrival; }
};

struct DeviceSpec {
  DeviceId id = 0;
  DeviceClass cls = DeviceClass::urllc;
  Tick arrival = 0;
  Placement placement;
  std::uint64_t draw_key = 0;  // keys every random draw made for this device
};

// ---------------------------------------------------------------------------
// Policies
// ---------------------------------------------------------------------------

/// RAR window and BI bound applied after a failed attempt.
struct BackoffPolicy {
  Tick rar_window = 0;
  Tick bi_max = 0;
};

inline constexpr double kEbfBiUrllcMs = 0.0;
inline constexpr double kEbfBiNonUrllcMs = 10.0;

inline BackoffPolicy backoff_policy(bool ebf, DeviceClass cls, const TickTiming& t) {
  if (!ebf) return {t.rar_window, t.bi_max};
  const double bi = cls == DeviceClass::urllc ? kEbfBiUrllcMs : kEbfBiNonUrllcMs;
  return {0, t.scale.scale_ms(bi)};
}

/// Earliest time the device may contend again after a Msg-1 that drew no RAR:
/// Msg-2 processing, the RAR window, then a uniform back-off in [0, BI].
template <typename Engine>
Tick schedule_backoff(Tick msg1_end, const BackoffPolicy& policy, const TickTiming& t, Engine& eng) {
  const Tick bi = policy.bi_max > 0 ? static_cast<Tick>(uniform_below(eng, static_cast<std::uint64_t>(policy.bi_max) + 1)) : 0;
  return msg1_end + t.msg2 + policy.rar_window + bi;
}

inline double detection_probability(int msg1_count) { return 1.0 - std::exp(-static_cast<double>(msg1_count)); }

/// The detection draw for one sole transmitter, keyed by (device, attempt, gNB).
inline bool draw_detection(const RandomSource& rng, std::uint64_t draw_key, int attempt, int gnb, double p) {
  auto eng = rng.stream(Stream::detection, {draw_key, static_cast<std::uint64_t>(attempt), static_cast<std::uint64_t>(gnb)});
  return uniform01(eng) < p;
}

struct PreamblePool {
  int begin = 0;
  int end = 0;
  int size() const { return end - begin; }
  bool empty() const { return end <= begin; }
  bool contains(int p) const { return p >= begin && p < end; }
};

/// Which preambles a device may draw from. `priority` marks reserved-pool
/// eligibility (uRLLC under rp; uRLLC or previously failed under drp).
/// A reserved pool of size 0 means no reservation: everyone uses [0, n).
inline PreamblePool eligible_pool(bool priority, bool reservation_active, int reserved, int n_preambles) {
  if (!reservation_active || reserved <= 0) return {0, n_preambles};
  return priority ? PreamblePool{0, reserved} : PreamblePool{reserved, n_preambles};
}

inline bool is_priority(const Enhancements& e, DeviceClass cls, int failed_msg1) {
  if (e.rp) return cls == DeviceClass::urllc;
  if (e.drp) return cls == DeviceClass::urllc || failed_msg1 > 0;
  return false;
}

template <typename Engine>
std::optional<int> select_preamble(const PreamblePool& pool, Engine& eng) {
  if (pool.empty()) return std::nullopt;
  return pool.begin + static_cast<int>(uniform_below(eng, static_cast<std::uint64_t>(pool.size())));
}

/// Reserved-pool size in force at each RA subframe. Fixed unless dynamic, in
/// which case it is the half-up rounded mean of the priority-device counts
/// sampled over the preceding SIB2 period, clamped to [0, n_preambles - 1].
class ReservedPoolState {
 public:
  static ReservedPoolState fixed(int r, int n_preambles) { return ReservedPoolState(false, r, 0, n_preambles); }
  static ReservedPoolState dynamic(Tick sib2_period, int n_preambles) {
    return ReservedPoolState(true, 0, sib2_period, n_preambles);
  }

  bool is_dynamic() const { return dynamic_; }

  int reserved(Tick now) const {
    if (!dynamic_) return fixed_r_;
    std::int64_t sum = 0, count = 0;
    for (const auto& [t, k] : samples_) {
      if (t >= now - window_ && t < now) {
        sum += k;
        ++count;
      }
    }
    if (count == 0) return 0;
    const std::int64_t r = (2 * sum + count) / (2 * count);
    return static_cast<int>(std::clamp<std::int64_t>(r, 0, n_preambles_ - 1));
  }

  void record(Tick now, int priority_count) {
    if (!dynamic_) return;
    samples_.emplace_back(now, priority_count);
    while (!samples_.empty() && samples_.front().first < now - window_) samples_.pop_front();
  }

 private:
  ReservedPoolState(bool dyn, int r, Tick window, int n) : dynamic_(dyn), fixed_r_(r), window_(window), n_preambles_(n) {}

  bool dynamic_;
  int fixed_r_;
  Tick window_;
  int n_preambles_;
  std::deque<std::pair<Tick, int>> samples_;
};

/// Records this subframe's priority count and returns the pool size that the
/// next RA subframe will use.
inline int update_reserved_pool(ReservedPoolState& state, Tick now, int priority_count, Tick ra_period) {
  state.record(now, priority_count);
  return state.reserved(now + ra_period);
}

// ---------------------------------------------------------------------------
// Contention, RAR and Msg-3/4
// ---------------------------------------------------------------------------

/// Preambles chosen by two or more devices collide; sole transmitters are
/// detected according to `detect`. Outcomes are aligned with `opp.tx`.
inline std::vector<AttemptOutcome> resolve_opportunity(
    const RaOpportunity& opp, const std::function<bool(std::size_t index, const Transmission&)>& detect) {
  std::vector<int> count(static_cast<std::size_t>(opp.n_preambles), 0);
  for (const auto& t : opp.tx) ++count[static_cast<std::size_t>(t.preamble)];
  std::vector<AttemptOutcome> out;
  out.reserve(opp.tx.size());
  for (std::size_t i = 0; i < opp.tx.size(); ++i) {
    const Transmission& t = opp.tx[i];
    if (count[static_cast<std::size_t>(t.preamble)] > 1) out.push_back(AttemptOutcome::collided);
    else out.push_back(detect(i, t) ? AttemptOutcome::detected : AttemptOutcome::undetected);
  }
  return out;
}

struct RarRequest {
  int preamble = 0;
  int window_subframes = 1;  // response subframes the device listens to
};

inline int window_subframes(Tick rar_window, Tick subframe) {
  return std::max<int>(1, static_cast<int>(rar_window / subframe));
}

/// Grants RARs in preamble order; each response subframe carries at most
/// `grants_per_subframe` grants. Returns the response-subframe offset of each
/// grant, or nullopt when the request did not fit inside its window.
inline std::vector<std::optional<int>> grant_rar(std::span<const RarRequest> requests, int grants_per_subframe) {
  std::vector<std::size_t> order(requests.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return requests[a].preamble < requests[b].preamble; });
  std::vector<int> used;
  std::vector<std::optional<int>> out(requests.size());
  for (std::size_t i : order) {
    const int w = requests[i].window_subframes;
    if (static_cast<int>(used.size()) < w) used.resize(static_cast<std::size_t>(w), 0);
    for (int j = 0; j < w; ++j) {
      if (used[static_cast<std::size_t>(j)] < grants_per_subframe) {
        ++used[static_cast<std::size_t>(j)];
        out[i] = j;
        break;
      }
    }
  }
  return out;
}

struct Msg34Result {
  bool connected = false;
  int msg3_tx = 0;
  int msg4_tx = 0;
  Tick duration = 0;  // from RAR delivery to connection or timer expiry
};

struct HarqParams {
  double fail_prob = 0.1;
  int max_tx = 5;
};

/// Msg-3 then Msg-4 under non-adaptive HARQ. Any failure, including a span
/// beyond the contention-resolution timer, ends at timer expiry.
template <typename Engine>
Msg34Result msg34_exchange(const HarqParams& harq, const TickTiming& t, Engine& eng) {
  Msg34Result r;
  auto deliver = [&](int& count) {
    while (count < harq.max_tx) {
      ++count;
      if (!(uniform01(eng) < harq.fail_prob)) return true;
    }
    return false;
  };
  const bool m3 = deliver(r.msg3_tx);
  const bool m4 = m3 && deliver(r.msg4_tx);
  const Tick span = r.msg3_tx * t.msg3 + r.msg4_tx * t.msg4;
  if (m3 && m4 && span <= t.contention_resolution) {
    r.connected = true;
    r.duration = span;
  } else {
    r.duration = t.contention_resolution;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

struct SimulationResult {
  std::vector<AccessRecord> records;          // indexed like the device list
  std::vector<RaOpportunity> opportunities;   // every (RA subframe, gNB) in the period
  std::vector<TraceEvent> trace;              // empty unless requested
  int n_gnbs = 0;
  Tick ra_period = 0;
  Tick period_start = 0;
  Tick period_end = 0;
};

struct EngineHooks {
  // Overrides the 1 - exp(-i) preamble-detection model.
  std::function<double(int msg1_count)> detection_probability;
  // Overrides the uniform preamble draw (exhaustive-enumeration tests).
  std::function<std::optional<int>(const DeviceSpec&, int attempt, int gnb, const PreamblePool&)> select_preamble;
  bool record_trace = false;
};

class Simulation {
 public:
  Simulation(Scenario scenario, CellLayout layout, std::vector<DeviceSpec> devices, EngineHooks hooks = {})
      : sc_(std::move(scenario)),
        layout_(std::move(layout)),
        devices_(std::move(devices)),
        hooks_(std::move(hooks)),
        rng_(sc_.seed),
        t_(tick_timing(sc_.timing, sc_.numerology)) {}

  SimulationResult run() {
    SimulationResult out;
    const auto n = devices_.size();
    out.records.resize(n);
    out.ra_period = t_.ra_period;
    const bool pp = sc_.enhancements.pp;
    const int n_macro = static_cast<int>(layout_.macro.size());
    const int n_gnbs = n_macro + (pp ? static_cast<int>(layout_.femto.size()) : 0);
    out.n_gnbs = n_gnbs;
    if (n == 0) return out;

    const bool reservation = sc_.enhancements.rp || sc_.enhancements.drp;
    std::vector<ReservedPoolState> pools;
    for (int g = 0; g < n_gnbs; ++g) {
      if (sc_.enhancements.drp) pools.push_back(ReservedPoolState::dynamic(t_.sib2_period, sc_.n_preambles));
      else pools.push_back(ReservedPoolState::fixed(sc_.enhancements.rp ? sc_.reserved_r : 0, sc_.n_preambles));
    }

    std::vector<State> st(n);
    using Item = std::pair<Tick, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> ready;
    Tick first_arrival = devices_[0].arrival;
    for (std::size_t i = 0; i < n; ++i) {
      const DeviceSpec& d = devices_[i];
      AccessRecord& rec = out.records[i];
      rec.device = d.id;
      rec.cls = d.cls;
      rec.arrival = d.arrival;
      first_arrival = std::min(first_arrival, d.arrival);
      ready.emplace(d.arrival, i);
      trace(out, d.arrival, d.id, EventKind::arrival, -1, -1, 0);
    }

    const Tick start = ceil_to_period(first_arrival, t_.ra_period);
    out.period_start = start;
    Tick last_resolution = start;
    const int grants = sc_.rar_grants_per_subframe();
    const HarqParams harq{sc_.harq_fail_prob, sc_.max_harq};
    const double noise = sc_.topology.noise_dbm();

    std::vector<std::size_t> contenders;
    std::vector<RaOpportunity> opps(static_cast<std::size_t>(n_gnbs));
    std::vector<int> priority_count(static_cast<std::size_t>(n_gnbs));
    // Per transmission: (device index, opportunity slot within the gNB).
    std::vector<std::vector<std::size_t>> owner(static_cast<std::size_t>(n_gnbs));

    for (Tick now = start; !ready.empty() || now < last_resolution; now += t_.ra_period) {
      contenders.clear();
      while (!ready.empty() && ready.top().first <= now) {
        contenders.push_back(ready.top().second);
        ready.pop();
      }
      std::sort(contenders.begin(), contenders.end());

      for (int g = 0; g < n_gnbs; ++g) {
        auto& o = opps[static_cast<std::size_t>(g)];
        o.time = now;
        o.gnb = g;
        o.n_preambles = sc_.n_preambles;
        o.reserved = pools[static_cast<std::size_t>(g)].reserved(now);
        o.tx.clear();
        owner[static_cast<std::size_t>(g)].clear();
        priority_count[static_cast<std::size_t>(g)] = 0;
      }

      // Preamble selection.
      std::vector<std::size_t> transmitting;
      for (std::size_t i : contenders) {
        const DeviceSpec& d = devices_[i];
        State& s = st[i];
        const int attempt = s.attempts + 1;
        const bool prio = is_priority(sc_.enhancements, d.cls, s.failed_msg1);

        s.targets.clear();
        s.targets.push_back(d.placement.serving_cell);
        if (pp && d.placement.femto_cell) s.targets.push_back(layout_.femto_gnb(*d.placement.femto_cell));

        std::vector<int> chosen;
        bool deferred = false;
        for (int g : s.targets) {
          const PreamblePool pool =
              eligible_pool(prio, reservation, opps[static_cast<std::size_t>(g)].reserved, sc_.n_preambles);
          std::optional<int> p;
          if (hooks_.select_preamble) {
            p = hooks_.select_preamble(d, attempt, g, pool);
          } else {
            auto eng = rng_.stream(Stream::preamble, {d.draw_key, static_cast<std::uint64_t>(attempt),
                                                      static_cast<std::uint64_t>(g)});
            p = select_preamble(pool, eng);
          }
          if (!p) {
            deferred = true;
            break;
          }
          chosen.push_back(*p);
        }
        if (deferred) {
          trace(out, now, d.id, EventKind::deferred, -1, -1, s.attempts);
          ready.emplace(now + t_.ra_period, i);
          continue;
        }

        s.attempts = attempt;
        if (attempt == 1) out.records[i].first_attempt = now;
        transmitting.push_back(i);
        s.slots.clear();
        for (std::size_t k = 0; k < s.targets.size(); ++k) {
          const auto g = static_cast<std::size_t>(s.targets[k]);
          s.slots.push_back(opps[g].tx.size());
          opps[g].tx.push_back({chosen[k], d.id, d.cls});
          owner[g].push_back(i);
          if (prio) ++priority_count[g];
          trace(out, now, d.id, EventKind::msg1, chosen[k], s.targets[k], attempt);
        }
      }

      for (int g = 0; g < n_gnbs; ++g)
        pools[static_cast<std::size_t>(g)].record(now, priority_count[static_cast<std::size_t>(g)]);

      compute_phy(transmitting, st, opps, noise);

      // Detection and RAR grants, per gNB.
      for (std::size_t i : transmitting) st[i].grants.clear();
      for (int g = 0; g < n_gnbs; ++g) {
        const auto gi = static_cast<std::size_t>(g);
        const auto& o = opps[gi];
        const std::vector<AttemptOutcome> outcome =
            resolve_opportunity(o, [&](std::size_t j, const Transmission&) {
              const std::size_t i = owner[gi][j];
              return detected(devices_[i], st[i], g);
            });
        std::vector<RarRequest> req;
        std::vector<std::size_t> req_owner;
        for (std::size_t j = 0; j < o.tx.size(); ++j) {
          const std::size_t i = owner[gi][j];
          State& s = st[i];
          s.outcome_at(g) = outcome[j];
          if (outcome[j] != AttemptOutcome::detected) continue;
          const BackoffPolicy pol = backoff_policy(sc_.enhancements.ebf, devices_[i].cls, t_);
          req.push_back({o.tx[j].preamble, window_subframes(pol.rar_window, t_.subframe)});
          req_owner.push_back(i);
        }
        const auto granted = grant_rar(req, grants);
        for (std::size_t q = 0; q < req.size(); ++q) {
          State& s = st[req_owner[q]];
          if (granted[q]) {
            s.grants.push_back({now + t_.msg1 + t_.msg2 + *granted[q] * t_.subframe, g});
          } else {
            s.outcome_at(g) = AttemptOutcome::undetected;
            trace(out, now + t_.msg1 + t_.msg2 + static_cast<Tick>(req[q].window_subframes) * t_.subframe,
                  devices_[req_owner[q]].id, EventKind::rar_overflow, -1, g, s.attempts);
          }
        }
      }

      // Per-device continuation.
      for (std::size_t i : transmitting) {
        const Tick done = advance(out, i, st[i], now, harq, ready);
        last_resolution = std::max(last_resolution, done);
      }

      for (auto& o : opps) out.opportunities.push_back(o);
    }
    out.period_end = start + static_cast<Tick>(out.opportunities.size() / static_cast<std::size_t>(n_gnbs)) * t_.ra_period;

    if (hooks_.record_trace) {
      std::stable_sort(out.trace.begin(), out.trace.end(),
                       [](const TraceEvent& a, const TraceEvent& b) { return a.time < b.time; });
    }
    return out;
  }

 private:
  struct Grant {
    Tick rar = 0;
    int gnb = 0;
  };

  struct State {
    int attempts = 0;
    int failed_msg1 = 0;
    std::vector<int> targets;
    std::vector<std::size_t> slots;
    std::vector<AttemptOutcome> outcomes;
    std::vector<Grant> grants;
    std::vector<double> tx_power;
    std::vector<double> sinr;

    AttemptOutcome& outcome_at(int gnb) {
      for (std::size_t k = 0; k < targets.size(); ++k)
        if (targets[k] == gnb) {
          if (outcomes.size() < targets.size()) outcomes.resize(targets.size(), AttemptOutcome::undetected);
          return outcomes[k];
        }
      throw std::logic_error("device does not target this gNB");
    }
  };

  bool detected(const DeviceSpec& d, State& s, int gnb) {
    if (sc_.sinr_gate_db) {
      for (std::size_t k = 0; k < s.targets.size(); ++k)
        if (s.targets[k] == gnb && s.sinr[k] < *sc_.sinr_gate_db) return false;
    }
    const double p = hooks_.detection_probability ? hooks_.detection_probability(s.attempts)
                                                  : detection_probability(s.attempts);
    return draw_detection(rng_, d.draw_key, s.attempts, gnb, p);
  }

  // Ramped transmit power and SINR of every Msg-1 at its target gNB.
  // Interference comes from transmissions addressed to other gNBs.
  void compute_phy(const std::vector<std::size_t>& transmitting, std::vector<State>& st,
                   const std::vector<RaOpportunity>&, double noise) {
    struct Tx {
      std::size_t dev;
      int gnb;
      double power;
    };
    std::vector<Tx> all;
    for (std::size_t i : transmitting) {
      State& s = st[i];
      s.tx_power.assign(s.targets.size(), 0.0);
      s.sinr.assign(s.targets.size(), 0.0);
      s.outcomes.assign(s.targets.size(), AttemptOutcome::undetected);
      for (std::size_t k = 0; k < s.targets.size(); ++k) {
        const Point g = layout_.gnb_position(s.targets[k]);
        const double pl = path_loss_db(std::max(distance(devices_[i].placement.position, g), 1e-3), sc_.topology);
        s.tx_power[k] = ramped_tx_power_dbm(pl, s.attempts, sc_.topology);
        all.push_back({i, s.targets[k], s.tx_power[k]});
      }
    }
    std::vector<double> interferers;
    for (std::size_t i : transmitting) {
      State& s = st[i];
      for (std::size_t k = 0; k < s.targets.size(); ++k) {
        const Point g = layout_.gnb_position(s.targets[k]);
        interferers.clear();
        for (const Tx& x : all) {
          if (x.gnb == s.targets[k]) continue;
          const double d = std::max(distance(devices_[x.dev].placement.position, g), 1e-3);
          interferers.push_back(x.power - path_loss_db(d, sc_.topology));
        }
        const double d = std::max(distance(devices_[i].placement.position, g), 1e-3);
        s.sinr[k] = sinr_db(s.tx_power[k] - path_loss_db(d, sc_.topology), noise, interferers);
      }
    }
  }

  // Applies the attempt's result to one device. Returns the time the device
  // is resolved (connected/failed), or the RA subframe time if still active.
  Tick advance(SimulationResult& out, std::size_t i, State& s, Tick now, const HarqParams& harq,
               std::priority_queue<std::pair<Tick, std::size_t>, std::vector<std::pair<Tick, std::size_t>>,
                                   std::greater<>>& ready) {
    const DeviceSpec& d = devices_[i];
    AccessRecord& rec = out.records[i];
    rec.msg1_count = s.attempts;
    rec.final_msg1 = now;
    rec.tx_power_dbm = s.tx_power.empty() ? 0.0 : s.tx_power[0];
    rec.sinr_db = s.sinr.empty() ? 0.0 : s.sinr[0];
    const Tick msg1_end = now + t_.msg1;
    const BackoffPolicy pol = backoff_policy(sc_.enhancements.ebf, d.cls, t_);

    for (std::size_t k = 0; k < s.targets.size(); ++k) {
      const AttemptOutcome o = s.outcomes[k];
      if (o != AttemptOutcome::detected) {
        trace(out, msg1_end + t_.msg2 + pol.rar_window, d.id,
              o == AttemptOutcome::collided ? EventKind::collided : EventKind::undetected, -1, s.targets[k],
              s.attempts);
      }
    }

    if (s.grants.empty()) {
      ++s.failed_msg1;
      auto eng = rng_.stream(Stream::backoff, {d.draw_key, static_cast<std::uint64_t>(s.attempts)});
      const Tick next = schedule_backoff(msg1_end, pol, t_, eng);
      return retry_or_fail(out, i, s, msg1_end + t_.msg2 + pol.rar_window, next, ready);
    }

    // First RAR wins; ties go to the lower gNB index, i.e. the macro cell.
    Grant best = s.grants.front();
    for (const Grant& g : s.grants)
      if (g.rar < best.rar || (g.rar == best.rar && g.gnb < best.gnb)) best = g;
    trace(out, best.rar, d.id, EventKind::rar, -1, best.gnb, s.attempts);

    if (sc_.enhancements.edt) {
      finish_success(out, rec, now, best, 0, 0);
      trace(out, rec.completion, d.id, EventKind::connected, -1, best.gnb, s.attempts);
      return rec.completion;
    }

    auto eng = rng_.stream(Stream::harq, {d.draw_key, static_cast<std::uint64_t>(s.attempts)});
    const Msg34Result m = msg34_exchange(harq, t_, eng);
    if (hooks_.record_trace) {
      Tick at = best.rar;
      for (int k = 0; k < m.msg3_tx; ++k) trace(out, at += t_.msg3, d.id, EventKind::msg3, -1, best.gnb, s.attempts);
      for (int k = 0; k < m.msg4_tx; ++k) trace(out, at += t_.msg4, d.id, EventKind::msg4, -1, best.gnb, s.attempts);
    }
    if (m.connected) {
      finish_success(out, rec, now, best, m.msg3_tx, m.msg4_tx);
      trace(out, rec.completion, d.id, EventKind::connected, -1, best.gnb, s.attempts);
      return rec.completion;
    }
    const Tick expiry = best.rar + m.duration;
    trace(out, expiry, d.id, EventKind::contention_timeout, -1, best.gnb, s.attempts);
    auto beng = rng_.stream(Stream::backoff, {d.draw_key, static_cast<std::uint64_t>(s.attempts)});
    const Tick bi = pol.bi_max > 0 ? static_cast<Tick>(uniform_below(beng, static_cast<std::uint64_t>(pol.bi_max) + 1)) : 0;
    return retry_or_fail(out, i, s, expiry, expiry + bi, ready);
  }

  void finish_success(SimulationResult&, AccessRecord& rec, Tick now, const Grant& g, int n3, int n4) {
    rec.success = true;
    rec.edt = sc_.enhancements.edt;
    rec.gnb = g.gnb;
    rec.rar = g.rar;
    rec.msg3_tx = n3;
    rec.msg4_tx = n4;
    rec.wait = now - rec.arrival;
    rec.t_msg1 = t_.msg1;
    rec.t_msg2 = g.rar - (now + t_.msg1);
    rec.t_msg3 = n3 * t_.msg3;
    rec.t_msg4 = n4 * t_.msg4;
    rec.completion = g.rar + rec.t_msg3 + rec.t_msg4;
  }

  Tick retry_or_fail(SimulationResult& out, std::size_t i, State& s, Tick failure_known, Tick next,
                     std::priority_queue<std::pair<Tick, std::size_t>, std::vector<std::pair<Tick, std::size_t>>,
                                         std::greater<>>& ready) {
    AccessRecord& rec = out.records[i];
    if (s.attempts >= sc_.max_preamble_tx) {
      rec.success = false;
      rec.completion = failure_known;
      trace(out, failure_known, rec.device, EventKind::failed, -1, -1, s.attempts);
      return failure_known;
    }
    trace(out, next, rec.device, EventKind::backoff, -1, -1, s.attempts);
    ready.emplace(next, i);
    return failure_known;
  }

  void trace(SimulationResult& out, Tick time, DeviceId dev, EventKind kind, int preamble, int gnb, int attempt) {
    if (!hooks_.record_trace) return;
    out.trace.push_back({time, dev, kind, preamble, gnb, attempt});
  }

  Scenario sc_;
  CellLayout layout_;
  std::vector<DeviceSpec> devices_;
  EngineHooks hooks_;
  RandomSource rng_;
  TickTiming t_;
};

/// Devices for a scenario: placement, class split, arrival times.
/// Class assignment spreads the uRLLC share evenly over device indices.
inline std::vector<DeviceSpec> build_devices(const Scenario& sc, const CellLayout& layout) {
  const RandomSource rng(sc.seed);
  const std::int64_t total = sc.total_devices();
  const auto placements = place_devices(total, layout, rng);
  const auto n_urllc = static_cast<std::int64_t>(std::llround(sc.urllc_fraction * static_cast<double>(total)));

  std::vector<DeviceClass> classes(static_cast<std::size_t>(total));
  std::vector<std::uint64_t> keys(static_cast<std::size_t>(total));
  for (std::int64_t k = 0; k < total; ++k) {
    const bool u = ((k + 1) * n_urllc) / total > (k * n_urllc) / total;
    classes[static_cast<std::size_t>(k)] = u ? DeviceClass::urllc : DeviceClass::non_urllc;
    keys[static_cast<std::size_t>(k)] = static_cast<std::uint64_t>(k);
  }
  const auto arrivals_ms = generate_arrivals(classes, keys, sc.traffic, rng);
  const TimeScale scale = sc.numerology_scales_traffic ? time_scale_ratio(sc.numerology) : TimeScale{};

  std::vector<DeviceSpec> out(static_cast<std::size_t>(total));
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k].id = static_cast<DeviceId>(k);
    out[k].cls = classes[k];
    out[k].arrival = ms_to_ticks_floor(arrivals_ms[k] * scale.value());
    out[k].placement = placements[k];
    out[k].draw_key = keys[k];
  }
  return out;
}

inline SimulationResult run(const Scenario& sc, EngineHooks hooks = {}) {
  validate(sc);
  CellLayout layout = build_layout(sc.topology, RandomSource(sc.seed));
  std::vector<DeviceSpec> devices = build_devices(sc, layout);
  return Simulation(sc, std::move(layout), std::move(devices), std::move(hooks)).run();
}

}  // namespace rachsim
