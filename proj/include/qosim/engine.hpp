#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qosim/baselines.hpp"
#include "qosim/power.hpp"
#include "qosim/qos_policy.hpp"
#include "qosim/topology.hpp"
#include "qosim/workload.hpp"

namespace qosim {

enum class PolicyKind { Qos, Hpm, Greedy, Fixed };
enum class Placement { Center, Edges };

inline std::string_view to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::Qos: return "qos";
    case PolicyKind::Hpm: return "hpm";
    case PolicyKind::Greedy: return "greedy";
    case PolicyKind::Fixed: return "fixed";
  }
  return "?";
}

inline std::optional<PolicyKind> parse_policy(std::string_view s) {
  if (s == "qos") return PolicyKind::Qos;
  if (s == "hpm") return PolicyKind::Hpm;
  if (s == "greedy") return PolicyKind::Greedy;
  if (s == "fixed") return PolicyKind::Fixed;
  return std::nullopt;
}

struct SimConfig {
  Floorplan floorplan{8, 8, 1.5e-9, 5e-9};
  FrequencyTable table = FrequencyTable::standard();
  PowerParams power = PowerParams::defaults(FrequencyTable::standard());
  double epoch_length = 1e-3;
  double migration_penalty = 50e-6;
  std::vector<AppSpec> apps;
  PolicyKind policy = PolicyKind::Qos;
  QosParams qos;
  HpmParams hpm;
  std::optional<double> fixed_frequency;  // Fixed policy; table max when unset
  Placement placement = Placement::Center;
  double max_sim_time = 10.0;
  std::uint64_t seed = 1;
  double window_factor = 6.0;  // heartbeat window = factor x thread count, plus one

  std::size_t total_threads() const {
    std::size_t n = 0;
    for (const auto& a : apps) n += static_cast<std::size_t>(std::max(a.thread_count, 0));
    return n;
  }

  // k*n + 1 beats span exactly k periods of any periodic n-thread beat stream,
  // whatever the threads' relative phases.
  std::size_t window_for(const AppSpec& a) const {
    const auto n = static_cast<std::size_t>(a.thread_count);
    const auto w = static_cast<std::size_t>(std::ceil(window_factor * static_cast<double>(n) - 1e-9));
    return std::max(w, n) + 1;
  }

  void validate() const {
    if (!(epoch_length > 0.0)) throw std::invalid_argument("sim.epoch_length must be > 0");
    if (migration_penalty < 0.0) throw std::invalid_argument("sim.migration_penalty must be >= 0");
    if (!(max_sim_time > 0.0)) throw std::invalid_argument("sim.max_sim_time must be > 0");
    if (!(window_factor > 1.0)) throw std::invalid_argument("sim.window_factor must be > 1");
    for (const auto& a : apps) a.validate();
    if (total_threads() > static_cast<std::size_t>(floorplan.core_count()))
      throw std::invalid_argument("unschedulable: " + std::to_string(total_threads()) +
                                  " threads exceed " + std::to_string(floorplan.core_count()) +
                                  " cores (one thread per core)");
  }
};

struct Migration {
  std::size_t app = 0;
  int thread = 0;
  CoreId from;
  CoreId to;
};

struct AppEpoch {
  bool running = false;  // app had work at the start of the epoch
  std::optional<double> hr;
  std::optional<State> state;  // QoS policy only
  std::string action = "hold";
  bool action_unavailable = false;
  double frequency = 0.0;
  double soft_min = 0.0;
  double soft_max = 0.0;
  double macro_step = 0.0;
  double micro_step = 0.0;
  std::optional<double> ratio_hr;
  std::optional<double> ratio_power;
  double power = 0.0;   // W, the app's cores
  double energy = 0.0;  // J, cumulative
  std::uint64_t heartbeats = 0;  // cumulative
};

struct EpochTrace {
  std::uint64_t epoch = 0;
  double time = 0.0;
  std::vector<AppEpoch> apps;
  double chip_power = 0.0;
  double chip_energy = 0.0;
  std::vector<Migration> migrations;
};

struct AppSummary {
  std::string app_id;
  int threads = 0;
  double hard_min = 0.0;
  double hard_max = 0.0;
  bool completed = false;
  std::optional<double> completion_time;
  double energy = 0.0;
  double residency = 0.0;
  std::optional<std::uint64_t> first_entry_epoch;
  std::uint64_t migrations = 0;
  std::uint64_t heartbeats = 0;
  std::uint64_t epochs_running = 0;
};

struct RunSummary {
  PolicyKind policy = PolicyKind::Qos;
  std::uint64_t epochs = 0;
  double sim_time = 0.0;
  double chip_energy = 0.0;
  std::vector<AppSummary> apps;
};

struct RunResult {
  std::vector<EpochTrace> trace;
  RunSummary summary;
};

// Apps in config order, each on the best free cores for the requested placement.
inline std::vector<std::vector<CoreId>> initial_placement(const SimConfig& cfg) {
  const auto& fp = cfg.floorplan;
  std::vector<bool> occupied(static_cast<std::size_t>(fp.core_count()), false);
  const Direction dir =
      cfg.placement == Placement::Center ? Direction::TowardCenter : Direction::AwayFromCenter;
  std::vector<std::vector<CoreId>> out;
  for (const auto& app : cfg.apps) {
    const auto ranked = rank_free_cores(fp, occupied, dir);
    if (ranked.size() < static_cast<std::size_t>(app.thread_count))
      throw std::invalid_argument("unschedulable: not enough free cores for app '" + app.app_id + "'");
    std::vector<CoreId> cores(ranked.begin(), ranked.begin() + app.thread_count);
    for (const auto& c : cores) occupied[fp.index(c)] = true;
    out.push_back(std::move(cores));
  }
  return out;
}

// Starting offsets of an app's threads within their first iteration: the
// even grid {k/n}, handed out in base-2 van der Corput order. Threads never
// begin in lock-step, and any run of consecutive threads (which sit on cores of
// similar AMD) is spread over the whole iteration.
inline std::vector<double> start_phases(int n) {
  auto radical_inverse = [](unsigned i) {
    double phase = 0.0;
    double scale = 0.5;
    for (; i != 0; i >>= 1, scale *= 0.5)
      if (i & 1u) phase += scale;
    return phase;
  };
  std::vector<unsigned> order(static_cast<std::size_t>(std::max(n, 0)));
  for (unsigned i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](unsigned a, unsigned b) { return radical_inverse(a) < radical_inverse(b); });
  std::vector<double> phases(order.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank)
    phases[order[rank]] = static_cast<double>(rank) / static_cast<double>(n);
  return phases;
}

// Mutable state of one simulation: thread placement, per-app frequency and work.
class System {
 public:
  struct App {
    AppSpec spec;
    std::vector<ThreadState> threads;
    IterationPool pool;
    HeartbeatLog log;
    std::size_t freq_index = 0;
    bool finished = false;
    std::optional<double> completion_time;
    double energy = 0.0;
    std::uint64_t migrations = 0;
  };

  explicit System(const SimConfig& cfg) : cfg_(cfg) {
    occupied_.assign(static_cast<std::size_t>(cfg.floorplan.core_count()), false);
    const auto placement = initial_placement(cfg);
    for (std::size_t a = 0; a < cfg.apps.size(); ++a) {
      const auto& spec = cfg.apps[a];
      App app{spec, {}, {}, HeartbeatLog(cfg.window_for(spec)), 0, false, std::nullopt, 0.0, 0};
      const auto n = static_cast<std::uint64_t>(spec.thread_count);
      app.pool.unclaimed = spec.total_iterations - n;
      const auto phases = start_phases(spec.thread_count);
      for (int t = 0; t < spec.thread_count; ++t) {
        ThreadState ts;
        ts.app = a;
        ts.thread_id = t;
        ts.core = placement[a][static_cast<std::size_t>(t)];
        ts.remaining_iterations = 1;
        ts.progress = phases[static_cast<std::size_t>(t)];
        occupied_[cfg.floorplan.index(*ts.core)] = true;
        app.threads.push_back(ts);
      }
      apps_.push_back(std::move(app));
    }
  }

  const SimConfig& config() const { return cfg_; }
  std::vector<App>& apps() { return apps_; }
  const std::vector<App>& apps() const { return apps_; }
  const std::vector<bool>& occupied() const { return occupied_; }

  double frequency(std::size_t app) const { return cfg_.table[apps_.at(app).freq_index].frequency; }

  void set_frequency(std::size_t app, double f) { apps_.at(app).freq_index = cfg_.table.nearest_index(f); }

  bool can_migrate(std::size_t app, Direction dir) const { return migration_for(app, dir).has_value(); }

  KnobAvailability knobs(std::size_t app) const {
    const auto idx = apps_.at(app).freq_index;
    return {idx == cfg_.table.max_index(), idx == 0, can_migrate(app, Direction::TowardCenter),
            can_migrate(app, Direction::AwayFromCenter)};
  }

  // Toward the center: the thread on the highest-AMD core moves to a free core
  // of strictly lower AMD, the best one (Farthest) or the least improving one
  // (Nearest). Away from the center mirrors this from the lowest-AMD thread.
  // Equal AMD resolves to row-major order.
  std::optional<Migration> migration_for(std::size_t app, Direction dir,
                                         MigrationReach reach = MigrationReach::Farthest) const {
    const auto& fp = cfg_.floorplan;
    const auto& a = apps_.at(app);
    if (a.finished) return std::nullopt;
    const bool inward = dir == Direction::TowardCenter;
    const ThreadState* pick = nullptr;
    double pick_amd = 0.0;
    for (const auto& t : a.threads) {
      const double d = amd(*t.core, fp);
      if (pick == nullptr || (inward ? d > pick_amd : d < pick_amd)) {
        pick = &t;
        pick_amd = d;
      }
    }
    if (pick == nullptr) return std::nullopt;
    std::optional<CoreId> dest;
    if (reach == MigrationReach::Farthest) {
      const auto ranked = rank_free_cores(fp, occupied_, dir);
      if (!ranked.empty()) dest = ranked.front();
    } else {
      // Reverse ranking: the first core past the thread's AMD is the nearest move.
      const auto ranked =
          rank_free_cores(fp, occupied_, inward ? Direction::AwayFromCenter : Direction::TowardCenter);
      for (const auto& c : ranked) {
        const double d = amd(c, fp);
        if (inward ? d < pick_amd : d > pick_amd) {
          dest = c;
          break;
        }
      }
    }
    if (!dest) return std::nullopt;
    const double dest_amd = amd(*dest, fp);
    if (!(inward ? dest_amd < pick_amd : dest_amd > pick_amd)) return std::nullopt;
    return Migration{app, pick->thread_id, *pick->core, *dest};
  }

  void migrate(const Migration& m, double now) {
    auto& t = apps_.at(m.app).threads.at(static_cast<std::size_t>(m.thread));
    const auto& fp = cfg_.floorplan;
    occupied_[fp.index(m.from)] = false;
    occupied_[fp.index(m.to)] = true;
    t.core = m.to;
    t.stall_until = now + cfg_.migration_penalty;
    ++apps_.at(m.app).migrations;
  }

  // Returns the migration performed, or nullopt when the action was unavailable.
  std::optional<Migration> apply_action(std::size_t app, const Action& action, double now) {
    switch (action.kind) {
      case ActionKind::Hold: return std::nullopt;
      case ActionKind::SetFrequency: set_frequency(app, action.frequency); return std::nullopt;
      case ActionKind::MigrateTowardCenter:
      case ActionKind::MigrateAwayFromCenter: {
        const auto dir = action.kind == ActionKind::MigrateTowardCenter ? Direction::TowardCenter
                                                                        : Direction::AwayFromCenter;
        auto m = migration_for(app, dir, action.reach);
        if (m) migrate(*m, now);
        return m;
      }
    }
    return std::nullopt;
  }

  void release(std::size_t app) {
    for (const auto& t : apps_.at(app).threads)
      if (t.core) occupied_[cfg_.floorplan.index(*t.core)] = false;
  }

 private:
  SimConfig cfg_;
  std::vector<App> apps_;
  std::vector<bool> occupied_;
};

// Throughput-only stand-in: maximum frequency and the single most profitable
// move toward the center each epoch.
inline std::optional<Migration> greedy_migration(const System& sys, std::size_t app) {
  const auto& fp = sys.config().floorplan;
  const auto& a = sys.apps().at(app);
  if (a.finished) return std::nullopt;
  const auto ranked = rank_free_cores(fp, sys.occupied(), Direction::TowardCenter);
  if (ranked.empty()) return std::nullopt;
  const double best_free = amd(ranked.front(), fp);
  const ThreadState* pick = nullptr;
  double gap = 0.0;
  for (const auto& t : a.threads) {
    const double g = amd(*t.core, fp) - best_free;
    if (g > gap) {
      gap = g;
      pick = &t;
    }
  }
  if (pick == nullptr) return std::nullopt;
  return Migration{app, pick->thread_id, *pick->core, ranked.front()};
}

namespace detail {

struct Controllers {
  std::vector<PolicyState> qos;
  std::vector<PidState> pid;
};

inline double initial_frequency(const SimConfig& cfg) {
  switch (cfg.policy) {
    case PolicyKind::Greedy: return cfg.table.max_frequency();
    case PolicyKind::Fixed: return cfg.table.snap(cfg.fixed_frequency.value_or(cfg.table.max_frequency()));
    case PolicyKind::Qos:
      return cfg.qos.initial_frequency ? cfg.table.snap(*cfg.qos.initial_frequency)
                                       : cfg.table[cfg.table.mid_index()].frequency;
    case PolicyKind::Hpm: return cfg.table[cfg.table.mid_index()].frequency;
  }
  return cfg.table.max_frequency();
}

}  // namespace detail

// Fixed-epoch loop: advance threads, measure, record, decide, act. Actions take
// effect from the next epoch on.
inline RunResult run(const SimConfig& cfg) {
  cfg.validate();
  RunResult result;
  result.summary.policy = cfg.policy;
  System sys(cfg);
  auto& apps = sys.apps();
  const auto& fp = cfg.floorplan;
  const double len = cfg.epoch_length;
  const auto max_epochs =
      static_cast<std::uint64_t>(std::ceil(cfg.max_sim_time / len - 1e-9));

  detail::Controllers ctl;
  const double f0 = detail::initial_frequency(cfg);
  for (std::size_t a = 0; a < apps.size(); ++a) {
    sys.set_frequency(a, f0);
    ctl.qos.push_back(PolicyState::make(apps[a].spec.hard_target, cfg.qos, cfg.table.grid_step()));
    const auto& hard = apps[a].spec.hard_target;
    ctl.pid.push_back(PidState::make(cfg.hpm, 0.5 * (hard.min_hr + hard.max_hr)));
  }

  std::vector<std::optional<std::uint64_t>> first_entry(apps.size());
  std::vector<std::uint64_t> running_epochs(apps.size(), 0), in_range_after_entry(apps.size(), 0),
      epochs_after_entry(apps.size(), 0);

  double chip_energy = 0.0;
  auto any_running = [&]() {
    return std::any_of(apps.begin(), apps.end(), [](const auto& a) { return !a.finished; });
  };

  std::uint64_t epoch = 0;
  std::vector<Heartbeat> beats;
  while (any_running() && epoch < max_epochs) {
    const double start = static_cast<double>(epoch) * len;
    ++epoch;
    const double now = static_cast<double>(epoch) * len;

    EpochTrace row;
    row.epoch = epoch;
    row.time = now;
    row.apps.resize(apps.size());

    // Power is fixed for the epoch: frequencies and occupancy only change at boundaries.
    double chip_power = 0.0;
    std::size_t busy_cores = 0;
    for (std::size_t a = 0; a < apps.size(); ++a) {
      auto& app = apps[a];
      auto& rec = row.apps[a];
      rec.running = !app.finished;
      rec.frequency = sys.frequency(a);
      if (!rec.running) continue;
      const auto& pt = cfg.table[app.freq_index];
      rec.power = static_cast<double>(app.threads.size()) * core_power(pt, cfg.power, true);
      busy_cores += app.threads.size();
      chip_power += rec.power;
    }
    chip_power += static_cast<double>(static_cast<std::size_t>(fp.core_count()) - busy_cores) *
                  cfg.power.idle_power;

    for (std::size_t a = 0; a < apps.size(); ++a) {
      auto& app = apps[a];
      if (app.finished) continue;
      const double f = sys.frequency(a);
      beats.clear();
      for (auto& t : app.threads) {
        const double it = iteration_time(app.spec, *t.core, f, fp);
        auto res = advance_thread(t, len, it, start, &app.pool);
        beats.insert(beats.end(), res.beats.begin(), res.beats.end());
      }
      std::stable_sort(beats.begin(), beats.end(), [](const Heartbeat& x, const Heartbeat& y) {
        return x.timestamp < y.timestamp;
      });
      for (const auto& b : beats) app.log.record(b);
      const bool done = app.pool.unclaimed == 0 &&
                        std::all_of(app.threads.begin(), app.threads.end(),
                                    [](const ThreadState& t) { return t.finished(); });
      if (done) {
        app.finished = true;
        app.completion_time = app.log.window().empty() ? now : app.log.window().back().timestamp;
      }
    }

    chip_energy = accumulate_energy(chip_power, len, chip_energy);
    row.chip_power = chip_power;
    row.chip_energy = chip_energy;

    for (std::size_t a = 0; a < apps.size(); ++a) {
      auto& app = apps[a];
      auto& rec = row.apps[a];
      if (rec.running) app.energy = accumulate_energy(rec.power, len, app.energy);
      rec.energy = app.energy;
      rec.heartbeats = app.log.total();
      const auto& ps = ctl.qos[a];
      rec.soft_min = ps.target.soft_min;
      rec.soft_max = ps.target.soft_max;
      rec.macro_step = ps.macro_step;
      rec.micro_step = ps.micro_step;
      if (!rec.running) continue;
      rec.hr = heart_rate(app.log);
      ++running_epochs[a];
      const bool in_range = rec.hr && app.spec.hard_target.contains(*rec.hr);
      if (!first_entry[a] && in_range) first_entry[a] = epoch;
      if (first_entry[a]) {
        ++epochs_after_entry[a];
        if (in_range) ++in_range_after_entry[a];
      }
    }

    // Decide and act, app by app in config order.
    for (std::size_t a = 0; a < apps.size(); ++a) {
      auto& app = apps[a];
      auto& rec = row.apps[a];
      if (app.finished) continue;
      const double f = sys.frequency(a);
      auto record_migration = [&](const std::optional<Migration>& m) {
        if (m) row.migrations.push_back(*m);
        else rec.action_unavailable = true;
      };
      switch (cfg.policy) {
        case PolicyKind::Fixed: break;
        case PolicyKind::Greedy: {
          sys.set_frequency(a, cfg.table.max_frequency());
          rec.action = "max_frequency";
          if (auto m = greedy_migration(sys, a)) {
            sys.migrate(*m, now);
            row.migrations.push_back(*m);
            rec.action = "max_frequency+migrate_in";
          }
          break;
        }
        case PolicyKind::Hpm: {
          if (!rec.hr) break;
          const auto cmd = hpm_step(ctl.pid[a], *rec.hr, len, f, cfg.table);
          sys.set_frequency(a, cmd.frequency);
          rec.action = "pid";
          if (cmd.saturated_high) {
            rec.action = "pid+migrate_in";
            record_migration(sys.apply_action(a, {ActionKind::MigrateTowardCenter, 0.0}, now));
          }
          break;
        }
        case PolicyKind::Qos: {
          auto& ps = ctl.qos[a];
          const auto d = qos_decide(ps, rec.hr, rec.power, f, sys.knobs(a), cfg.table);
          rec.state = d.state;
          rec.action = std::string(to_string(d.move));
          if (d.move == Move::EnergyOptimization) {
            rec.action += d.action.kind == ActionKind::SetFrequency
                              ? (d.action.frequency > f ? ":up" : ":down")
                              : ":hold";
          }
          rec.ratio_hr = ps.ratio_hr;
          rec.ratio_power = ps.ratio_power;
          rec.soft_min = ps.target.soft_min;
          rec.soft_max = ps.target.soft_max;
          rec.macro_step = ps.macro_step;
          rec.micro_step = ps.micro_step;
          const bool is_migration = d.action.kind == ActionKind::MigrateTowardCenter ||
                                    d.action.kind == ActionKind::MigrateAwayFromCenter;
          const auto m = sys.apply_action(a, d.action, now);
          if (is_migration) record_migration(m);
          break;
        }
      }
    }

    for (std::size_t a = 0; a < apps.size(); ++a)
      if (apps[a].finished && row.apps[a].running) sys.release(a);

    result.trace.push_back(std::move(row));
  }

  auto& summary = result.summary;
  summary.epochs = epoch;
  summary.sim_time = static_cast<double>(epoch) * len;
  summary.chip_energy = chip_energy;
  for (std::size_t a = 0; a < apps.size(); ++a) {
    const auto& app = apps[a];
    AppSummary s;
    s.app_id = app.spec.app_id;
    s.threads = app.spec.thread_count;
    s.hard_min = app.spec.hard_target.min_hr;
    s.hard_max = app.spec.hard_target.max_hr;
    s.completed = app.finished;
    s.completion_time = app.completion_time;
    s.energy = app.energy;
    s.first_entry_epoch = first_entry[a];
    s.residency = epochs_after_entry[a] == 0
                      ? 0.0
                      : static_cast<double>(in_range_after_entry[a]) /
                            static_cast<double>(epochs_after_entry[a]);
    s.migrations = app.migrations;
    s.heartbeats = app.log.total();
    s.epochs_running = running_epochs[a];
    summary.apps.push_back(std::move(s));
  }
  return result;
}

}  // namespace qosim
