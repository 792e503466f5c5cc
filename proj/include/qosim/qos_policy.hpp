#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string_view>

#include "qosim/power.hpp"
#include "qosim/workload.hpp"

namespace qosim {

// A: far below the soft range, B: just below, C: inside, D: just above, E: far above.
enum class State { A, B, C, D, E };

inline std::string_view to_string(State s) {
  switch (s) {
    case State::A: return "A";
    case State::B: return "B";
    case State::C: return "C";
    case State::D: return "D";
    case State::E: return "E";
  }
  return "?";
}

inline bool below(State s) { return s == State::A || s == State::B; }
inline bool above(State s) { return s == State::D || s == State::E; }

struct TargetRange {
  double hard_min = 0.0;
  double hard_max = 0.0;
  double soft_min = 0.0;
  double soft_max = 0.0;
  double proximity = 0.10;

  static TargetRange from_hard(const HrRange& hard, double proximity = 0.10) {
    if (!(hard.min_hr < hard.max_hr)) throw std::invalid_argument("target: need min_hr < max_hr");
    return {hard.min_hr, hard.max_hr, hard.min_hr, hard.max_hr, proximity};
  }

  double hard_width() const { return hard_max - hard_min; }
  bool in_hard(double hr) const { return hr >= hard_min && hr <= hard_max; }
};

inline State classify_state(double hr, const TargetRange& t) {
  const double p = t.proximity;
  if (hr < t.soft_min * (1.0 - p)) return State::A;
  if (hr < t.soft_min) return State::B;
  if (hr <= t.soft_max) return State::C;
  if (hr <= t.soft_max * (1.0 + p)) return State::D;
  return State::E;
}

struct QosParams {
  double proximity = 0.10;
  double macro_step = 0.5e9;  // Hz
  double micro_step = 0.1e9;  // Hz
  int overshoot_limit = 5;
  double shrink_fraction = 0.05;      // of hard width, per soft-target adjustment
  double soft_floor_fraction = 0.20;  // minimum soft width, fraction of hard width
  double ratio_tolerance = 0.02;      // per unit relative frequency change
  std::optional<double> initial_frequency;  // table midpoint when unset
};

enum class EnergyMode { Up, Down, Hold };

// How far a migration moves a thread: to the best (worst) free core, or to the
// free core with the smallest AMD change in the requested direction.
enum class MigrationReach { Farthest, Nearest };

inline std::string_view to_string(EnergyMode m) {
  switch (m) {
    case EnergyMode::Up: return "up";
    case EnergyMode::Down: return "down";
    case EnergyMode::Hold: return "hold";
  }
  return "?";
}

struct Probe {
  double hr_previous = 0.0;
  double power_previous = 0.0;
  double frequency_previous = 0.0;
  double step = 0.0;
  bool pending = false;
};

struct PolicyState {
  TargetRange target;
  double macro_step = 0.5e9;
  double micro_step = 0.1e9;
  double grid_step = 0.1e9;
  std::optional<State> prev_state;
  int min_count = 0;
  int max_count = 0;
  int overshoot_limit = 5;
  double shrink_fraction = 0.05;
  double soft_floor_fraction = 0.20;
  double ratio_tolerance = 0.02;
  MigrationReach migration_reach = MigrationReach::Farthest;

  Probe probe;
  EnergyMode energy_mode = EnergyMode::Up;
  double step_cap = std::numeric_limits<double>::infinity();
  int grid_failures = 0;
  // Relative HR change per relative frequency change, from the last probe.
  // 1 (HR proportional to f) until a probe has been measured.
  double hr_elasticity = 1.0;

  // Last evaluated ratios, for the trace.
  std::optional<double> ratio_hr;
  std::optional<double> ratio_power;

  static PolicyState make(const HrRange& hard, const QosParams& q, double grid_step) {
    PolicyState ps;
    ps.target = TargetRange::from_hard(hard, q.proximity);
    ps.grid_step = grid_step;
    ps.macro_step = std::max(q.macro_step, grid_step);
    ps.micro_step = std::clamp(q.micro_step, grid_step, ps.macro_step);
    ps.overshoot_limit = q.overshoot_limit;
    ps.shrink_fraction = q.shrink_fraction;
    ps.soft_floor_fraction = q.soft_floor_fraction;
    ps.ratio_tolerance = q.ratio_tolerance;
    return ps;
  }

  void restart_energy_search() {
    probe = {};
    energy_mode = EnergyMode::Up;
    step_cap = std::numeric_limits<double>::infinity();
    grid_failures = 0;
  }
};

namespace detail {
// Overshoot across the soft range: shrink both frequency steps and switch
// migrations to their smallest move.
inline void reduce_steps(PolicyState& ps) {
  ps.macro_step = std::max(ps.macro_step / 2.0, ps.grid_step);
  ps.micro_step = std::max(ps.micro_step / 2.0, ps.grid_step);
  ps.migration_reach = MigrationReach::Nearest;
}

inline double min_soft_width(const PolicyState& ps) {
  return ps.soft_floor_fraction * ps.target.hard_width();
}
}  // namespace detail

// Overshoot handling, applied on every measured transition prev -> curr.
inline void adjust_parameters(std::optional<State> prev, State curr, PolicyState& ps) {
  if (!prev) return;
  if ((below(*prev) && above(curr)) || (above(*prev) && below(curr))) {
    detail::reduce_steps(ps);
    return;
  }
  if (*prev != State::C) return;
  auto& t = ps.target;
  const double shift = ps.shrink_fraction * t.hard_width();
  if (below(curr)) {
    if (++ps.min_count > ps.overshoot_limit) {
      t.soft_min = std::min(t.soft_min + shift, t.soft_max - detail::min_soft_width(ps));
      t.soft_min = std::max(t.soft_min, t.hard_min);
      ps.min_count = 0;
    }
  } else if (above(curr)) {
    if (++ps.max_count > ps.overshoot_limit) {
      t.soft_max = std::max(t.soft_max - shift, t.soft_min + detail::min_soft_width(ps));
      t.soft_max = std::min(t.soft_max, t.hard_max);
      ps.max_count = 0;
    }
  }
}

struct KnobAvailability {
  bool freq_at_max = false;
  bool freq_at_min = false;
  bool can_migrate_in = false;
  bool can_migrate_out = false;
};

enum class Move {
  Hold,
  MacroIncrease,
  MicroIncrease,
  MacroDecrease,
  MicroDecrease,
  MigrateTowardCenter,
  MigrateAwayFromCenter,
  EnergyOptimization,
};

inline std::string_view to_string(Move m) {
  switch (m) {
    case Move::Hold: return "hold";
    case Move::MacroIncrease: return "macro_increase";
    case Move::MicroIncrease: return "micro_increase";
    case Move::MacroDecrease: return "macro_decrease";
    case Move::MicroDecrease: return "micro_decrease";
    case Move::MigrateTowardCenter: return "migrate_in";
    case Move::MigrateAwayFromCenter: return "migrate_out";
    case Move::EnergyOptimization: return "energy_opt";
  }
  return "?";
}

// Primary action per state; the secondary one only when the primary is unavailable.
inline Move select_action(State state, const KnobAvailability& k) {
  switch (state) {
    case State::A:
      if (!k.freq_at_max) return Move::MacroIncrease;
      return k.can_migrate_in ? Move::MigrateTowardCenter : Move::Hold;
    case State::B:
      if (k.can_migrate_in) return Move::MigrateTowardCenter;
      return k.freq_at_max ? Move::Hold : Move::MicroIncrease;
    case State::C:
      return Move::EnergyOptimization;
    case State::D:
      if (k.can_migrate_out) return Move::MigrateAwayFromCenter;
      return k.freq_at_min ? Move::Hold : Move::MicroDecrease;
    case State::E:
      if (!k.freq_at_min) return Move::MacroDecrease;
      return k.can_migrate_out ? Move::MigrateAwayFromCenter : Move::Hold;
  }
  return Move::Hold;
}

enum class StepDirection { Up, Down };

// Step size shrinking as the HR approaches the soft bound it is moving toward.
inline double variable_step_raw(const PolicyState& ps, double hr, StepDirection dir) {
  const auto& t = ps.target;
  const double width = t.soft_max - t.soft_min;
  double frac = dir == StepDirection::Up ? (t.soft_max - hr) / width : (hr - t.soft_min) / width;
  frac = std::clamp(frac, 0.0, 1.0);
  return ps.macro_step * frac;
}

// Nearest whole number of grid steps (ties round down), at least one.
inline double snap_step(double step, double grid) {
  const double n = std::ceil(step / grid - 0.5 - 1e-9);
  return std::max(n, 1.0) * grid;
}

inline double variable_step(const PolicyState& ps, double hr, StepDirection dir) {
  return snap_step(variable_step_raw(ps, hr, dir), ps.grid_step);
}

enum class ActionKind { Hold, SetFrequency, MigrateTowardCenter, MigrateAwayFromCenter };

struct Action {
  ActionKind kind = ActionKind::Hold;
  double frequency = 0.0;  // SetFrequency only
  MigrationReach reach = MigrationReach::Farthest;  // migrations only

  static Action hold() { return {}; }
  static Action set_frequency(double f) { return {ActionKind::SetFrequency, f}; }
};

// Ratio-driven search for the most energy-efficient frequency inside the soft
// range. Each epoch evaluates the previous move: a move is kept when the HR
// ratio beats the power ratio, reverted otherwise. The search settles into Hold
// once the ratios agree, both neighbours were worse at grid resolution, or the
// next move would leave the soft range.
inline Action energy_optimize(PolicyState& ps, double hr, double power, double frequency,
                              const FrequencyTable& table) {
  if (ps.energy_mode == EnergyMode::Hold) return Action::hold();

  auto target_for = [&](StepDirection dir) {
    double step = std::min(variable_step(ps, hr, dir), ps.step_cap);
    step = snap_step(step, ps.grid_step);
    const double want = dir == StepDirection::Up ? frequency + step : frequency - step;
    return table.snap(want);
  };
  auto stays_in_soft = [&](double f_new) {
    const double predicted = hr * (1.0 + ps.hr_elasticity * (f_new / frequency - 1.0));
    return predicted >= ps.target.soft_min && predicted <= ps.target.soft_max;
  };
  auto launch = [&](double f_new) {
    ps.probe = {hr, power, frequency, std::abs(f_new - frequency), true};
    return Action::set_frequency(f_new);
  };
  auto settle = [&]() {
    ps.energy_mode = EnergyMode::Hold;
    ps.probe.pending = false;
    return Action::hold();
  };
  auto dir_of = [](EnergyMode m) {
    return m == EnergyMode::Up ? StepDirection::Up : StepDirection::Down;
  };
  auto flip = [](EnergyMode m) { return m == EnergyMode::Up ? EnergyMode::Down : EnergyMode::Up; };

  if (!ps.probe.pending) {
    const double f_new = target_for(dir_of(ps.energy_mode));
    if (f_new != frequency && stays_in_soft(f_new)) return launch(f_new);
    // Blocked by the table edge or the soft range: try the other side once.
    if (++ps.grid_failures >= 2) return settle();
    ps.energy_mode = flip(ps.energy_mode);
    return Action::hold();
  }

  const Probe base = ps.probe;
  if (!(base.hr_previous > 0.0) || !(base.power_previous > 0.0)) {
    ps.probe = {};
    return Action::hold();
  }
  const double r_hr = hr / base.hr_previous;
  const double r_p = power / base.power_previous;
  const double r_f = frequency / base.frequency_previous;
  ps.ratio_hr = r_hr;
  ps.ratio_power = r_p;
  if (r_f != 1.0) ps.hr_elasticity = std::clamp((r_hr - 1.0) / (r_f - 1.0), 0.0, 1.0);

  if (std::abs(r_hr - r_p) <= ps.ratio_tolerance * std::abs(r_f - 1.0)) return settle();

  if (r_hr > r_p) {
    // Move paid off; keep going the same way. Only failures around the
    // current point count toward settling.
    ps.grid_failures = 0;
    const double f_new = target_for(dir_of(ps.energy_mode));
    if (f_new != frequency && stays_in_soft(f_new)) return launch(f_new);
    return settle();
  }

  // Move cost more power than it bought in HR: undo it and search the other side.
  ps.probe = {};
  if (base.step <= ps.grid_step * (1.0 + 1e-9)) ++ps.grid_failures;
  if (ps.grid_failures >= 2) {
    ps.energy_mode = EnergyMode::Hold;
  } else {
    ps.energy_mode = flip(ps.energy_mode);
    ps.step_cap = std::max(base.step / 2.0, ps.grid_step);
  }
  return Action::set_frequency(base.frequency_previous);
}

struct QosDecision {
  std::optional<State> state;
  Move move = Move::Hold;
  Action action;
};

// One control epoch for one application.
inline QosDecision qos_decide(PolicyState& ps, std::optional<double> hr, double app_power,
                              double frequency, const KnobAvailability& knobs,
                              const FrequencyTable& table) {
  QosDecision d;
  ps.ratio_hr.reset();
  ps.ratio_power.reset();
  if (!hr || !(*hr > 0.0)) return d;

  const State state = classify_state(*hr, ps.target);
  d.state = state;
  adjust_parameters(ps.prev_state, state, ps);
  if (state == State::C && ps.prev_state != State::C) ps.restart_energy_search();
  if (state != State::C) ps.probe.pending = false;

  d.move = select_action(state, knobs);
  switch (d.move) {
    case Move::Hold: break;
    case Move::MacroIncrease: d.action = Action::set_frequency(frequency + ps.macro_step); break;
    case Move::MicroIncrease: d.action = Action::set_frequency(frequency + ps.micro_step); break;
    case Move::MacroDecrease: d.action = Action::set_frequency(frequency - ps.macro_step); break;
    case Move::MicroDecrease: d.action = Action::set_frequency(frequency - ps.micro_step); break;
    case Move::MigrateTowardCenter: d.action = {ActionKind::MigrateTowardCenter, 0.0, ps.migration_reach}; break;
    case Move::MigrateAwayFromCenter:
      d.action = {ActionKind::MigrateAwayFromCenter, 0.0, ps.migration_reach};
      break;
    case Move::EnergyOptimization:
      d.action = energy_optimize(ps, *hr, app_power, frequency, table);
      break;
  }
  ps.prev_state = state;
  return d;
}

}  // namespace qosim
