#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>

#include "qosim/power.hpp"

namespace qosim {

// Gains act on the error relative to the setpoint and produce a frequency
// delta in Hz, so one set of gains transfers across applications whose
// heart rates differ by orders of magnitude.
struct HpmParams {
  double kp = 0.8e9;
  double ki = 20e9;
  double kd = 0.0;
  double integral_limit = 0.01;  // |integral of relative error| in seconds
};

struct PidState {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
  double integral = 0.0;
  double integral_limit = 0.01;
  std::optional<double> previous_error;
  double setpoint = 0.0;

  static PidState make(const HpmParams& p, double setpoint) {
    if (p.kp < 0.0 || p.ki < 0.0 || p.kd < 0.0)
      throw std::invalid_argument("hpm: gains must be non-negative");
    if (!(setpoint > 0.0)) throw std::invalid_argument("hpm: setpoint must be positive");
    PidState s;
    s.kp = p.kp;
    s.ki = p.ki;
    s.kd = p.kd;
    s.integral_limit = p.integral_limit;
    s.setpoint = setpoint;
    return s;
  }
};

struct HpmCommand {
  double frequency = 0.0;  // always a table level
  bool saturated_high = false;
  double delta = 0.0;      // unsnapped controller output, Hz
};

inline HpmCommand hpm_step(PidState& pid, double hr, double dt, double current_frequency,
                           const FrequencyTable& table) {
  const double error = (pid.setpoint - hr) / pid.setpoint;
  pid.integral = std::clamp(pid.integral + error * dt, -pid.integral_limit, pid.integral_limit);
  const double derivative =
      pid.previous_error && dt > 0.0 ? (error - *pid.previous_error) / dt : 0.0;
  pid.previous_error = error;

  HpmCommand cmd;
  cmd.delta = pid.kp * error + pid.ki * pid.integral + pid.kd * derivative;
  const double wanted = current_frequency + cmd.delta;
  cmd.saturated_high = wanted > table.max_frequency();
  cmd.frequency = table.snap(wanted);
  return cmd;
}

}  // namespace qosim
