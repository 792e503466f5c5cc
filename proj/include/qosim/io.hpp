#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qosim/engine.hpp"

namespace qosim {

inline constexpr const char* kSummarySchema = "qosim.summary/1";

// One row per epoch per app. Chip columns repeat on every row of an epoch.
inline constexpr const char* kTraceHeader =
    "epoch,time_s,app_index,app_id,running,hr,state,action,action_unavailable,frequency_hz,"
    "hard_min,hard_max,soft_min,soft_max,macro_step_hz,micro_step_hz,ratio_hr,ratio_power,"
    "app_power_w,app_energy_j,heartbeats,chip_power_w,chip_energy_j,migrations";

namespace iodetail {
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }
}  // namespace iodetail

inline void write_trace_csv(std::ostream& out, const std::vector<EpochTrace>& trace,
                            const std::vector<AppSpec>& apps) {
  using iodetail::num;
  using iodetail::opt_num;
  out << kTraceHeader << '\n';
  for (const auto& row : trace) {
    for (std::size_t a = 0; a < row.apps.size(); ++a) {
      const auto& r = row.apps[a];
      std::string migs;
      for (const auto& m : row.migrations) {
        if (m.app != a) continue;
        if (!migs.empty()) migs += ' ';
        migs += std::to_string(m.thread) + ':' + std::to_string(m.from.x) + '/' + std::to_string(m.from.y) +
                '>' + std::to_string(m.to.x) + '/' + std::to_string(m.to.y);
      }
      out << row.epoch << ',' << num(row.time) << ',' << a << ',' << apps.at(a).app_id << ','
          << (r.running ? 1 : 0) << ',' << opt_num(r.hr) << ','
          << (r.state ? std::string(to_string(*r.state)) : std::string()) << ',' << r.action << ','
          << (r.action_unavailable ? 1 : 0) << ',' << num(r.frequency) << ','
          << num(apps[a].hard_target.min_hr) << ',' << num(apps[a].hard_target.max_hr) << ','
          << num(r.soft_min) << ',' << num(r.soft_max) << ',' << num(r.macro_step) << ','
          << num(r.micro_step) << ',' << opt_num(r.ratio_hr) << ',' << opt_num(r.ratio_power) << ','
          << num(r.power) << ',' << num(r.energy) << ',' << r.heartbeats << ',' << num(row.chip_power)
          << ',' << num(row.chip_energy) << ',' << migs << '\n';
    }
  }
}

inline nlohmann::json summary_json(const RunSummary& s, const std::string& scenario) {
  nlohmann::json apps = nlohmann::json::array();
  for (const auto& a : s.apps) {
    apps.push_back({{"id", a.app_id},
                    {"threads", a.threads},
                    {"hard_min", a.hard_min},
                    {"hard_max", a.hard_max},
                    {"completed", a.completed},
                    {"completion_time_s", a.completion_time ? nlohmann::json(*a.completion_time) : nlohmann::json()},
                    {"energy_j", a.energy},
                    {"residency", a.residency},
                    {"first_entry_epoch",
                     a.first_entry_epoch ? nlohmann::json(*a.first_entry_epoch) : nlohmann::json()},
                    {"migrations", a.migrations},
                    {"heartbeats", a.heartbeats},
                    {"epochs_running", a.epochs_running}});
  }
  return {{"schema", kSummarySchema},
          {"policy", std::string(to_string(s.policy))},
          {"scenario", scenario},
          {"epochs", s.epochs},
          {"sim_time_s", s.sim_time},
          {"chip_energy_j", s.chip_energy},
          {"apps", apps}};
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace qosim
