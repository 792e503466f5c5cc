#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qosim/engine.hpp"
#include "qosim/scenario.hpp"

namespace qosim {

// Malformed or inconsistent experiment configuration. `key` is the dotted
// path of the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

// Per-iteration work of a synthetic workload class.
struct Preset {
  std::string name;
  double compute_cycles = 0.0;
  double llc_accesses = 0.0;
  std::uint64_t iterations_per_thread = 0;
};

namespace cfgdetail {

using nlohmann::json;

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline void only_keys(const json& obj, const std::string& path,
                      std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  for (const auto& [k, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw ConfigError(join(path, k), "unknown key");
  }
}

template <typename T>
std::optional<T> opt(const json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(join(path, key), "wrong type");
  }
}

template <typename T>
T req(const json& obj, const std::string& path, const char* key) {
  auto v = opt<T>(obj, path, key);
  if (!v) throw ConfigError(join(path, key), "missing required key");
  return *v;
}

inline double positive(double v, const std::string& key) {
  if (!(v > 0.0)) throw ConfigError(key, "must be > 0");
  return v;
}

inline double non_negative(double v, const std::string& key) {
  if (!(v >= 0.0)) throw ConfigError(key, "must be >= 0");
  return v;
}

}  // namespace cfgdetail

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("", "'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

inline Preset parse_preset(const nlohmann::json& j, const std::string& name) {
  using namespace cfgdetail;
  const std::string path = "preset[" + name + "]";
  only_keys(j, path, {"name", "description", "compute_cycles", "llc_accesses", "iterations_per_thread"});
  Preset p;
  p.name = opt<std::string>(j, path, "name").value_or(name);
  p.compute_cycles = non_negative(req<double>(j, path, "compute_cycles"), join(path, "compute_cycles"));
  p.llc_accesses = non_negative(req<double>(j, path, "llc_accesses"), join(path, "llc_accesses"));
  p.iterations_per_thread = req<std::uint64_t>(j, path, "iterations_per_thread");
  if (p.iterations_per_thread == 0) throw ConfigError(join(path, "iterations_per_thread"), "must be >= 1");
  return p;
}

inline Preset load_preset(const std::filesystem::path& dir, const std::string& name) {
  const auto file = dir / (name + ".json");
  if (!std::filesystem::exists(file))
    throw ConfigError("preset", "unknown preset '" + name + "' (looked for " + file.string() + ")");
  return parse_preset(read_json_file(file), name);
}

inline AppSpec app_from_preset(const Preset& p, int threads, std::string id = {}) {
  AppSpec a;
  a.app_id = id.empty() ? p.name + "-" + std::to_string(threads) : std::move(id);
  a.thread_count = threads;
  a.compute_cycles_per_iteration = p.compute_cycles;
  a.llc_accesses_per_iteration = p.llc_accesses;
  a.total_iterations = p.iterations_per_thread * static_cast<std::uint64_t>(std::max(threads, 1));
  a.hard_target = {1.0, 2.0};  // placeholder until a target is drawn
  return a;
}

// Parsed configuration. Apps listed without a target get one drawn from their
// HR envelope (see resolve_targets).
struct ExperimentConfig {
  SimConfig sim;
  std::vector<bool> needs_target;
  double target_separation = 0.10;
};

inline ExperimentConfig parse_config(const nlohmann::json& root,
                                     const std::filesystem::path& preset_dir = {}) {
  using namespace cfgdetail;
  only_keys(root, "", {"floorplan", "power", "apps", "policy", "sim"});
  ExperimentConfig ec;
  SimConfig& cfg = ec.sim;

  if (auto it = root.find("floorplan"); it != root.end()) {
    const std::string p = "floorplan";
    only_keys(*it, p, {"width", "height", "hop_latency_ns", "bank_access_latency_ns", "round_trip"});
    const int w = opt<int>(*it, p, "width").value_or(8);
    const int h = opt<int>(*it, p, "height").value_or(8);
    if (w < 1) throw ConfigError("floorplan.width", "must be >= 1");
    if (h < 1) throw ConfigError("floorplan.height", "must be >= 1");
    const double hop =
        positive(opt<double>(*it, p, "hop_latency_ns").value_or(1.5), "floorplan.hop_latency_ns");
    const double bank = non_negative(opt<double>(*it, p, "bank_access_latency_ns").value_or(5.0),
                                     "floorplan.bank_access_latency_ns");
    cfg.floorplan = Floorplan(w, h, hop * 1e-9, bank * 1e-9, opt<bool>(*it, p, "round_trip").value_or(true));
  }

  std::optional<double> kappa;
  double dynamic_at_max = 1.0;
  if (auto it = root.find("power"); it != root.end()) {
    const std::string p = "power";
    only_keys(*it, p, {"static_w", "idle_w", "switching_coefficient", "dynamic_at_max_w", "frequency",
                       "operating_points"});
    cfg.power.static_power = non_negative(opt<double>(*it, p, "static_w").value_or(0.5), "power.static_w");
    cfg.power.idle_power = non_negative(opt<double>(*it, p, "idle_w").value_or(0.1), "power.idle_w");
    kappa = opt<double>(*it, p, "switching_coefficient");
    if (kappa) non_negative(*kappa, "power.switching_coefficient");
    dynamic_at_max = non_negative(opt<double>(*it, p, "dynamic_at_max_w").value_or(1.0), "power.dynamic_at_max_w");
    if (it->contains("frequency") && it->contains("operating_points"))
      throw ConfigError("power.operating_points", "give either 'frequency' or 'operating_points', not both");
    try {
      if (auto f = it->find("frequency"); f != it->end()) {
        const std::string fp = "power.frequency";
        only_keys(*f, fp, {"min_ghz", "max_ghz", "step_ghz", "min_v", "max_v"});
        cfg.table = FrequencyTable::linear(
            opt<double>(*f, fp, "min_ghz").value_or(1.0) * 1e9, opt<double>(*f, fp, "max_ghz").value_or(4.0) * 1e9,
            opt<double>(*f, fp, "step_ghz").value_or(0.1) * 1e9, opt<double>(*f, fp, "min_v").value_or(0.8),
            opt<double>(*f, fp, "max_v").value_or(1.2));
      } else if (auto o = it->find("operating_points"); o != it->end()) {
        if (!o->is_array()) throw ConfigError("power.operating_points", "expected an array");
        std::vector<OperatingPoint> pts;
        for (std::size_t i = 0; i < o->size(); ++i) {
          const std::string op = "power.operating_points[" + std::to_string(i) + "]";
          only_keys((*o)[i], op, {"ghz", "v"});
          pts.push_back({req<double>((*o)[i], op, "ghz") * 1e9, req<double>((*o)[i], op, "v")});
        }
        cfg.table = FrequencyTable(std::move(pts));
      }
    } catch (const std::invalid_argument& e) {
      throw ConfigError("power.frequency", e.what());
    }
  }
  cfg.power.switching_coefficient = kappa.value_or(PowerParams::calibrate_kappa(cfg.table, dynamic_at_max));

  if (auto it = root.find("sim"); it != root.end()) {
    const std::string p = "sim";
    only_keys(*it, p, {"epoch_ms", "migration_penalty_us", "max_sim_time_s", "seed", "window_factor",
                       "target_separation"});
    cfg.epoch_length = positive(opt<double>(*it, p, "epoch_ms").value_or(1.0), "sim.epoch_ms") * 1e-3;
    cfg.migration_penalty =
        non_negative(opt<double>(*it, p, "migration_penalty_us").value_or(50.0), "sim.migration_penalty_us") * 1e-6;
    cfg.max_sim_time = positive(opt<double>(*it, p, "max_sim_time_s").value_or(10.0), "sim.max_sim_time_s");
    cfg.seed = opt<std::uint64_t>(*it, p, "seed").value_or(1);
    cfg.window_factor = opt<double>(*it, p, "window_factor").value_or(cfg.window_factor);
    if (!(cfg.window_factor > 1.0)) throw ConfigError("sim.window_factor", "must be > 1");
    ec.target_separation = opt<double>(*it, p, "target_separation").value_or(0.10);
    if (!(ec.target_separation >= 0.0 && ec.target_separation < 1.0))
      throw ConfigError("sim.target_separation", "must be in [0, 1)");
  }

  if (auto it = root.find("policy"); it != root.end()) {
    const std::string p = "policy";
    only_keys(*it, p, {"kind", "qos", "hpm", "fixed_ghz"});
    const auto kind = opt<std::string>(*it, p, "kind").value_or("qos");
    const auto parsed = parse_policy(kind);
    if (!parsed) throw ConfigError("policy.kind", "expected qos | hpm | greedy | fixed, got '" + kind + "'");
    cfg.policy = *parsed;
    if (auto f = opt<double>(*it, p, "fixed_ghz")) cfg.fixed_frequency = positive(*f, "policy.fixed_ghz") * 1e9;
    if (auto q = it->find("qos"); q != it->end()) {
      const std::string qp = "policy.qos";
      only_keys(*q, qp, {"proximity", "macro_step_ghz", "micro_step_ghz", "overshoot_limit", "shrink_fraction",
                         "soft_floor_fraction", "ratio_tolerance", "initial_ghz"});
      auto& Q = cfg.qos;
      Q.proximity = non_negative(opt<double>(*q, qp, "proximity").value_or(Q.proximity), "policy.qos.proximity");
      Q.macro_step = positive(opt<double>(*q, qp, "macro_step_ghz").value_or(Q.macro_step * 1e-9),
                              "policy.qos.macro_step_ghz") * 1e9;
      Q.micro_step = positive(opt<double>(*q, qp, "micro_step_ghz").value_or(Q.micro_step * 1e-9),
                              "policy.qos.micro_step_ghz") * 1e9;
      if (Q.micro_step > Q.macro_step) throw ConfigError("policy.qos.micro_step_ghz", "must be <= macro_step_ghz");
      Q.overshoot_limit = opt<int>(*q, qp, "overshoot_limit").value_or(Q.overshoot_limit);
      if (Q.overshoot_limit < 0) throw ConfigError("policy.qos.overshoot_limit", "must be >= 0");
      Q.shrink_fraction = non_negative(opt<double>(*q, qp, "shrink_fraction").value_or(Q.shrink_fraction),
                                       "policy.qos.shrink_fraction");
      Q.soft_floor_fraction = opt<double>(*q, qp, "soft_floor_fraction").value_or(Q.soft_floor_fraction);
      if (!(Q.soft_floor_fraction > 0.0 && Q.soft_floor_fraction <= 1.0))
        throw ConfigError("policy.qos.soft_floor_fraction", "must be in (0, 1]");
      Q.ratio_tolerance = non_negative(opt<double>(*q, qp, "ratio_tolerance").value_or(Q.ratio_tolerance),
                                       "policy.qos.ratio_tolerance");
      if (auto f = opt<double>(*q, qp, "initial_ghz")) Q.initial_frequency = positive(*f, "policy.qos.initial_ghz") * 1e9;
    }
    if (auto h = it->find("hpm"); h != it->end()) {
      const std::string hp = "policy.hpm";
      only_keys(*h, hp, {"kp_ghz", "ki_ghz", "kd_ghz", "integral_limit"});
      auto& H = cfg.hpm;
      H.kp = non_negative(opt<double>(*h, hp, "kp_ghz").value_or(H.kp * 1e-9), "policy.hpm.kp_ghz") * 1e9;
      H.ki = non_negative(opt<double>(*h, hp, "ki_ghz").value_or(H.ki * 1e-9), "policy.hpm.ki_ghz") * 1e9;
      H.kd = non_negative(opt<double>(*h, hp, "kd_ghz").value_or(H.kd * 1e-9), "policy.hpm.kd_ghz") * 1e9;
      H.integral_limit = non_negative(opt<double>(*h, hp, "integral_limit").value_or(H.integral_limit),
                                      "policy.hpm.integral_limit");
    }
  }

  if (auto it = root.find("apps"); it != root.end()) {
    if (!it->is_array()) throw ConfigError("apps", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& j = (*it)[i];
      const std::string p = "apps[" + std::to_string(i) + "]";
      only_keys(j, p, {"id", "preset", "threads", "compute_cycles", "llc_accesses", "total_iterations",
                       "iterations_per_thread", "target"});
      std::optional<Preset> preset;
      if (auto name = opt<std::string>(j, p, "preset")) {
        if (preset_dir.empty()) throw ConfigError(join(p, "preset"), "no preset directory configured");
        preset = load_preset(preset_dir, *name);
      }
      const int threads = opt<int>(j, p, "threads").value_or(1);
      if (threads < 1) throw ConfigError(join(p, "threads"), "must be >= 1");
      AppSpec a = preset ? app_from_preset(*preset, threads) : AppSpec{};
      a.thread_count = threads;
      a.app_id = opt<std::string>(j, p, "id").value_or(preset ? a.app_id : "app" + std::to_string(i));
      if (auto v = opt<double>(j, p, "compute_cycles")) a.compute_cycles_per_iteration = non_negative(*v, join(p, "compute_cycles"));
      if (auto v = opt<double>(j, p, "llc_accesses")) a.llc_accesses_per_iteration = non_negative(*v, join(p, "llc_accesses"));
      if (auto v = opt<std::uint64_t>(j, p, "iterations_per_thread"))
        a.total_iterations = *v * static_cast<std::uint64_t>(threads);
      else if (preset)
        a.total_iterations = preset->iterations_per_thread * static_cast<std::uint64_t>(threads);
      if (auto v = opt<std::uint64_t>(j, p, "total_iterations")) a.total_iterations = *v;
      if (!preset && !j.contains("compute_cycles") && !j.contains("llc_accesses"))
        throw ConfigError(join(p, "compute_cycles"), "app needs a preset or explicit per-iteration work");
      if (a.total_iterations < static_cast<std::uint64_t>(threads))
        throw ConfigError(join(p, "total_iterations"), "must be >= threads");
      bool needs_target = true;
      if (auto t = j.find("target"); t != j.end() && !t->is_null()) {
        const std::string tp = join(p, "target");
        only_keys(*t, tp, {"min_hr", "max_hr"});
        a.hard_target = {req<double>(*t, tp, "min_hr"), req<double>(*t, tp, "max_hr")};
        if (!(a.hard_target.min_hr > 0.0 && a.hard_target.min_hr < a.hard_target.max_hr))
          throw ConfigError(tp, "need 0 < min_hr < max_hr");
        needs_target = false;
      } else {
        a.hard_target = {1.0, 2.0};  // placeholder until resolve_targets
      }
      if (!(a.compute_cycles_per_iteration >= 1.0 || a.llc_accesses_per_iteration >= 1.0))
        throw ConfigError(join(p, "compute_cycles"), "need compute_cycles >= 1 or llc_accesses >= 1");
      cfg.apps.push_back(std::move(a));
      ec.needs_target.push_back(needs_target);
    }
  }

  if (cfg.total_threads() > static_cast<std::size_t>(cfg.floorplan.core_count()))
    throw ConfigError("apps", "unschedulable: " + std::to_string(cfg.total_threads()) + " threads on " +
                                  std::to_string(cfg.floorplan.core_count()) +
                                  " cores (total threads must not exceed core count)");
  return ec;
}

// Draws a hard target for every app that lacks one. App i uses seed + i.
inline void resolve_targets(ExperimentConfig& ec) {
  auto& cfg = ec.sim;
  for (std::size_t i = 0; i < cfg.apps.size(); ++i) {
    if (i >= ec.needs_target.size() || !ec.needs_target[i]) continue;
    const auto env = hr_envelope(cfg.apps[i], cfg);
    cfg.apps[i].hard_target = sample_target_range(env, cfg.seed + i, ec.target_separation);
    ec.needs_target[i] = false;
  }
}

// Resolved scenario (everything except the policy) as canonical JSON.
inline nlohmann::json scenario_json(const SimConfig& cfg) {
  nlohmann::json j;
  j["floorplan"] = {{"width", cfg.floorplan.width()},
                    {"height", cfg.floorplan.height()},
                    {"hop_latency_s", cfg.floorplan.hop_latency()},
                    {"bank_access_latency_s", cfg.floorplan.bank_access_latency()},
                    {"round_trip", cfg.floorplan.round_trip()}};
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& pt : cfg.table.points()) pts.push_back({pt.frequency, pt.voltage});
  j["power"] = {{"static_w", cfg.power.static_power},
                {"idle_w", cfg.power.idle_power},
                {"switching_coefficient", cfg.power.switching_coefficient},
                {"operating_points", pts}};
  j["sim"] = {{"epoch_s", cfg.epoch_length},
              {"migration_penalty_s", cfg.migration_penalty},
              {"max_sim_time_s", cfg.max_sim_time},
              {"window_factor", cfg.window_factor}};
  nlohmann::json apps = nlohmann::json::array();
  for (const auto& a : cfg.apps)
    apps.push_back({{"id", a.app_id},
                    {"threads", a.thread_count},
                    {"compute_cycles", a.compute_cycles_per_iteration},
                    {"llc_accesses", a.llc_accesses_per_iteration},
                    {"total_iterations", a.total_iterations},
                    {"min_hr", a.hard_target.min_hr},
                    {"max_hr", a.hard_target.max_hr}});
  j["apps"] = apps;
  return j;
}

// FNV-1a over the canonical scenario dump, as 16 hex digits.
inline std::string scenario_fingerprint(const SimConfig& cfg) {
  const std::string s = scenario_json(cfg).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = hex[h & 0xF];
  return out;
}

}  // namespace qosim
