// qosim: run S-NUCA QoS experiments and compare their summaries.
//
//   qosim run --config exp.json --out results/ [--policy hpm] [--seed 7]
//   qosim run --preset cpu --threads 3 --out results/ --batch 20
//   qosim compare results/qos/summary.json results/hpm/summary.json
//   qosim envelope --preset mem --threads 16

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "qosim.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct RunOptions {
  std::string config;
  std::string out = "qosim-out";
  std::string policy;
  std::optional<std::uint64_t> seed;
  std::string preset;
  int threads = 1;
  int batch = 0;
  std::string preset_dir = QOSIM_PRESET_DIR;
};

struct Outcome {
  fs::path dir;
  qosim::SimConfig cfg;
  qosim::RunSummary summary;
};

qosim::ExperimentConfig load_experiment(const RunOptions& opt) {
  nlohmann::json root = opt.config.empty() ? nlohmann::json::object() : qosim::read_json_file(opt.config);
  auto ec = qosim::parse_config(root, opt.preset_dir);
  if (!opt.preset.empty()) {
    if (opt.threads < 1) throw qosim::ConfigError("--threads", "must be >= 1");
    const auto preset = qosim::load_preset(opt.preset_dir, opt.preset);
    ec.sim.apps = {qosim::app_from_preset(preset, opt.threads)};
    ec.needs_target = {true};
  }
  if (!opt.policy.empty()) {
    const auto p = qosim::parse_policy(opt.policy);
    if (!p) throw qosim::ConfigError("--policy", "expected qos | hpm | greedy | fixed, got '" + opt.policy + "'");
    ec.sim.policy = *p;
  }
  if (opt.seed) ec.sim.seed = *opt.seed;
  try {
    ec.sim.validate();
  } catch (const std::invalid_argument& e) {
    throw qosim::ConfigError("apps", e.what());
  }
  return ec;
}

Outcome run_one(qosim::ExperimentConfig ec, const fs::path& dir) {
  qosim::resolve_targets(ec);
  const auto result = qosim::run(ec.sim);
  fs::create_directories(dir);
  std::ostringstream csv;
  qosim::write_trace_csv(csv, result.trace, ec.sim.apps);
  qosim::write_text(dir / "trace.csv", csv.str());
  const auto summary = qosim::summary_json(result.summary, qosim::scenario_fingerprint(ec.sim));
  qosim::write_text(dir / "summary.json", summary.dump(2) + "\n");
  return {dir, ec.sim, result.summary};
}

void print_outcome(const Outcome& o) {
  for (const auto& a : o.summary.apps) {
    const std::string entry = a.first_entry_epoch ? std::to_string(*a.first_entry_epoch) : "never";
    std::printf("%-28s %-7s %-14s target [%.4g, %.4g] energy %.6g J  residency %5.1f%%  entry %-6s "
                "done %s  migrations %llu\n",
                o.dir.string().c_str(), std::string(qosim::to_string(o.summary.policy)).c_str(),
                a.app_id.c_str(), a.hard_min, a.hard_max, a.energy, 100.0 * a.residency, entry.c_str(),
                a.completion_time ? (std::to_string(*a.completion_time) + " s").c_str() : "no",
                static_cast<unsigned long long>(a.migrations));
  }
}

int cmd_run(const RunOptions& opt) {
  const auto base = load_experiment(opt);
  const fs::path out = opt.out;
  if (opt.batch <= 0) {
    print_outcome(run_one(base, out));
    return 0;
  }
  std::vector<qosim::ExperimentConfig> scenarios;
  for (int k = 0; k < opt.batch; ++k) {
    auto ec = base;
    ec.sim.seed = base.sim.seed + static_cast<std::uint64_t>(k) * std::max<std::size_t>(ec.sim.apps.size(), 1);
    scenarios.push_back(std::move(ec));
  }
  const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<Outcome> outcomes(scenarios.size());
  for (std::size_t begin = 0; begin < scenarios.size(); begin += workers) {
    std::vector<std::future<Outcome>> jobs;
    const std::size_t end = std::min(scenarios.size(), begin + workers);
    for (std::size_t k = begin; k < end; ++k) {
      char name[32];
      std::snprintf(name, sizeof name, "scenario_%03zu", k);
      jobs.push_back(std::async(std::launch::async, run_one, scenarios[k], out / name));
    }
    for (std::size_t k = begin; k < end; ++k) outcomes[k] = jobs[k - begin].get();
  }
  for (const auto& o : outcomes) print_outcome(o);
  return 0;
}

int cmd_compare(const std::vector<std::string>& files, bool as_json) {
  std::vector<qosim::SummaryRecord> records;
  for (const auto& f : files) records.push_back(qosim::parse_summary(qosim::read_json_file(f), f));
  const auto rep = qosim::compare(records);
  if (!as_json) {
    std::cout << rep.to_text();
    return 0;
  }
  nlohmann::json j;
  j["reference"] = rep.reference;
  for (const auto& r : rep.rows)
    j["rows"].push_back({{"scenario", r.scenario},
                         {"policy", r.label},
                         {"energy_j", r.record.energy},
                         {"residency", r.record.residency},
                         {"convergence_epoch", r.record.convergence_epoch ? nlohmann::json(*r.record.convergence_epoch)
                                                                          : nlohmann::json()}});
  for (const auto& d : rep.deltas)
    j["deltas"].push_back({{"scenario", d.scenario},
                           {"baseline", d.baseline},
                           {"delta", d.delta ? nlohmann::json(*d.delta) : nlohmann::json()},
                           {"note", d.note}});
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_envelope(const RunOptions& opt) {
  const auto ec = load_experiment(opt);
  for (const auto& app : ec.sim.apps) {
    const auto env = qosim::hr_envelope(app, ec.sim);
    std::printf("%-16s hr_min_possible %.6g  hr_max_possible %.6g  ratio %.4f\n", app.app_id.c_str(),
                env.hr_min_possible, env.hr_max_possible, env.hr_max_possible / env.hr_min_possible);
  }
  return 0;
}

void add_run_flags(CLI::App* cmd, RunOptions& opt) {
  cmd->add_option("--config", opt.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--policy", opt.policy, "Override policy: qos | hpm | greedy | fixed");
  cmd->add_option("--seed", opt.seed, "Override the target-range seed");
  cmd->add_option("--preset", opt.preset, "Single-app scenario from a preset: cpu | mem | moderate");
  cmd->add_option("--threads", opt.threads, "Thread count for --preset");
  cmd->add_option("--preset-dir", opt.preset_dir, "Directory holding preset JSON files");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qosim - heartbeat QoS management on S-NUCA many-cores"};
  app.require_subcommand(1);

  RunOptions run_opt;
  auto* run = app.add_subcommand("run", "Run one experiment (or a seeded batch)");
  add_run_flags(run, run_opt);
  run->add_option("--out", run_opt.out, "Output directory");
  run->add_option("--batch", run_opt.batch, "Run N seeded scenarios into <out>/scenario_NNN/");

  std::vector<std::string> summaries;
  bool as_json = false;
  auto* cmp = app.add_subcommand("compare", "Compare summary.json files of the same scenarios");
  cmp->add_option("summaries", summaries, "summary.json files")->required()->check(CLI::ExistingFile);
  cmp->add_flag("--json", as_json, "Emit the report as JSON");

  RunOptions env_opt;
  auto* env = app.add_subcommand("envelope", "Print the feasible HR envelope of each app");
  add_run_flags(env, env_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_opt);
    if (*cmp) return cmd_compare(summaries, as_json);
    if (*env) return cmd_envelope(env_opt);
  } catch (const qosim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
