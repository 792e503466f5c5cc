#include <gtest/gtest.h>

#include "qosim.hpp"

using namespace qosim;
using nlohmann::json;

namespace {
std::string error_key(const json& j) {
  try {
    parse_config(j, QOSIM_PRESET_DIR);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<no error>";
}
}  // namespace

TEST(Config, EmptyObjectGivesDefaults) {
  const auto ec = parse_config(json::object());
  EXPECT_EQ(ec.sim.floorplan.width(), 8);
  EXPECT_EQ(ec.sim.policy, PolicyKind::Qos);
  EXPECT_DOUBLE_EQ(ec.sim.epoch_length, 1e-3);
  EXPECT_DOUBLE_EQ(ec.sim.migration_penalty, 50e-6);
  EXPECT_NEAR(ec.sim.power.switching_coefficient, 1.736e-10, 1e-13);
  EXPECT_TRUE(ec.sim.apps.empty());
}

TEST(Config, PresetAppAndExplicitTarget) {
  const auto ec = parse_config(json::parse(R"({
    "policy": {"kind": "hpm"},
    "sim": {"epoch_ms": 2, "seed": 5},
    "apps": [{"preset": "mem", "threads": 3, "target": {"min_hr": 100, "max_hr": 200}},
             {"id": "x", "compute_cycles": 1e5, "total_iterations": 10}]
  })"), QOSIM_PRESET_DIR);
  ASSERT_EQ(ec.sim.apps.size(), 2u);
  EXPECT_EQ(ec.sim.policy, PolicyKind::Hpm);
  EXPECT_DOUBLE_EQ(ec.sim.epoch_length, 2e-3);
  EXPECT_EQ(ec.sim.seed, 5u);
  const auto& a = ec.sim.apps[0];
  EXPECT_EQ(a.thread_count, 3);
  EXPECT_DOUBLE_EQ(a.llc_accesses_per_iteration, 5000);
  EXPECT_EQ(a.total_iterations, 12000u);
  EXPECT_DOUBLE_EQ(a.hard_target.min_hr, 100);
  EXPECT_FALSE(ec.needs_target[0]);
  EXPECT_EQ(ec.sim.apps[1].app_id, "x");
  EXPECT_TRUE(ec.needs_target[1]);
}

TEST(Config, ErrorsNameTheOffendingKey) {
  EXPECT_EQ(error_key(json::parse(R"({"bogus": 1})")), "bogus");
  EXPECT_EQ(error_key(json::parse(R"({"sim": {"epoch_ms": "fast"}})")), "sim.epoch_ms");
  EXPECT_EQ(error_key(json::parse(R"({"sim": {"epoch_ms": 0}})")), "sim.epoch_ms");
  EXPECT_EQ(error_key(json::parse(R"({"policy": {"kind": "magic"}})")), "policy.kind");
  EXPECT_EQ(error_key(json::parse(R"({"apps": [{"preset": "nope"}]})")), "preset");
  EXPECT_EQ(error_key(json::parse(R"({"apps": [{"preset": "cpu", "threads": 0}]})")), "apps[0].threads");
  EXPECT_EQ(error_key(json::parse(R"({"apps": [{"preset": "cpu", "extra": 0}]})")), "apps[0].extra");
  EXPECT_EQ(error_key(json::parse(R"({"apps": [{"preset": "cpu", "target": {"min_hr": 5, "max_hr": 5}}]})")),
            "apps[0].target");
  EXPECT_EQ(error_key(json::parse(R"({"apps": [{"preset": "cpu", "threads": 65}]})")), "apps");
  EXPECT_EQ(error_key(json::parse(R"({"apps": [{"preset": "cpu", "threads": 40}, {"preset": "mem", "threads": 25}]})")),
            "apps");
  EXPECT_EQ(error_key(json::parse(R"({"policy": {"qos": {"macro_step_ghz": 0.1, "micro_step_ghz": 0.2}}})")),
            "policy.qos.micro_step_ghz");
}

TEST(Config, ExactlyFullChipIsAccepted) {
  EXPECT_EQ(error_key(json::parse(R"({"apps": [{"preset": "cpu", "threads": 64}]})")), "<no error>");
}

TEST(Config, ResolveTargetsDrawsInsideEnvelope) {
  auto ec = parse_config(json::parse(R"({"sim": {"seed": 3}, "apps": [{"preset": "cpu", "threads": 2}]})"),
                         QOSIM_PRESET_DIR);
  resolve_targets(ec);
  const auto env = hr_envelope(ec.sim.apps[0], ec.sim);
  const auto want = sample_target_range(env, 3);
  EXPECT_EQ(ec.sim.apps[0].hard_target.min_hr, want.min_hr);
  EXPECT_EQ(ec.sim.apps[0].hard_target.max_hr, want.max_hr);
  EXPECT_FALSE(ec.needs_target[0]);
}

TEST(Fingerprint, StableAndPolicyIndependent) {
  const auto j = json::parse(R"({"apps": [{"preset": "cpu", "threads": 2, "target": {"min_hr": 1, "max_hr": 9}}]})");
  auto a = parse_config(j, QOSIM_PRESET_DIR).sim;
  auto b = parse_config(j, QOSIM_PRESET_DIR).sim;
  b.policy = PolicyKind::Greedy;
  EXPECT_EQ(scenario_fingerprint(a), scenario_fingerprint(b));
  EXPECT_EQ(scenario_fingerprint(a).size(), 16u);
  b.apps[0].hard_target.max_hr = 10;
  EXPECT_NE(scenario_fingerprint(a), scenario_fingerprint(b));
}

TEST(Preset, LoadsShippedPresets) {
  const auto p = load_preset(QOSIM_PRESET_DIR, "cpu");
  EXPECT_EQ(p.name, "cpu");
  EXPECT_DOUBLE_EQ(p.llc_accesses, 0.0);
  EXPECT_GT(p.compute_cycles, 0.0);
  EXPECT_THROW(parse_preset(json::parse(R"({"compute_cycles": 1})"), "bad"), ConfigError);
}
