#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

using namespace qosim;

namespace {
const FrequencyTable kTable = FrequencyTable::standard();

PolicyState make_state(double lo, double hi) {
  return PolicyState::make({lo, hi}, QosParams{}, kTable.grid_step());
}

TargetRange soft(double lo, double hi) {
  TargetRange t = TargetRange::from_hard({lo, hi});
  return t;
}
}  // namespace

TEST(Classify, Examples) {
  const auto t = soft(90, 110);
  EXPECT_EQ(classify_state(100, t), State::C);
  EXPECT_EQ(classify_state(85, t), State::B);
  EXPECT_EQ(classify_state(70, t), State::A);
  EXPECT_EQ(classify_state(115, t), State::D);
  EXPECT_EQ(classify_state(125, t), State::E);
}

TEST(Classify, Boundaries) {
  const auto t = soft(90, 110);
  EXPECT_EQ(classify_state(81, t), State::B);
  EXPECT_EQ(classify_state(80.999, t), State::A);
  EXPECT_EQ(classify_state(90, t), State::C);
  EXPECT_EQ(classify_state(110, t), State::C);
  EXPECT_EQ(classify_state(121.0000001, t), State::E);
  EXPECT_EQ(classify_state(120.99, t), State::D);
}

TEST(Classify, AgreesWithOracleOnDenseSweep) {
  const auto t = soft(90, 110);
  for (int i = 1; i <= 20000; ++i) {
    const double hr = i * 0.01;
    const char want = oracle::classify(hr, t.soft_min, t.soft_max, t.proximity);
    ASSERT_EQ(to_string(classify_state(hr, t))[0], want) << hr;
  }
}

TEST(AdjustParameters, CrossingHalvesBothSteps) {
  auto ps = make_state(100, 200);
  ps.macro_step = 0.8e9;
  ps.micro_step = 0.2e9;
  adjust_parameters(State::A, State::E, ps);
  EXPECT_DOUBLE_EQ(ps.macro_step, 0.4e9);
  EXPECT_DOUBLE_EQ(ps.micro_step, 0.1e9);
  adjust_parameters(State::D, State::B, ps);
  EXPECT_DOUBLE_EQ(ps.macro_step, 0.2e9);
  EXPECT_NEAR(ps.micro_step, 0.1e9, 1.0);  // floor of one grid step
  EXPECT_EQ(ps.migration_reach, MigrationReach::Nearest);
}

TEST(AdjustParameters, SixthOvershootLowersSoftMax) {
  auto ps = make_state(100, 200);
  ps.max_count = 5;
  adjust_parameters(State::C, State::D, ps);
  EXPECT_DOUBLE_EQ(ps.target.soft_max, 195.0);
  EXPECT_EQ(ps.max_count, 0);
}

TEST(AdjustParameters, CountsUpToLimitBeforeShifting) {
  auto ps = make_state(100, 200);
  for (int i = 1; i <= 5; ++i) {
    adjust_parameters(State::C, State::A, ps);
    EXPECT_EQ(ps.min_count, i);
    EXPECT_DOUBLE_EQ(ps.target.soft_min, 100.0);
  }
  adjust_parameters(State::C, State::B, ps);
  EXPECT_DOUBLE_EQ(ps.target.soft_min, 105.0);
  EXPECT_EQ(ps.min_count, 0);
}

TEST(AdjustParameters, UnlistedTransitionsChangeNothing) {
  auto ps = make_state(100, 200);
  const auto before = ps;
  adjust_parameters(State::C, State::C, ps);
  adjust_parameters(State::A, State::B, ps);
  adjust_parameters(State::D, State::C, ps);
  adjust_parameters(std::nullopt, State::E, ps);
  EXPECT_EQ(ps.macro_step, before.macro_step);
  EXPECT_EQ(ps.micro_step, before.micro_step);
  EXPECT_EQ(ps.min_count, 0);
  EXPECT_EQ(ps.max_count, 0);
  EXPECT_EQ(ps.target.soft_min, before.target.soft_min);
  EXPECT_EQ(ps.target.soft_max, before.target.soft_max);
}

TEST(AdjustParameters, SoftRangeRespectsFloorAndHardBounds) {
  std::mt19937_64 rng(11);
  const State all[] = {State::A, State::B, State::C, State::D, State::E};
  for (int run = 0; run < 50; ++run) {
    auto ps = make_state(1000, 3000);
    std::optional<State> prev;
    for (int i = 0; i < 2000; ++i) {
      const State s = all[rng() % 5];
      const double macro = ps.macro_step, micro = ps.micro_step;
      adjust_parameters(prev, s, ps);
      prev = s;
      const auto& t = ps.target;
      ASSERT_GE(t.soft_min, t.hard_min);
      ASSERT_LE(t.soft_max, t.hard_max);
      ASSERT_GE(t.soft_max - t.soft_min, 0.2 * t.hard_width() - 1e-9);
      ASSERT_LE(ps.macro_step, macro);
      ASSERT_LE(ps.micro_step, micro);
      ASSERT_GE(ps.micro_step, kTable.grid_step() - 1.0);
      ASSERT_LE(ps.micro_step, ps.macro_step);
    }
  }
}

TEST(SelectAction, Examples) {
  EXPECT_EQ(select_action(State::A, {false, false, true, true}), Move::MacroIncrease);
  EXPECT_EQ(select_action(State::A, {true, false, true, true}), Move::MigrateTowardCenter);
  EXPECT_EQ(select_action(State::C, {}), Move::EnergyOptimization);
}

TEST(SelectAction, FullTruthTable) {
  const char states[] = {'A', 'B', 'C', 'D', 'E'};
  for (int s = 0; s < 5; ++s)
    for (int bits = 0; bits < 16; ++bits) {
      const KnobAvailability k{(bits & 1) != 0, (bits & 2) != 0, (bits & 4) != 0, (bits & 8) != 0};
      const auto want = oracle::action_for(states[s], k.freq_at_max, k.freq_at_min, k.can_migrate_in, k.can_migrate_out);
      EXPECT_EQ(to_string(select_action(static_cast<State>(s), k)), want) << states[s] << " " << bits;
    }
}

TEST(VariableStep, Examples) {
  auto ps = make_state(90, 110);
  ps.macro_step = 0.5e9;
  EXPECT_DOUBLE_EQ(variable_step_raw(ps, 100, StepDirection::Up), 0.25e9);
  EXPECT_DOUBLE_EQ(variable_step_raw(ps, 110, StepDirection::Up), 0.0);
  EXPECT_NEAR(variable_step(ps, 110, StepDirection::Up), 0.1e9, 1.0);
  EXPECT_DOUBLE_EQ(variable_step_raw(ps, 95, StepDirection::Down), 0.125e9);
  EXPECT_NEAR(variable_step(ps, 95, StepDirection::Down), 0.1e9, 1.0);
  EXPECT_NEAR(variable_step(ps, 100, StepDirection::Up), 0.2e9, 1.0);  // 2.5 grid steps, tie goes down
}

TEST(SnapStep, NearestWholeGridStep) {
  EXPECT_DOUBLE_EQ(snap_step(0.0, 0.1), 0.1);
  EXPECT_DOUBLE_EQ(snap_step(0.149, 0.1), 0.1);
  EXPECT_DOUBLE_EQ(snap_step(0.151, 0.1), 0.2);
  EXPECT_DOUBLE_EQ(snap_step(0.15, 0.1), 0.1);
}

namespace {
// Energy optimizer with a probe from 2.0 GHz to `f_now` pending.
PolicyState pending_probe(double f_now) {
  auto ps = make_state(50, 200);
  ps.energy_mode = EnergyMode::Up;
  ps.probe = {100.0, 10.0, 2.0e9, f_now - 2.0e9, true};
  return ps;
}
}  // namespace

TEST(EnergyOptimize, KeepsClimbingWhenHrOutpacesPower) {
  auto ps = pending_probe(2.2e9);
  const auto a = energy_optimize(ps, 110.0, 10.4, 2.2e9, kTable);
  ASSERT_EQ(a.kind, ActionKind::SetFrequency);
  EXPECT_GT(a.frequency, 2.2e9);
  EXPECT_DOUBLE_EQ(*ps.ratio_hr, 1.10);
}

TEST(EnergyOptimize, BacksOffWhenPowerOutpacesHr) {
  auto ps = pending_probe(2.2e9);
  const auto a = energy_optimize(ps, 102.0, 10.8, 2.2e9, kTable);
  ASSERT_EQ(a.kind, ActionKind::SetFrequency);
  EXPECT_LT(a.frequency, 2.2e9);
  EXPECT_EQ(ps.energy_mode, EnergyMode::Down);
}

TEST(EnergyOptimize, HoldsWhenRatiosAgree) {
  auto ps = pending_probe(2.2e9);
  const auto a = energy_optimize(ps, 100.0, 10.0, 2.2e9, kTable);
  EXPECT_EQ(a.kind, ActionKind::Hold);
  EXPECT_EQ(ps.energy_mode, EnergyMode::Hold);
  EXPECT_EQ(energy_optimize(ps, 100.0, 10.0, 2.2e9, kTable).kind, ActionKind::Hold);
}

TEST(EnergyOptimize, ZeroBaselineResetsProbe) {
  auto ps = pending_probe(2.2e9);
  ps.probe.power_previous = 0.0;
  EXPECT_EQ(energy_optimize(ps, 100.0, 10.0, 2.2e9, kTable).kind, ActionKind::Hold);
  EXPECT_FALSE(ps.probe.pending);
}

TEST(EnergyOptimize, FirstProbeGoesUpByVariableStep) {
  auto ps = make_state(50, 200);
  // 0.5 GHz x 100/150 = 0.333 GHz, snapped to 0.3 GHz.
  const auto a = energy_optimize(ps, 100.0, 10.0, 2.0e9, kTable);
  ASSERT_EQ(a.kind, ActionKind::SetFrequency);
  EXPECT_NEAR(a.frequency, 2.3e9, 1.0);
  EXPECT_TRUE(ps.probe.pending);
}

TEST(EnergyOptimize, GuardHoldsWhenMoveWouldLeaveSoftRange) {
  auto ps = make_state(90, 110);
  // At 109 beats/s any upward grid step predicts > 110 with HR proportional to f.
  ps.energy_mode = EnergyMode::Up;
  auto a = energy_optimize(ps, 109.0, 10.0, 2.0e9, kTable);
  EXPECT_EQ(a.kind, ActionKind::Hold);
  EXPECT_EQ(ps.energy_mode, EnergyMode::Down);
}

TEST(QosDecide, InsufficientDataHoldsAndKeepsHistory) {
  auto ps = make_state(90, 110);
  ps.prev_state = State::B;
  const auto d = qos_decide(ps, std::nullopt, 1.0, 2e9, {}, kTable);
  EXPECT_FALSE(d.state);
  EXPECT_EQ(d.action.kind, ActionKind::Hold);
  EXPECT_EQ(ps.prev_state, State::B);
}

TEST(QosDecide, BelowRangeRaisesFrequencyByMacroStep) {
  auto ps = make_state(90, 110);
  const auto d = qos_decide(ps, 50.0, 1.0, 2e9, {false, false, true, true}, kTable);
  EXPECT_EQ(d.state, State::A);
  ASSERT_EQ(d.action.kind, ActionKind::SetFrequency);
  EXPECT_DOUBLE_EQ(d.action.frequency, 2.5e9);
  EXPECT_EQ(ps.prev_state, State::A);
}

TEST(QosDecide, JustAboveRangeMigratesOut) {
  auto ps = make_state(90, 110);
  const auto d = qos_decide(ps, 115.0, 1.0, 2e9, {false, false, true, true}, kTable);
  EXPECT_EQ(d.state, State::D);
  EXPECT_EQ(d.action.kind, ActionKind::MigrateAwayFromCenter);
  EXPECT_EQ(d.action.reach, MigrationReach::Farthest);
}

TEST(EnergyOptimize, KeptMoveClearsEarlierGridFailures) {
  auto ps = pending_probe(2.1e9);
  ps.probe.step = 0.1e9;
  ps.grid_failures = 1;
  const auto a = energy_optimize(ps, 106.0, 10.2, 2.1e9, kTable);
  EXPECT_EQ(ps.grid_failures, 0);
  EXPECT_EQ(a.kind, ActionKind::SetFrequency);
}
