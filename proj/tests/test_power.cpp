#include <gtest/gtest.h>

#include "qosim.hpp"

using namespace qosim;

TEST(FrequencyTable, StandardGrid) {
  const auto t = FrequencyTable::standard();
  ASSERT_EQ(t.size(), 31u);
  EXPECT_DOUBLE_EQ(t.min_frequency(), 1.0e9);
  EXPECT_DOUBLE_EQ(t.max_frequency(), 4.0e9);
  EXPECT_DOUBLE_EQ(t[0].voltage, 0.8);
  EXPECT_DOUBLE_EQ(t[30].voltage, 1.2);
  EXPECT_NEAR(t.grid_step(), 0.1e9, 1.0);
  EXPECT_NEAR(t[t.mid_index()].frequency, 2.5e9, 1.0);
}

TEST(FrequencyTable, SnapClampsAndRoundsTiesDown) {
  const auto t = FrequencyTable::standard();
  EXPECT_DOUBLE_EQ(t.snap(4.05e9), 4.0e9);
  EXPECT_DOUBLE_EQ(t.snap(9e9), 4.0e9);
  EXPECT_DOUBLE_EQ(t.snap(0.2e9), 1.0e9);
  EXPECT_NEAR(t.snap(2.25e9), 2.2e9, 1.0);
  EXPECT_NEAR(t.snap(2.26e9), 2.3e9, 1.0);
}

TEST(FrequencyTable, RejectsInvalidTables) {
  EXPECT_THROW(FrequencyTable({{1e9, 1.0}}), std::invalid_argument);
  EXPECT_THROW(FrequencyTable({{2e9, 1.0}, {1e9, 1.1}}), std::invalid_argument);
  EXPECT_THROW(FrequencyTable({{1e9, 1.1}, {2e9, 1.0}}), std::invalid_argument);
}

TEST(CorePower, Examples) {
  PowerParams no_dyn;
  no_dyn.switching_coefficient = 0.0;
  EXPECT_DOUBLE_EQ(core_power({4e9, 1.2}, no_dyn, true), 0.5);

  PowerParams p;
  p.switching_coefficient = 1.736e-10;
  EXPECT_NEAR(core_power({4.0e9, 1.2}, p, true), 1.5, 1e-3);
  EXPECT_DOUBLE_EQ(core_power({4.0e9, 1.2}, p, false), 0.1);
}

TEST(CorePower, DefaultsCalibrateOneWattAtTop) {
  const auto t = FrequencyTable::standard();
  const auto p = PowerParams::defaults(t);
  EXPECT_NEAR(p.switching_coefficient, 1.736e-10, 1e-13);
  EXPECT_NEAR(core_power(t[t.max_index()], p, true), 1.5, 1e-12);
}

TEST(CorePower, NonDecreasingInFrequency) {
  const auto t = FrequencyTable::standard();
  const auto p = PowerParams::defaults(t);
  for (std::size_t i = 1; i < t.size(); ++i)
    EXPECT_GE(core_power(t[i], p, true), core_power(t[i - 1], p, true));
}

TEST(Energy, Examples) {
  EXPECT_DOUBLE_EQ(accumulate_energy(2.0, 0.001, 0.0), 0.002);
  EXPECT_DOUBLE_EQ(accumulate_energy(0.0, 123.0, 5.0), 5.0);
  double e = 0.0;
  for (int i = 0; i < 100; ++i) e = accumulate_energy(1.5, 1e-3, e);
  EXPECT_NEAR(e, 0.15, 1e-12);
  EXPECT_THROW(accumulate_energy(1.0, -1e-3, 0.0), std::invalid_argument);
}
