#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"

using namespace qosim;

TEST(Manhattan, Examples) {
  EXPECT_EQ(manhattan_distance({0, 0}, {0, 0}), 0);
  EXPECT_EQ(manhattan_distance({0, 0}, {7, 7}), 14);
  EXPECT_EQ(manhattan_distance({3, 3}, {5, 1}), 4);
}

TEST(Amd, Examples) {
  EXPECT_EQ(amd({0, 0}, Floorplan(1, 1, 1.5e-9)), 0.0);
  const Floorplan fp(8, 8, 1.5e-9);
  EXPECT_EQ(amd({3, 3}, fp), 4.0);
  EXPECT_EQ(amd({0, 0}, fp), 7.0);
}

TEST(Amd, MatchesBruteForceOnAllSmallGrids) {
  for (int w = 1; w <= 8; ++w)
    for (int h = 1; h <= 8; ++h) {
      const Floorplan fp(w, h, 1e-9);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          ASSERT_EQ(amd({x, y}, fp), oracle::amd_brute_force(x, y, w, h)) << w << "x" << h << " (" << x << "," << y << ")";
    }
}

TEST(Amd, MirrorSymmetry) {
  for (int w = 1; w <= 8; ++w)
    for (int h = 1; h <= 8; ++h) {
      const Floorplan fp(w, h, 1e-9);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          EXPECT_EQ(amd({x, y}, fp), amd({w - 1 - x, y}, fp));
          EXPECT_EQ(amd({x, y}, fp), amd({x, h - 1 - y}, fp));
        }
    }
}

TEST(Amd, MonotoneInDistanceFromCenter) {
  const int w = 8, h = 6;
  const Floorplan fp(w, h, 1e-9);
  const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
  for (int i = 0; i < w * h; ++i)
    for (int j = 0; j < w * h; ++j) {
      const CoreId a = fp.core_at(static_cast<std::size_t>(i));
      const CoreId b = fp.core_at(static_cast<std::size_t>(j));
      if (std::abs(a.x - cx) <= std::abs(b.x - cx) && std::abs(a.y - cy) <= std::abs(b.y - cy)) {
        EXPECT_LE(amd(a, fp), amd(b, fp));
      }
    }
}

TEST(Amd, RejectsOutOfBoundsCore) {
  const Floorplan fp(8, 8, 1.5e-9);
  EXPECT_THROW(amd({8, 0}, fp), std::out_of_range);
  EXPECT_THROW(amd({0, -1}, fp), std::out_of_range);
}

TEST(Floorplan, RejectsBadGeometry) {
  EXPECT_THROW(Floorplan(0, 4, 1e-9), std::invalid_argument);
  EXPECT_THROW(Floorplan(4, 4, 0.0), std::invalid_argument);
  EXPECT_THROW(Floorplan(4, 4, 1e-9, -1e-9), std::invalid_argument);
}

TEST(LlcLatency, CenterAndCornerWithoutBankTime) {
  const Floorplan fp(8, 8, 1.5e-9, 0.0);
  EXPECT_NEAR(avg_llc_latency({3, 3}, fp), 12.0e-9, 1e-21);
  EXPECT_NEAR(avg_llc_latency({0, 0}, fp), 21.0e-9, 1e-21);
}

TEST(LlcLatency, AddsBankTimeAndHonoursOneWay) {
  const Floorplan rt(8, 8, 1.5e-9, 5e-9);
  EXPECT_NEAR(avg_llc_latency({3, 3}, rt), 17.0e-9, 1e-21);
  const Floorplan one_way(8, 8, 1.5e-9, 5e-9, false);
  EXPECT_NEAR(avg_llc_latency({3, 3}, one_way), 11.0e-9, 1e-21);
}

TEST(RankFreeCores, EmptyGridTowardCenterStartsAtThreeThree) {
  const Floorplan fp(8, 8, 1.5e-9);
  const auto r = rank_free_cores(fp, std::vector<bool>(64, false), Direction::TowardCenter);
  ASSERT_EQ(r.size(), 64u);
  EXPECT_EQ(r.front(), (CoreId{3, 3}));
  EXPECT_EQ(r[1], (CoreId{4, 3}));
  EXPECT_EQ(r[2], (CoreId{3, 4}));
  EXPECT_EQ(r[3], (CoreId{4, 4}));
}

TEST(RankFreeCores, AwayFromCenterStartsAtCornersRowMajor) {
  const Floorplan fp(8, 8, 1.5e-9);
  const auto r = rank_free_cores(fp, std::vector<bool>(64, false), Direction::AwayFromCenter);
  EXPECT_EQ(r[0], (CoreId{0, 0}));
  EXPECT_EQ(r[1], (CoreId{7, 0}));
  EXPECT_EQ(r[2], (CoreId{0, 7}));
  EXPECT_EQ(r[3], (CoreId{7, 7}));
}

TEST(RankFreeCores, FullGridIsEmpty) {
  const Floorplan fp(8, 8, 1.5e-9);
  EXPECT_TRUE(rank_free_cores(fp, std::vector<bool>(64, true), Direction::TowardCenter).empty());
}

TEST(RankFreeCores, TwoByOneWithOneOccupied) {
  const Floorplan fp(2, 1, 1e-9);
  const std::vector<CoreId> occ{{0, 0}};
  for (auto dir : {Direction::TowardCenter, Direction::AwayFromCenter}) {
    const auto r = rank_free_cores(fp, occ, dir);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0], (CoreId{1, 0}));
  }
}

TEST(RankFreeCores, IsSortedPermutationOfFreeSet) {
  const Floorplan fp(8, 8, 1.5e-9);
  std::vector<bool> occ(64, false);
  for (std::size_t i = 0; i < 64; i += 3) occ[i] = true;
  const auto r = rank_free_cores(fp, occ, Direction::TowardCenter);
  std::vector<std::size_t> idx;
  for (const auto& c : r) idx.push_back(fp.index(c));
  for (std::size_t k = 1; k < r.size(); ++k) {
    const double a = oracle::amd_brute_force(r[k - 1].x, r[k - 1].y, 8, 8);
    const double b = oracle::amd_brute_force(r[k].x, r[k].y, 8, 8);
    EXPECT_TRUE(a < b || (a == b && idx[k - 1] < idx[k]));
  }
  std::sort(idx.begin(), idx.end());
  std::vector<std::size_t> expected;
  for (std::size_t i = 0; i < 64; ++i)
    if (!occ[i]) expected.push_back(i);
  EXPECT_EQ(idx, expected);
}
