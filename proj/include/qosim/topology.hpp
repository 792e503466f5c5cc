#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

namespace qosim {

struct CoreId {
  int x = 0;
  int y = 0;

  friend bool operator==(const CoreId&, const CoreId&) = default;
};

inline std::string to_string(const CoreId& c) {
  return std::to_string(c.x) + "," + std::to_string(c.y);
}

enum class Direction { TowardCenter, AwayFromCenter };

// Grid of cores, one LLC bank co-located with every core. Latencies in seconds.
class Floorplan {
 public:
  Floorplan(int width, int height, double hop_latency, double bank_access_latency = 5e-9,
            bool round_trip = true)
      : width_(width),
        height_(height),
        hop_latency_(hop_latency),
        bank_access_latency_(bank_access_latency),
        round_trip_(round_trip) {
    if (width < 1 || height < 1)
      throw std::invalid_argument("floorplan: width and height must be >= 1");
    if (!(hop_latency > 0.0))
      throw std::invalid_argument("floorplan: hop_latency must be > 0");
    if (!(bank_access_latency >= 0.0))
      throw std::invalid_argument("floorplan: bank_access_latency must be >= 0");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int core_count() const { return width_ * height_; }
  double hop_latency() const { return hop_latency_; }
  double bank_access_latency() const { return bank_access_latency_; }
  bool round_trip() const { return round_trip_; }

  bool contains(const CoreId& c) const {
    return c.x >= 0 && c.x < width_ && c.y >= 0 && c.y < height_;
  }

  CoreId checked(CoreId c) const {
    if (!contains(c))
      throw std::out_of_range("core (" + to_string(c) + ") outside " + std::to_string(width_) +
                              "x" + std::to_string(height_) + " floorplan");
    return c;
  }

  std::size_t index(const CoreId& c) const {
    return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c.x);
  }

  CoreId core_at(std::size_t idx) const {
    return {static_cast<int>(idx % static_cast<std::size_t>(width_)),
            static_cast<int>(idx / static_cast<std::size_t>(width_))};
  }

 private:
  int width_;
  int height_;
  double hop_latency_;
  double bank_access_latency_;
  bool round_trip_;
};

inline int manhattan_distance(const CoreId& a, const CoreId& b) {
  return std::abs(a.x - b.x) + std::abs(a.y - b.y);
}

namespace detail {
// Sum of |i - p| for i in [0, n).
inline long long axis_distance_sum(int p, int n) {
  long long below = static_cast<long long>(p) * (p + 1) / 2;
  long long above = static_cast<long long>(n - 1 - p) * (n - p) / 2;
  return below + above;
}
}  // namespace detail

// Average Manhattan distance from `core` to every bank, own bank included.
// Separable per axis, so no double loop is needed.
inline double amd(const CoreId& core, const Floorplan& fp) {
  fp.checked(core);
  const long long w = fp.width();
  const long long h = fp.height();
  const long long total = h * detail::axis_distance_sum(core.x, fp.width()) +
                          w * detail::axis_distance_sum(core.y, fp.height());
  return static_cast<double>(total) / static_cast<double>(w * h);
}

inline double avg_llc_latency(const CoreId& core, const Floorplan& fp) {
  const double legs = fp.round_trip() ? 2.0 : 1.0;
  return legs * amd(core, fp) * fp.hop_latency() + fp.bank_access_latency();
}

// Free cores ordered by AMD (ascending toward the center, descending away from
// it); equal AMD falls back to row-major order in both directions.
inline std::vector<CoreId> rank_free_cores(const Floorplan& fp, const std::vector<bool>& occupied,
                                           Direction direction) {
  struct Ranked {
    double amd;
    std::size_t idx;
  };
  std::vector<Ranked> free;
  free.reserve(static_cast<std::size_t>(fp.core_count()));
  for (std::size_t i = 0; i < static_cast<std::size_t>(fp.core_count()); ++i) {
    if (i < occupied.size() && occupied[i]) continue;
    free.push_back({amd(fp.core_at(i), fp), i});
  }
  std::stable_sort(free.begin(), free.end(), [direction](const Ranked& a, const Ranked& b) {
    return direction == Direction::TowardCenter ? a.amd < b.amd : a.amd > b.amd;
  });
  std::vector<CoreId> out;
  out.reserve(free.size());
  for (const auto& r : free) out.push_back(fp.core_at(r.idx));
  return out;
}

inline std::vector<CoreId> rank_free_cores(const Floorplan& fp,
                                           const std::vector<CoreId>& occupied,
                                           Direction direction) {
  std::vector<bool> mask(static_cast<std::size_t>(fp.core_count()), false);
  for (const auto& c : occupied) mask[fp.index(fp.checked(c))] = true;
  return rank_free_cores(fp, mask, direction);
}

}  // namespace qosim
