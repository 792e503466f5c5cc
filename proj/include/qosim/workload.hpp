#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qosim/topology.hpp"

namespace qosim {

struct HrRange {
  double min_hr = 0.0;  // beats/s
  double max_hr = 0.0;

  bool contains(double hr) const { return hr >= min_hr && hr <= max_hr; }
  double width() const { return max_hr - min_hr; }
};

struct AppSpec {
  std::string app_id;
  int thread_count = 1;
  double compute_cycles_per_iteration = 0.0;
  double llc_accesses_per_iteration = 0.0;
  std::uint64_t total_iterations = 1;
  HrRange hard_target;

  void validate() const {
    const std::string where = "app '" + app_id + "': ";
    if (thread_count < 1) throw std::invalid_argument(where + "thread_count must be >= 1");
    if (total_iterations < static_cast<std::uint64_t>(thread_count))
      throw std::invalid_argument(where + "total_iterations must be >= thread_count");
    if (!(hard_target.min_hr > 0.0) || !(hard_target.min_hr < hard_target.max_hr))
      throw std::invalid_argument(where + "target must satisfy 0 < min_hr < max_hr");
    if (compute_cycles_per_iteration < 0.0 || llc_accesses_per_iteration < 0.0)
      throw std::invalid_argument(where + "per-iteration work must be non-negative");
    if (!(compute_cycles_per_iteration >= 1.0 || llc_accesses_per_iteration >= 1.0))
      throw std::invalid_argument(where +
                                  "need compute_cycles >= 1 or llc_accesses >= 1 per iteration");
  }
};

inline double iteration_time(const AppSpec& spec, const CoreId& core, double frequency,
                             const Floorplan& fp) {
  return spec.compute_cycles_per_iteration / frequency +
         spec.llc_accesses_per_iteration * avg_llc_latency(core, fp);
}

struct ThreadState {
  std::size_t app = 0;
  int thread_id = 0;
  std::optional<CoreId> core;
  std::uint64_t remaining_iterations = 0;
  double progress = 0.0;     // fraction of the current iteration, [0, 1)
  double stall_until = 0.0;  // simulated seconds

  bool finished() const { return remaining_iterations == 0; }
};

struct Heartbeat {
  double timestamp = 0.0;
  int thread_id = 0;
};

// Time-ordered heartbeats of one application. Only the newest `window_size`
// beats are retained; the running total is kept separately.
class HeartbeatLog {
 public:
  explicit HeartbeatLog(std::size_t window_size = 2) : window_size_(window_size) {
    if (window_size_ < 2) throw std::invalid_argument("heartbeat window must hold >= 2 beats");
  }

  void record(const Heartbeat& beat) {
    if (!beats_.empty() && beat.timestamp < beats_.back().timestamp)
      throw std::invalid_argument("heartbeat timestamps must be non-decreasing");
    beats_.push_back(beat);
    ++total_;
    while (beats_.size() > window_size_) beats_.pop_front();
  }

  std::size_t window_size() const { return window_size_; }
  std::uint64_t total() const { return total_; }
  const std::deque<Heartbeat>& window() const { return beats_; }

 private:
  std::size_t window_size_;
  std::deque<Heartbeat> beats_;
  std::uint64_t total_ = 0;
};

// (n - 1) / span over the last window. nullopt means insufficient data.
inline std::optional<double> heart_rate(const HeartbeatLog& log) {
  const auto& w = log.window();
  if (w.size() < 2) return std::nullopt;
  const double span = w.back().timestamp - w.front().timestamp;
  if (!(span > 0.0)) return std::nullopt;
  return static_cast<double>(w.size() - 1) / span;
}

// Shared loop-iteration counter of one application. Threads claim iterations
// one at a time, so all of them finish within one iteration of each other.
struct IterationPool {
  std::uint64_t unclaimed = 0;
};

struct AdvanceResult {
  std::vector<Heartbeat> beats;
};

// Advances one thread by dt at a fixed iteration time. Stall time is consumed
// first. Each completed iteration emits a heartbeat stamped with its exact
// completion time. When `pool` is given, the thread claims a new iteration
// from it whenever its own allotment runs out.
inline AdvanceResult advance_thread(ThreadState& t, double dt, double iter_time, double now,
                                    IterationPool* pool = nullptr) {
  if (dt < 0.0) throw std::invalid_argument("advance_thread: dt must be >= 0");
  if (!(iter_time > 0.0)) throw std::invalid_argument("advance_thread: iteration time must be > 0");
  AdvanceResult out;
  const double end = now + dt;
  double clock = now;
  if (t.stall_until > clock) clock = std::min(t.stall_until, end);

  auto claim = [&]() {
    if (t.remaining_iterations > 0) return true;
    if (pool != nullptr && pool->unclaimed > 0) {
      --pool->unclaimed;
      t.remaining_iterations = 1;
      return true;
    }
    return false;
  };

  while (clock < end && claim()) {
    const double to_finish = (1.0 - t.progress) * iter_time;
    if (clock + to_finish <= end) {
      clock += to_finish;
      t.progress = 0.0;
      --t.remaining_iterations;
      out.beats.push_back({clock, t.thread_id});
    } else {
      t.progress += (end - clock) / iter_time;
      if (t.progress >= 1.0) t.progress = std::nextafter(1.0, 0.0);
      clock = end;
    }
  }
  return out;
}

}  // namespace qosim
