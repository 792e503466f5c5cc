#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace qosim {

struct OperatingPoint {
  double frequency = 0.0;  // Hz
  double voltage = 0.0;    // V
};

// Discrete DVFS levels, strictly increasing in frequency.
class FrequencyTable {
 public:
  explicit FrequencyTable(std::vector<OperatingPoint> points) : points_(std::move(points)) {
    if (points_.size() < 2)
      throw std::invalid_argument("frequency table needs at least 2 operating points");
    for (std::size_t i = 1; i < points_.size(); ++i) {
      if (!(points_[i].frequency > points_[i - 1].frequency))
        throw std::invalid_argument("frequency table: frequencies must be strictly increasing");
      if (points_[i].voltage < points_[i - 1].voltage)
        throw std::invalid_argument("frequency table: voltages must be non-decreasing");
    }
    if (!(points_.front().frequency > 0.0))
      throw std::invalid_argument("frequency table: frequencies must be positive");
  }

  // Uniform grid [f_min, f_max] with voltage interpolated linearly.
  static FrequencyTable linear(double f_min, double f_max, double f_step, double v_min,
                               double v_max) {
    if (!(f_step > 0.0) || !(f_max > f_min))
      throw std::invalid_argument("frequency table: need f_max > f_min and f_step > 0");
    const auto n = static_cast<std::size_t>(std::llround((f_max - f_min) / f_step)) + 1;
    std::vector<OperatingPoint> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(n - 1);
      pts.push_back({f_min + static_cast<double>(i) * f_step, v_min + t * (v_max - v_min)});
    }
    return FrequencyTable(std::move(pts));
  }

  // 1.0 - 4.0 GHz in 0.1 GHz steps, 0.8 - 1.2 V.
  static FrequencyTable standard() { return linear(1.0e9, 4.0e9, 0.1e9, 0.8, 1.2); }

  std::size_t size() const { return points_.size(); }
  const OperatingPoint& operator[](std::size_t i) const { return points_.at(i); }
  const std::vector<OperatingPoint>& points() const { return points_; }
  std::size_t max_index() const { return points_.size() - 1; }
  double min_frequency() const { return points_.front().frequency; }
  double max_frequency() const { return points_.back().frequency; }
  std::size_t mid_index() const { return max_index() / 2; }

  // Smallest spacing between adjacent levels.
  double grid_step() const {
    double s = points_[1].frequency - points_[0].frequency;
    for (std::size_t i = 2; i < points_.size(); ++i)
      s = std::min(s, points_[i].frequency - points_[i - 1].frequency);
    return s;
  }

  // Index of the level nearest to f, clamped to the table. Ties go down.
  std::size_t nearest_index(double f) const {
    if (f <= points_.front().frequency) return 0;
    if (f >= points_.back().frequency) return max_index();
    std::size_t best = 0;
    double best_d = std::abs(points_[0].frequency - f);
    for (std::size_t i = 1; i < points_.size(); ++i) {
      const double d = std::abs(points_[i].frequency - f);
      if (d < best_d - 1e-6) {
        best = i;
        best_d = d;
      }
    }
    return best;
  }

  double snap(double f) const { return points_[nearest_index(f)].frequency; }

 private:
  std::vector<OperatingPoint> points_;
};

struct PowerParams {
  double static_power = 0.5;                 // W per busy core
  double switching_coefficient = 1.736e-10;  // kappa in P_dyn = kappa V^2 f
  double idle_power = 0.1;                   // W per unoccupied core

  // kappa such that the top operating point dissipates `dynamic_at_max` watts.
  static double calibrate_kappa(const FrequencyTable& table, double dynamic_at_max = 1.0) {
    const auto& top = table[table.max_index()];
    return dynamic_at_max / (top.voltage * top.voltage * top.frequency);
  }

  static PowerParams defaults(const FrequencyTable& table) {
    PowerParams p;
    p.switching_coefficient = calibrate_kappa(table);
    return p;
  }
};

inline double core_power(const OperatingPoint& pt, const PowerParams& params, bool busy) {
  if (!busy) return params.idle_power;
  return params.static_power + params.switching_coefficient * pt.voltage * pt.voltage * pt.frequency;
}

inline double accumulate_energy(double power, double dt, double acc) {
  if (dt < 0.0) throw std::invalid_argument("accumulate_energy: dt must be >= 0");
  return acc + power * dt;
}

}  // namespace qosim
