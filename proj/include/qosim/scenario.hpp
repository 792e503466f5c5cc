#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>

#include "qosim/engine.hpp"

namespace qosim {

struct HrEnvelope {
  double hr_min_possible = 0.0;
  double hr_max_possible = 0.0;

  double width() const { return hr_max_possible - hr_min_possible; }
};

inline constexpr std::uint64_t kEnvelopeEpochs = 200;

namespace detail {
inline double settled_hr(const AppSpec& spec, const SimConfig& base, Placement placement,
                         double frequency) {
  SimConfig cfg = base;
  cfg.apps = {spec};
  cfg.apps.front().hard_target = {1.0, 2.0};  // unused by the fixed policy
  cfg.policy = PolicyKind::Fixed;
  cfg.fixed_frequency = frequency;
  cfg.placement = placement;
  cfg.max_sim_time = static_cast<double>(kEnvelopeEpochs) * cfg.epoch_length;
  const auto result = run(cfg);
  for (auto it = result.trace.rbegin(); it != result.trace.rend(); ++it)
    if (it->apps.front().hr) return *it->apps.front().hr;
  throw std::runtime_error("envelope run for '" + spec.app_id + "' produced no heart rate");
}
}  // namespace detail

// Steady-state HR at the two extremes: top frequency with threads at the
// center, bottom frequency with threads at the edges.
inline HrEnvelope hr_envelope(const AppSpec& spec, const SimConfig& cfg) {
  HrEnvelope env;
  env.hr_max_possible =
      detail::settled_hr(spec, cfg, Placement::Center, cfg.table.max_frequency());
  env.hr_min_possible =
      detail::settled_hr(spec, cfg, Placement::Edges, cfg.table.min_frequency());
  if (!(env.hr_max_possible > env.hr_min_possible))
    throw std::runtime_error("degenerate HR envelope for '" + spec.app_id + "'");
  return env;
}

// Two uniform draws inside the envelope, redrawn until they are at least
// `min_separation` of the envelope width apart.
inline HrRange sample_target_range(const HrEnvelope& env, std::uint64_t seed,
                                   double min_separation = 0.10) {
  if (!(env.width() > 0.0)) throw std::invalid_argument("sample_target_range: empty envelope");
  if (!(min_separation >= 0.0 && min_separation < 1.0))
    throw std::invalid_argument("sample_target_range: separation must be in [0, 1)");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> draw(env.hr_min_possible, env.hr_max_possible);
  for (;;) {
    double a = draw(rng);
    double b = draw(rng);
    if (a > b) std::swap(a, b);
    if (b - a >= min_separation * env.width()) return {a, b};
  }
}

}  // namespace qosim
