#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qosim/config.hpp"
#include "qosim/io.hpp"

namespace qosim {

inline constexpr double kResidencyThreshold = 0.95;

// What the compare command needs from one summary.json.
struct SummaryRecord {
  std::string policy;
  std::string scenario;
  double energy = 0.0;     // sum over apps
  double residency = 0.0;  // worst app
  std::optional<std::uint64_t> convergence_epoch;  // latest first entry; empty if any app never entered
  double completion_time = 0.0;                    // latest app
};

inline SummaryRecord parse_summary(const nlohmann::json& j, const std::string& origin = "summary") {
  if (!j.is_object() || j.value("schema", "") != kSummarySchema)
    throw ConfigError(origin + ".schema", std::string("expected '") + kSummarySchema + "'");
  SummaryRecord r;
  try {
    r.policy = j.at("policy").get<std::string>();
    r.scenario = j.at("scenario").get<std::string>();
    const auto& apps = j.at("apps");
    if (!apps.is_array() || apps.empty()) throw ConfigError(origin + ".apps", "expected a non-empty array");
    r.residency = 1.0;
    bool all_entered = true;
    std::uint64_t conv = 0;
    for (const auto& a : apps) {
      r.energy += a.at("energy_j").get<double>();
      r.residency = std::min(r.residency, a.at("residency").get<double>());
      if (a.at("first_entry_epoch").is_null()) all_entered = false;
      else conv = std::max(conv, a.at("first_entry_epoch").get<std::uint64_t>());
      if (!a.at("completion_time_s").is_null())
        r.completion_time = std::max(r.completion_time, a.at("completion_time_s").get<double>());
    }
    if (all_entered) r.convergence_epoch = conv;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(origin, std::string("malformed summary: ") + e.what());
  }
  return r;
}

struct ComparisonRow {
  std::string scenario;
  std::string label;
  SummaryRecord record;
};

struct EnergyDelta {
  std::string scenario;
  std::string baseline;
  std::optional<double> delta;  // (E_ref - E_base) / E_base; empty when excluded
  std::string note;
};

struct ComparisonReport {
  std::string reference;
  std::vector<ComparisonRow> rows;
  std::vector<EnergyDelta> deltas;

  // Mean delta of the reference against `baseline` over eligible scenarios.
  std::optional<double> mean_delta(const std::string& baseline) const {
    double sum = 0.0;
    int n = 0;
    for (const auto& d : deltas)
      if (d.baseline == baseline && d.delta) {
        sum += *d.delta;
        ++n;
      }
    if (n == 0) return std::nullopt;
    return sum / n;
  }

  std::string to_text() const;
};

// Groups summaries by scenario. Every scenario must be covered by the same
// set of policies. The reference is "qos" when present, else the first label.
inline ComparisonReport compare(const std::vector<SummaryRecord>& records) {
  if (records.size() < 2) throw ConfigError("compare", "need at least two summaries");
  ComparisonReport rep;
  std::map<std::string, std::vector<std::string>> labels_by_scenario;
  std::vector<std::string> scenario_order;
  for (const auto& r : records) {
    auto& labels = labels_by_scenario[r.scenario];
    if (labels.empty()) scenario_order.push_back(r.scenario);
    std::string label = r.policy;
    int dup = 1;
    while (std::find(labels.begin(), labels.end(), label) != labels.end())
      label = r.policy + "#" + std::to_string(++dup);
    labels.push_back(label);
    rep.rows.push_back({r.scenario, label, r});
  }
  const auto& first = labels_by_scenario[scenario_order.front()];
  const std::set<std::string> expected(first.begin(), first.end());
  for (const auto& sc : scenario_order) {
    const auto& l = labels_by_scenario[sc];
    if (std::set<std::string>(l.begin(), l.end()) != expected || l.size() < 2)
      throw ConfigError("compare", "mismatched scenarios: scenario " + sc +
                                       " is not covered by the same policies as " + scenario_order.front());
  }
  rep.reference = expected.count("qos") ? "qos" : first.front();

  for (const auto& sc : scenario_order) {
    const ComparisonRow* ref = nullptr;
    for (const auto& row : rep.rows)
      if (row.scenario == sc && row.label == rep.reference) ref = &row;
    for (const auto& row : rep.rows) {
      if (row.scenario != sc || row.label == rep.reference) continue;
      EnergyDelta d{sc, row.label, std::nullopt, ""};
      char buf[128];
      if (ref->record.residency < kResidencyThreshold) {
        std::snprintf(buf, sizeof buf, "excluded: %s residency %.1f%%", rep.reference.c_str(),
                      100.0 * ref->record.residency);
        d.note = buf;
      } else if (row.record.residency < kResidencyThreshold) {
        std::snprintf(buf, sizeof buf, "excluded: %s residency %.1f%%", row.label.c_str(),
                      100.0 * row.record.residency);
        d.note = buf;
      } else if (row.record.energy > 0.0) {
        d.delta = (ref->record.energy - row.record.energy) / row.record.energy;
      }
      rep.deltas.push_back(std::move(d));
    }
  }
  return rep;
}

inline std::string ComparisonReport::to_text() const {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-18s %-10s %14s %10s %12s %12s\n", "scenario", "policy", "energy_j",
                "residency", "convergence", "completion_s");
  os << buf;
  for (const auto& r : rows) {
    const std::string conv = r.record.convergence_epoch ? std::to_string(*r.record.convergence_epoch) : "never";
    std::snprintf(buf, sizeof buf, "%-18s %-10s %14.6g %9.1f%% %12s %12.4f\n", r.scenario.c_str(), r.label.c_str(),
                  r.record.energy, 100.0 * r.record.residency, conv.c_str(), r.record.completion_time);
    os << buf;
  }
  std::set<std::string> baselines;
  for (const auto& d : deltas) baselines.insert(d.baseline);
  for (const auto& b : baselines) {
    int eligible = 0, total = 0;
    for (const auto& d : deltas) {
      if (d.baseline != b) continue;
      ++total;
      if (d.delta) ++eligible;
      if (d.delta) std::snprintf(buf, sizeof buf, "  %s vs %s [%s]: %+.1f%%\n", reference.c_str(), b.c_str(),
                                 d.scenario.c_str(), 100.0 * *d.delta);
      else std::snprintf(buf, sizeof buf, "  %s vs %s [%s]: %s\n", reference.c_str(), b.c_str(),
                         d.scenario.c_str(), d.note.c_str());
      os << buf;
    }
    const auto mean = mean_delta(b);
    if (mean) std::snprintf(buf, sizeof buf, "%s vs %s: mean energy delta %+.1f%% over %d/%d scenarios\n",
                            reference.c_str(), b.c_str(), 100.0 * *mean, eligible, total);
    else std::snprintf(buf, sizeof buf, "%s vs %s: no scenario with both policies in range\n",
                       reference.c_str(), b.c_str());
    os << buf;
  }
  return os.str();
}

}  // namespace qosim
