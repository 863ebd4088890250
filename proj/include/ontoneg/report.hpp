#pragma once

// Per-vehicle comparison of the two arms and its json/csv/text renderings.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ontoneg/harness.hpp"

namespace ontoneg::harness {

enum class Format { Json, Csv, Text };

std::optional<Format> parse_format(std::string_view s);

struct Comparison {
  double pct_gained = 0.0;     // 0.1 precision
  double pct_unchanged = 0.0;
  double pct_lost = 0.0;
  std::int64_t avg_gain_s = 0;  // mean over gaining vehicles only
  std::uint32_t gained = 0;
  std::uint32_t unchanged = 0;
  std::uint32_t lost = 0;
  // baseline - negotiate, seconds
  std::map<std::string, std::int64_t> deltas;
  bool operator==(const Comparison&) const = default;
};

// Throws std::invalid_argument when the vehicle sets differ.
Comparison compare(const std::map<std::string, sim::Tick>& negotiate,
                   const std::map<std::string, sim::Tick>& baseline);

struct ArmSummary {
  std::uint64_t arrived = 0;
  std::uint64_t capped = 0;
  double mean_travel_s = 0.0;  // 0.1 precision
  std::int64_t max_travel_s = 0;
  std::uint64_t safety_violations = 0;
  std::uint64_t safety_checks = 0;
  std::uint64_t sessions = 0;
  std::uint64_t votes = 0;
  bool operator==(const ArmSummary&) const = default;
};

struct ExperimentInfo {
  std::uint32_t index = 0;
  std::uint64_t seed = 0;
  std::string world_hash;  // 16 hex digits
  std::uint32_t vehicles = 0;
  bool operator==(const ExperimentInfo&) const = default;
};

struct Report {
  std::string mode;
  std::uint64_t seed = 0;
  nlohmann::json config;
  std::vector<ExperimentInfo> experiments;
  std::map<std::string, ArmSummary> arms;  // "negotiate" / "baseline"
  std::optional<Comparison> comparison;    // paired mode only
  // Vehicles ("e<k>/<name>") left out of the comparison because an arm
  // hit its tick cap.
  std::vector<std::string> capped;
  bool operator==(const Report&) const = default;
};

nlohmann::json config_to_json(const ExperimentConfig& config);

// Aggregates all experiments; vehicle keys are "e<index>/<name>".
Report make_report(const ExperimentConfig& config,
                   const std::vector<ExperimentResult>& results);

nlohmann::json report_to_json(const Report& report);
Report report_from_json(const nlohmann::json& j);

// Byte-stable for a given report.
void emit_report(const Report& report, std::ostream& out, Format format);
// Throws std::ios_base::failure when the file cannot be written.
void emit_report(const Report& report, const std::string& path, Format format);

}  // namespace ontoneg::harness
