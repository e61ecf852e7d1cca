#pragma once

// Estimate reports: the byte-stable report.json plus CSV series and plot data.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "mafl/estimates.hpp"

namespace mafl {

inline constexpr int kReportSchemaVersion = 1;

struct SeriesRow {
  std::string run;
  CheckpointDiagnostics d;
};

struct LevelRow {
  std::string run;
  double t0 = 0.0;
  double s = 0.0;
  double phi = 0.0;
};

struct EstimateReport {
  std::string scenario;
  std::string scenario_hash;
  bool complete = true;
  std::string error;
  /// One entry per (Theta, operator) variant: constants ledger and run facts.
  nlohmann::json runs = nlohmann::json::array();
  std::vector<CheckRecord> records;
  std::vector<SeriesRow> series;
  std::vector<LevelRow> levels;
  /// Wall-clock seconds per stage; kept out of report.json.
  nlohmann::json timing = nlohmann::json::object();

  bool pass() const;
  nlohmann::json to_json() const;
};

/// Fixed-format double for CSV output (%.17g, "nan"/"inf" spelled out).
std::string format_double(double x);

std::string series_csv(const EstimateReport& r);
std::string levels_csv(const EstimateReport& r);
std::string sup_abs_csv(const EstimateReport& r);

/// Writes report.json, series.csv, levels.csv, sup_abs.csv and timing.json into dir.
void emit_report(const EstimateReport& r, const std::filesystem::path& dir);

}  // namespace mafl
