#pragma once

#include <cmath>
#include <json.hpp>
#include <string>
#include <vector>

#include "stix/analysis.hpp"
#include "stix/sweeps.hpp"

// File formats: CSV (UTF-8, header row, '.' decimal, shortest round-trip
// doubles so repeated runs are byte-identical) and JSON configs/reports.
// Every JSON document carries schema_version; readers reject unknown major
// versions.

namespace stix {

inline constexpr const char* kSchemaVersion = "1.0.0";

struct GridSpec {
  double min = 0.0, max = 0.0;
  int points = 1;
  std::vector<double> values() const;
};

struct RunConfig {
  SystemParams system;
  std::string scheme = "stix";  // "stix" | "rex"
  std::string mode = "full";    // "full" | "qd_only"
  double tpe_area_rad = M_PI;
  double stim_area_rad = M_PI;
  GridSpec area_grid{0.0, 2.0, 51};    // calibrated-pi units
  GridSpec delay_grid{-10.0, 40.0, 51};  // ps
  int jobs = 1;
  IntegrationOptions integration;

  void validate() const;  // throws std::invalid_argument naming the field
};

/// Shortest round-trip decimal representation (deterministic output files).
std::string format_double(double v);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

void write_trajectory_csv(const TrajectoryRecord& traj,
                          const std::string& path);
void write_sweep_csv(const SweepResult& result, const std::string& path);

/// Dense matrix of one metric field over a 2D sweep (rows = axis1 = delay,
/// cols = axis2 = area). field: occ_calc | pnc_calc | v_calc | xx_peak |
/// xh_yield_qdonly | pnc_qdonly.
void write_map_matrix_csv(const SweepResult& result, const std::string& field,
                          const std::string& path);

double sweep_field(const SweepRow& row, const std::string& field);

nlohmann::json system_params_to_json(const SystemParams& p);
SystemParams system_params_from_json(const nlohmann::json& j);
nlohmann::json calibration_to_json(const CalibrationInfo& c);
nlohmann::json metrics_to_json(const IntegratedMetrics& m);
nlohmann::json run_config_to_json(const RunConfig& c);
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

/// Throws std::invalid_argument when the document's schema_version has a
/// different major version than kSchemaVersion.
void check_schema_version(const nlohmann::json& j);

/// Column-oriented CSV reader; requires `columns` numeric columns per row
/// and reports the offending row number on malformed input.
std::vector<std::vector<double>> read_csv_columns(const std::string& path,
                                                  size_t columns);

DetectorTrace read_detector_trace_csv(const std::string& path);
CoincidenceHistogram read_histogram_csv(const std::string& path);

}  // namespace stix
