#pragma once

#include <functional>
#include <string>
#include <vector>

#include "stix/dynamics.hpp"

// Pulse-area calibration and 1D/2D parameter scans. Grid cells are pure and
// independent; the engine may execute them across a worker pool, and results
// are assembled in grid order so serial and parallel runs are identical.

namespace stix {

struct CalibrationInfo {
  double pi_area = 0.0;       // nominal TPE area at the first XX-peak maximum
  double half_pi_area = 0.0;  // first maximum of peak |rho_{g,xx}|
};

enum class Scheme { reX, stiX };
enum class SweepMode { Full, QdOnly };

std::string scheme_name(Scheme s);

/// Locate the first interior local maximum of `metric` over nominal areas in
/// [0, a_max]: coarse scan of `coarse_points` samples, then golden-section
/// refinement to `rel_tol` relative. Throws std::runtime_error when the
/// coarse scan has no interior maximum (a_max too small).
double calibrate_core(const std::function<double(double)>& metric,
                      double a_max, int coarse_points = 25,
                      double rel_tol = 1e-3);

/// Nominal-area calibration against the full model with the stim pulse off.
CalibrationInfo calibrate_pi(const SystemParams& params,
                             const IntegrationOptions& opts = {});

struct SweepRow {
  IntegratedMetrics metrics;
  double xx_peak = 0.0;  // peak biexciton occupation over the trajectory
};

struct SweepResult {
  std::vector<double> axis1;     // control values (1D) or row values (2D)
  std::vector<double> axis2;     // empty for 1D sweeps; column values for 2D
  std::vector<double> area_rad;  // raw TPE area per row where applicable
  std::vector<SweepRow> rows;    // row-major over (axis1, axis2)
  CalibrationInfo calibration;
  SystemParams params;
  std::string axis1_name, axis2_name;
  std::string scheme;
};

/// Fig. 3d-e style scan: TPE area in units of the calibrated pi area.
/// stiX fixes the stimulating pulse to area pi at the configured delay.
SweepResult sweep_tpe_area(const SystemParams& params,
                           const std::vector<double>& areas_pi_units,
                           Scheme scheme, const CalibrationInfo& cal,
                           const IntegrationOptions& opts = {}, int jobs = 1);

/// Delay scan at fixed TPE area (radians); the stim pulse (area pi) is moved.
SweepResult sweep_delay(const SystemParams& params,
                        const std::vector<double>& delays_ps,
                        double tpe_area_rad, SweepMode mode,
                        const IntegrationOptions& opts = {}, int jobs = 1);

/// 2D map over (delay, area), rows = delays, cols = areas, row-major rows.
SweepResult map_area_delay(const SystemParams& params,
                           const std::vector<double>& areas_pi_units,
                           const std::vector<double>& delays_ps, SweepMode mode,
                           const CalibrationInfo& cal,
                           const IntegrationOptions& opts = {}, int jobs = 1);

std::vector<double> linspace(double a, double b, int n);

}  // namespace stix
