#pragma once

#include <Eigen/Dense>
#include <vector>

#include "stix/fitting.hpp"
#include "stix/hilbert.hpp"

// Measurement-side mathematics: MZI visibility from detector traces, the
// lambda (purity-fraction) fit and PNC reconstruction, blinking / quantum
// efficiency fits, coincidence-peak fitting for g2 and HOM, and the Jones
// matrix of the QWP-HWP-QWP phase shifter.

namespace stix {

struct DetectorTrace {
  std::vector<double> timestamps_s;
  std::vector<double> counts_1, counts_2;
};

struct VisibilityResult {
  double v1 = 0, v2 = 0, v_mean = 0;
  double raw_v1 = 0, raw_v2 = 0;  // from the true min/max, no percentiles
};

struct LambdaFit {
  double lambda = 0;  // in [0, 1]
  double v0 = 0;      // residual visibility intercept
  double slope = 0;
  double residual_rms = 0;
  bool clamped = false;  // noise pushed the estimator outside [0, 1]
};

struct BlinkingFit {
  double a = 0, b = 0;
  double tau_blinking_ms = 0;
  double g2_lt_zero = 0;  // a + b
  double qe = 0;          // 1 / (a + b)
  double rms = 0;
  Eigen::MatrixXd covariance;
};

struct CoincidenceHistogram {
  std::vector<double> delay_ns;  // uniform bin centers
  std::vector<double> counts;
};

struct PeakFit {
  double amplitude = 0, center_ns = 0, sigma_ns = 0;
  double area = 0;  // amplitude * sigma * sqrt(2 pi)
  bool ok = false;
};

struct CoincidencePeaks {
  PeakFit center;
  std::vector<PeakFit> side;  // at -2, -1, +1, +2 spacings
  double center_area = 0;
  double side_area_mean = 0;
  double ratio = 0;  // g2(0) estimate
};

/// Fringe visibility per detector, (N_max - N_min)/(N_max + N_min), with
/// N_max/N_min the 98th/2nd percentiles. Throws std::invalid_argument on an
/// all-zero trace.
VisibilityResult visibility_from_trace(const DetectorTrace& trace);

/// Linear least squares of v against rho00 (v ~ lambda^2 rho00 sqrt(V_HOM)
/// + v0); lambda = sqrt(slope / sqrt(v_hom)), clamped to [0, 1] with a flag.
/// Throws std::runtime_error (reporting the slope) when the slope is negative.
LambdaFit fit_lambda(const std::vector<std::pair<double, double>>& points,
                     double v_hom);

/// PNC estimate lambda * sqrt(rho11 (1 - rho11)).
double pnc_exp(double lambda, double rho11);

/// Fit g2(tau) = A exp(-|tau / tau_blinking|) + B on a long-timescale
/// histogram; QE = 1/(A+B).
BlinkingFit fit_blinking(const CoincidenceHistogram& histogram);

/// Gaussian fits of the zero-delay peak and the four side peaks at +-1 and
/// +-2 pulse spacings; ratio = center area / mean side area.
CoincidencePeaks fit_coincidence_peaks(const CoincidenceHistogram& histogram,
                                       double peak_spacing_ns,
                                       double window_ns);

/// HOM visibility from the zero-peak area ratios of the co- and
/// cross-polarized histograms: V = 1 - ratio_parallel / ratio_orthogonal.
double hom_visibility(double ratio_parallel, double ratio_orthogonal);

/// Jones matrix of the QWP(pi/4) HWP(theta) QWP(-pi/4) stack.
Eigen::Matrix2cd phase_shifter_jones(double theta);

double percentile(std::vector<double> values, double p);

double pearson_correlation(const std::vector<double>& x,
                           const std::vector<double>& y);

}  // namespace stix
