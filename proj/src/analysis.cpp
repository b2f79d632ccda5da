#include "stix/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace stix {

namespace {

void check_counts(const std::vector<double>& c, const char* name) {
  for (double v : c)
    if (v < 0 || !std::isfinite(v))
      throw std::invalid_argument(std::string(name) +
                                  ": counts must be finite and >= 0");
}

double detector_visibility(const std::vector<double>& counts, double p_lo,
                           double p_hi) {
  const double lo = percentile(counts, p_lo);
  const double hi = percentile(counts, p_hi);
  if (hi + lo <= 0)
    throw std::invalid_argument(
        "visibility_from_trace: zero count rate, visibility undefined");
  return (hi - lo) / (hi + lo);
}

}  // namespace

double percentile(std::vector<double> values, double p) {
  if (values.empty())
    throw std::invalid_argument("percentile: empty input");
  if (p < 0 || p > 100)
    throw std::invalid_argument("percentile: p outside [0, 100]");
  std::sort(values.begin(), values.end());
  const double pos = p / 100.0 * static_cast<double>(values.size() - 1);
  const size_t i = static_cast<size_t>(pos);
  if (i + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(i);
  return values[i] * (1.0 - frac) + values[i + 1] * frac;
}

VisibilityResult visibility_from_trace(const DetectorTrace& trace) {
  const size_t n = trace.timestamps_s.size();
  if (n == 0 || trace.counts_1.size() != n || trace.counts_2.size() != n)
    throw std::invalid_argument(
        "visibility_from_trace: series must be equal-length and non-empty");
  check_counts(trace.counts_1, "counts_1");
  check_counts(trace.counts_2, "counts_2");

  VisibilityResult r;
  r.v1 = detector_visibility(trace.counts_1, 2.0, 98.0);
  r.v2 = detector_visibility(trace.counts_2, 2.0, 98.0);
  r.raw_v1 = detector_visibility(trace.counts_1, 0.0, 100.0);
  r.raw_v2 = detector_visibility(trace.counts_2, 0.0, 100.0);
  r.v_mean = 0.5 * (r.v1 + r.v2);
  return r;
}

LambdaFit fit_lambda(const std::vector<std::pair<double, double>>& points,
                     double v_hom) {
  if (points.size() < 3)
    throw std::invalid_argument("fit_lambda: need at least 3 points");
  if (!(v_hom > 0 && v_hom <= 1))
    throw std::invalid_argument("fit_lambda: V_HOM must be in (0, 1]");

  const int n = static_cast<int>(points.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    a(i, 0) = points[static_cast<size_t>(i)].first;
    a(i, 1) = 1.0;
    y(i) = points[static_cast<size_t>(i)].second;
  }
  const Eigen::Vector2d beta =
      a.colPivHouseholderQr().solve(y);

  LambdaFit fit;
  fit.slope = beta(0);
  fit.v0 = beta(1);
  fit.residual_rms = std::sqrt((a * beta - y).squaredNorm() / n);
  if (fit.slope < 0)
    throw std::runtime_error("fit_lambda: negative slope " +
                             std::to_string(fit.slope) +
                             ", lambda undefined");
  fit.lambda = std::sqrt(fit.slope / std::sqrt(v_hom));
  if (fit.lambda > 1.0) {
    fit.lambda = 1.0;
    fit.clamped = true;
  }
  return fit;
}

double pnc_exp(double lambda, double rho11) {
  if (lambda < 0 || lambda > 1)
    throw std::invalid_argument("pnc_exp: lambda outside [0, 1]");
  if (rho11 < 0 || rho11 > 1)
    throw std::invalid_argument("pnc_exp: rho11 outside [0, 1]");
  return lambda * std::sqrt(rho11 * (1.0 - rho11));
}

BlinkingFit fit_blinking(const CoincidenceHistogram& histogram) {
  const size_t n = histogram.delay_ns.size();
  if (n < 10 || histogram.counts.size() != n)
    throw std::invalid_argument(
        "fit_blinking: need >= 10 equal-length bins");

  const std::vector<double>& x = histogram.delay_ns;
  const std::vector<double>& y = histogram.counts;

  // Initial guesses: B from the tail, A from the peak, tau from the
  // half-height width.
  std::vector<double> tail(y.end() - static_cast<long>(std::max<size_t>(3, n / 5)),
                           y.end());
  const double b0 = percentile(tail, 50.0);
  const double peak = *std::max_element(y.begin(), y.end());
  const double a0 = std::max(peak - b0, 1e-6);
  double tau0 = 0.0;
  {
    const double half = b0 + 0.5 * a0;
    for (size_t i = 0; i < n; ++i)
      if (y[i] > half) tau0 = std::max(tau0, std::abs(x[i]));
    if (tau0 <= 0) tau0 = 0.25 * (x.back() - x.front());
  }

  auto residual = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(static_cast<int>(n));
    for (size_t i = 0; i < n; ++i)
      r(static_cast<int>(i)) =
          p(0) * std::exp(-std::abs(x[i] / p(2))) + p(1) - y[i];
    return r;
  };
  Eigen::VectorXd p0(3);
  p0 << a0, b0, tau0;
  const FitResult res = levenberg_marquardt(residual, p0);

  BlinkingFit fit;
  fit.a = res.params(0);
  fit.b = res.params(1);
  fit.tau_blinking_ms = std::abs(res.params(2));
  fit.g2_lt_zero = fit.a + fit.b;
  if (fit.g2_lt_zero <= 0)
    throw std::runtime_error("fit_blinking: non-positive g2(0), QE undefined");
  fit.qe = 1.0 / fit.g2_lt_zero;
  fit.rms = res.rms;
  fit.covariance = res.covariance;
  return fit;
}

namespace {

PeakFit fit_one_peak(const CoincidenceHistogram& h, double center,
                     double window, double global_max) {
  PeakFit peak;
  std::vector<double> xs, ys;
  for (size_t i = 0; i < h.delay_ns.size(); ++i) {
    if (std::abs(h.delay_ns[i] - center) <= 0.5 * window) {
      xs.push_back(h.delay_ns[i]);
      ys.push_back(h.counts[i]);
    }
  }
  if (xs.size() < 5) return peak;  // ok stays false

  const double local_max = *std::max_element(ys.begin(), ys.end());
  if (local_max <= 1e-12 * std::max(global_max, 1.0)) {
    // Empty peak: report zero area instead of fitting an unidentifiable model.
    peak.center_ns = center;
    peak.ok = true;
    return peak;
  }

  const size_t imax = static_cast<size_t>(
      std::max_element(ys.begin(), ys.end()) - ys.begin());
  auto residual = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(static_cast<int>(xs.size()));
    for (size_t i = 0; i < xs.size(); ++i) {
      const double u = (xs[i] - p(1)) / p(2);
      r(static_cast<int>(i)) = p(0) * std::exp(-0.5 * u * u) - ys[i];
    }
    return r;
  };
  Eigen::VectorXd p0(3);
  p0 << local_max, xs[imax], window / 6.0;
  try {
    const FitResult res = levenberg_marquardt(residual, p0);
    peak.amplitude = res.params(0);
    peak.center_ns = res.params(1);
    peak.sigma_ns = std::abs(res.params(2));
    peak.area = peak.amplitude * peak.sigma_ns * std::sqrt(2.0 * M_PI);
    peak.ok = true;
  } catch (const std::runtime_error&) {
    peak.ok = false;
  }
  return peak;
}

}  // namespace

CoincidencePeaks fit_coincidence_peaks(const CoincidenceHistogram& histogram,
                                       double peak_spacing_ns,
                                       double window_ns) {
  if (histogram.delay_ns.size() != histogram.counts.size() ||
      histogram.delay_ns.size() < 10)
    throw std::invalid_argument(
        "fit_coincidence_peaks: need >= 10 equal-length bins");
  if (peak_spacing_ns <= 0 || window_ns <= 0)
    throw std::invalid_argument(
        "fit_coincidence_peaks: spacing and window must be > 0");

  const double global_max =
      *std::max_element(histogram.counts.begin(), histogram.counts.end());

  CoincidencePeaks out;
  out.center = fit_one_peak(histogram, 0.0, window_ns, global_max);
  for (double k : {-2.0, -1.0, 1.0, 2.0})
    out.side.push_back(
        fit_one_peak(histogram, k * peak_spacing_ns, window_ns, global_max));

  double side_sum = 0;
  int side_n = 0;
  for (const auto& p : out.side)
    if (p.ok) {
      side_sum += p.area;
      ++side_n;
    }
  if (!out.center.ok || side_n == 0)
    throw std::runtime_error(
        "fit_coincidence_peaks: center or all side-peak fits failed");
  out.center_area = out.center.area;
  out.side_area_mean = side_sum / side_n;
  if (out.side_area_mean <= 0)
    throw std::runtime_error(
        "fit_coincidence_peaks: side peaks have zero area");
  out.ratio = out.center_area / out.side_area_mean;
  return out;
}

double hom_visibility(double ratio_parallel, double ratio_orthogonal) {
  if (ratio_orthogonal <= 0)
    throw std::invalid_argument(
        "hom_visibility: orthogonal ratio must be > 0");
  return 1.0 - ratio_parallel / ratio_orthogonal;
}

Eigen::Matrix2cd phase_shifter_jones(double theta) {
  const Complex i(0.0, 1.0);
  const double c = std::cos(2.0 * theta), s = std::sin(2.0 * theta);
  Eigen::Matrix2cd qwp_plus, hwp, qwp_minus;
  qwp_plus << 1, -i, -i, 1;
  qwp_plus /= std::sqrt(2.0);
  hwp << c, s, s, -c;
  hwp *= -i;
  qwp_minus << 1, i, i, 1;
  qwp_minus /= std::sqrt(2.0);
  return qwp_plus * hwp * qwp_minus;
}

double pearson_correlation(const std::vector<double>& x,
                           const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("pearson_correlation: bad input lengths");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0 || syy <= 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace stix
