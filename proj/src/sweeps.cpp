#include "stix/sweeps.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace stix {

namespace {

double series_max(const std::vector<double>& y) {
  return y.empty() ? 0.0 : *std::max_element(y.begin(), y.end());
}

/// Execute fn(0..n-1) across `jobs` workers; rethrows the first failure with
/// the offending grid point prepended.
void run_cells(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (const std::exception& e) {
        throw std::runtime_error("grid point " + std::to_string(i) + ": " +
                                 e.what());
      }
    }
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  int err_index = -1;
  std::exception_ptr err;
  auto work = [&] {
    for (int i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!err) {
          err = std::current_exception();
          err_index = i;
        }
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 0; j < jobs; ++j) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (err) {
    try {
      std::rethrow_exception(err);
    } catch (const std::exception& e) {
      throw std::runtime_error("grid point " + std::to_string(err_index) +
                               ": " + e.what());
    }
  }
}

/// Shared tail closure; SparseLU solves are serialized for thread safety.
class SharedClosure {
 public:
  explicit SharedClosure(const Generator& gen) : closure_(gen) {}
  IntegratedMetrics metrics(const TrajectoryRecord& traj,
                            const SystemParams& params) const {
    std::lock_guard<std::mutex> lock(mutex_);
    return integrated_metrics(traj, params, &closure_);
  }

 private:
  TailClosure closure_;
  mutable std::mutex mutex_;
};

}  // namespace

std::string scheme_name(Scheme s) { return s == Scheme::stiX ? "stix" : "rex"; }

double calibrate_core(const std::function<double(double)>& metric,
                      double a_max, int coarse_points, double rel_tol) {
  if (a_max <= 0 || coarse_points < 3)
    throw std::invalid_argument("calibrate_core: bad scan parameters");
  std::vector<double> a(coarse_points), y(coarse_points);
  for (int i = 0; i < coarse_points; ++i) {
    a[i] = a_max * static_cast<double>(i) / (coarse_points - 1);
    y[i] = metric(a[i]);
  }
  int peak = -1;
  for (int i = 1; i + 1 < coarse_points; ++i) {
    if (y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] > 1e-9) {
      peak = i;
      break;
    }
  }
  if (peak < 0)
    throw std::runtime_error(
        "calibrate_core: no interior maximum found; increase the scan range");

  double lo = a[peak - 1], hi = a[peak + 1];
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = metric(x1), f2 = metric(x2);
  while (hi - lo > rel_tol * 0.5 * (hi + lo)) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = metric(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = metric(x1);
    }
  }
  return 0.5 * (lo + hi);
}

CalibrationInfo calibrate_pi(const SystemParams& params,
                             const IntegrationOptions& opts) {
  params.validate();
  // One trajectory serves both metrics; probes stop shortly after the pulse
  // since both peaks occur inside the drive window.
  std::map<double, std::pair<double, double>> cache;
  auto probe = [&](double area) -> std::pair<double, double> {
    auto it = cache.find(area);
    if (it != cache.end()) return it->second;
    PulseParams tpe = PulseParams::tpe(area, params);
    IntegrationOptions o = opts;
    o.t_end_ps = tpe.center_ps + 8.0 * tpe.sigma_ps + 5.0;
    TrajectoryRecord traj = evolve(params, tpe, std::nullopt, o);
    auto val = std::make_pair(series_max(traj.pop_xx), series_max(traj.coh_gxx));
    cache.emplace(area, val);
    return val;
  };

  CalibrationInfo cal;
  cal.pi_area = calibrate_core([&](double a) { return probe(a).first; },
                               4.0 * M_PI);
  cal.half_pi_area = calibrate_core([&](double a) { return probe(a).second; },
                                    4.0 * M_PI);
  if (!(0 < cal.half_pi_area && cal.half_pi_area < cal.pi_area))
    throw std::runtime_error(
        "calibrate_pi: half-pi area not below pi area; calibration invalid");
  return cal;
}

namespace {

void check_axis(const std::vector<double>& axis, const char* name) {
  if (axis.empty())
    throw std::invalid_argument(std::string(name) + ": empty grid");
  for (size_t i = 1; i < axis.size(); ++i)
    if (axis[i] <= axis[i - 1])
      throw std::invalid_argument(std::string(name) +
                                  ": grid must be strictly increasing");
}

}  // namespace

SweepResult sweep_tpe_area(const SystemParams& params,
                           const std::vector<double>& areas_pi_units,
                           Scheme scheme, const CalibrationInfo& cal,
                           const IntegrationOptions& opts, int jobs) {
  params.validate();
  check_axis(areas_pi_units, "areas");
  if (cal.pi_area <= 0)
    throw std::invalid_argument("calibration: pi_area must be > 0");

  const HilbertSpace space(params.n_max);
  const SharedClosure closure(Generator::full_model(
      space, params, PulseParams::tpe(0.0, params), std::nullopt));

  SweepResult res;
  res.axis1 = areas_pi_units;
  res.axis1_name = "tpe_area_pi_units";
  res.calibration = cal;
  res.params = params;
  res.scheme = scheme_name(scheme);
  res.area_rad.resize(areas_pi_units.size());
  res.rows.resize(areas_pi_units.size());

  run_cells(static_cast<int>(areas_pi_units.size()), jobs, [&](int i) {
    const double area = areas_pi_units[static_cast<size_t>(i)] * cal.pi_area;
    PulseParams tpe = PulseParams::tpe(area, params);
    std::optional<PulseParams> stim;
    if (scheme == Scheme::stiX) stim = PulseParams::stim(M_PI, params);
    TrajectoryRecord traj = evolve(params, tpe, stim, opts);
    SweepRow row;
    row.metrics = closure.metrics(traj, params);
    row.xx_peak = series_max(traj.pop_xx);
    res.area_rad[static_cast<size_t>(i)] = area;
    res.rows[static_cast<size_t>(i)] = row;
  });
  return res;
}

SweepResult sweep_delay(const SystemParams& params,
                        const std::vector<double>& delays_ps,
                        double tpe_area_rad, SweepMode mode,
                        const IntegrationOptions& opts, int jobs) {
  params.validate();
  check_axis(delays_ps, "delays");

  std::unique_ptr<SharedClosure> closure;
  if (mode == SweepMode::Full) {
    const HilbertSpace space(params.n_max);
    closure = std::make_unique<SharedClosure>(Generator::full_model(
        space, params, PulseParams::tpe(0.0, params), std::nullopt));
  } else {
    closure = std::make_unique<SharedClosure>(Generator::qd_only(
        params, PulseParams::tpe(0.0, params), std::nullopt));
  }

  SweepResult res;
  res.axis1 = delays_ps;
  res.axis1_name = "delay_ps";
  res.params = params;
  res.scheme = "stix";
  res.area_rad.assign(delays_ps.size(), tpe_area_rad);
  res.rows.resize(delays_ps.size());

  run_cells(static_cast<int>(delays_ps.size()), jobs, [&](int i) {
    SystemParams p = params;
    p.delay_ps = delays_ps[static_cast<size_t>(i)];
    PulseParams tpe = PulseParams::tpe(tpe_area_rad, p);
    PulseParams stim = PulseParams::stim(M_PI, p);
    TrajectoryRecord traj = (mode == SweepMode::Full)
                                ? evolve(p, tpe, stim, opts)
                                : evolve_qd_only(p, tpe, stim, opts);
    SweepRow row;
    row.metrics = closure->metrics(traj, p);
    row.xx_peak = series_max(traj.pop_xx);
    res.rows[static_cast<size_t>(i)] = row;
  });
  return res;
}

SweepResult map_area_delay(const SystemParams& params,
                           const std::vector<double>& areas_pi_units,
                           const std::vector<double>& delays_ps, SweepMode mode,
                           const CalibrationInfo& cal,
                           const IntegrationOptions& opts, int jobs) {
  params.validate();
  check_axis(areas_pi_units, "areas");
  check_axis(delays_ps, "delays");
  if (cal.pi_area <= 0)
    throw std::invalid_argument("calibration: pi_area must be > 0");

  std::unique_ptr<SharedClosure> closure;
  if (mode == SweepMode::Full) {
    const HilbertSpace space(params.n_max);
    closure = std::make_unique<SharedClosure>(Generator::full_model(
        space, params, PulseParams::tpe(0.0, params), std::nullopt));
  } else {
    closure = std::make_unique<SharedClosure>(Generator::qd_only(
        params, PulseParams::tpe(0.0, params), std::nullopt));
  }

  const size_t n_area = areas_pi_units.size();
  const size_t n_delay = delays_ps.size();

  SweepResult res;
  res.axis1 = delays_ps;
  res.axis2 = areas_pi_units;
  res.axis1_name = "delay_ps";
  res.axis2_name = "tpe_area_pi_units";
  res.calibration = cal;
  res.params = params;
  res.scheme = "stix";
  res.area_rad.resize(n_area * n_delay);
  res.rows.resize(n_area * n_delay);

  run_cells(static_cast<int>(n_area * n_delay), jobs, [&](int k) {
    const size_t i = static_cast<size_t>(k) / n_area;  // delay index (row)
    const size_t j = static_cast<size_t>(k) % n_area;  // area index (col)
    SystemParams p = params;
    p.delay_ps = delays_ps[i];
    const double area = areas_pi_units[j] * cal.pi_area;
    PulseParams tpe = PulseParams::tpe(area, p);
    PulseParams stim = PulseParams::stim(M_PI, p);
    TrajectoryRecord traj = (mode == SweepMode::Full)
                                ? evolve(p, tpe, stim, opts)
                                : evolve_qd_only(p, tpe, stim, opts);
    SweepRow row;
    row.metrics = closure->metrics(traj, p);
    row.xx_peak = series_max(traj.pop_xx);
    res.area_rad[static_cast<size_t>(k)] = area;
    res.rows[static_cast<size_t>(k)] = row;
  });
  return res;
}

std::vector<double> linspace(double a, double b, int n) {
  if (n < 1) throw std::invalid_argument("linspace: n must be >= 1");
  std::vector<double> v(static_cast<size_t>(n));
  if (n == 1) {
    v[0] = a;
    return v;
  }
  for (int i = 0; i < n; ++i)
    v[static_cast<size_t>(i)] = a + (b - a) * static_cast<double>(i) / (n - 1);
  return v;
}

}  // namespace stix
