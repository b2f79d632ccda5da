#include "stix/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unsupported/Eigen/MatrixFunctions>

namespace stix {

namespace {

enum class ExtractMode { Full, QdOnly, Generic };

double coherence_decay_rate(const SystemParams& p) {
  return 0.5 * (p.gamma_per_ps + p.dephasing_per_ps);
}

double auto_tail_window(const SystemParams& p, bool has_photons) {
  if (!has_photons) return 10.0;  // populations and coherence closed exactly
  // Photon coherence drains on the Purcell / radiative-coherence scale.
  const double g_rad = p.g_mev / kHbarMevPs;
  const double gamma_coh =
      0.5 * (4.0 * g_rad * g_rad / p.kappa_per_ps + p.gamma_per_ps);
  return std::max(10.0 / p.kappa_per_ps, 8.0 / gamma_coh);
}

double min_drive_sigma(const Generator& gen) {
  double s = std::numeric_limits<double>::infinity();
  for (const auto& d : gen.drives()) s = std::min(s, d.pulse.sigma_ps);
  return s;
}

void rk4_step(const Generator& gen, double t, double h, Matrix& s, Matrix& k1,
              Matrix& k2, Matrix& k3, Matrix& k4, Matrix& tmp) {
  gen.rhs(t, s, k1);
  tmp = s + (0.5 * h) * k1;
  gen.rhs(t + 0.5 * h, tmp, k2);
  tmp = s + (0.5 * h) * k2;
  gen.rhs(t + 0.5 * h, tmp, k3);
  tmp = s + h * k3;
  gen.rhs(t + h, tmp, k4);
  s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct Recorder {
  ExtractMode mode;
  int p = 0;  // photon_dim for Full
  double kappa = 0.0;
  TrajectoryRecord* out;

  // basis index (q, n_H, n_V) -> (q*p + h)*p + v
  int idx(int q, int h, int v) const { return (q * p + h) * p + v; }

  void operator()(double t, const Matrix& sigma) const {
    TrajectoryRecord& r = *out;
    r.times.push_back(t);
    const int dim = static_cast<int>(sigma.rows());
    switch (mode) {
      case ExtractMode::Full: {
        double pops[4] = {0, 0, 0, 0};
        double p00 = 0, p11 = 0, pnn = 0;
        Complex p01 = 0, gx = 0, gxx = 0;
        for (int q = 0; q < 4; ++q)
          for (int h = 0; h < p; ++h)
            for (int v = 0; v < p; ++v) {
              const int i = idx(q, h, v);
              pops[q] += sigma(i, i).real();
              if (q == 0) {
                gx += sigma(idx(0, h, v), idx(1, h, v));
                gxx += sigma(idx(0, h, v), idx(3, h, v));
              }
            }
        for (int q = 0; q < 4; ++q)
          for (int v = 0; v < p; ++v) {
            p00 += sigma(idx(q, 0, v), idx(q, 0, v)).real();
            p11 += sigma(idx(q, 1, v), idx(q, 1, v)).real();
            pnn += sigma(idx(q, p - 1, v), idx(q, p - 1, v)).real();
            p01 += sigma(idx(q, 0, v), idx(q, 1, v));
          }
        r.pop_g.push_back(pops[0]);
        r.pop_xh.push_back(pops[1]);
        r.pop_xv.push_back(pops[2]);
        r.pop_xx.push_back(pops[3]);
        r.ph_p00.push_back(p00);
        r.ph_p11.push_back(p11);
        r.ph_pnn.push_back(pnn);
        r.ph_p01.push_back(p01);
        r.pnc_instant.push_back(std::abs(p01));
        r.flux_h.push_back(kappa * p11);
        r.coh_gxh.push_back(std::abs(gx));
        r.coh_gxx.push_back(std::abs(gxx));
        break;
      }
      case ExtractMode::QdOnly:
        r.pop_g.push_back(sigma(0, 0).real());
        r.pop_xh.push_back(sigma(1, 1).real());
        r.pop_xv.push_back(sigma(2, 2).real());
        r.pop_xx.push_back(sigma(3, 3).real());
        r.coh_gxh.push_back(std::abs(sigma(0, 1)));
        r.coh_gxx.push_back(std::abs(sigma(0, 3)));
        break;
      case ExtractMode::Generic:
        r.pop_g.push_back(sigma(0, 0).real());
        r.pop_xh.push_back(dim > 1 ? sigma(1, 1).real() : 0.0);
        r.pop_xv.push_back(dim > 2 ? sigma(2, 2).real() : 0.0);
        r.pop_xx.push_back(dim > 3 ? sigma(3, 3).real() : 0.0);
        break;
    }
  }
};

void checkpoint_validate(const Matrix& sigma, const Recorder& rec, double t) {
  const double herm = hermiticity_error(sigma);
  if (herm > 1e-10)
    throw NumericalError("hermiticity residual " + std::to_string(herm) +
                         " at t = " + std::to_string(t) + " ps");
  const double terr = trace_error(sigma);
  if (terr > 1e-8)
    throw NumericalError("trace error " + std::to_string(terr) + " at t = " +
                         std::to_string(t) + " ps");
  const double lmin = min_eigenvalue(sigma);
  if (lmin < -1e-8)
    throw NumericalError("negative eigenvalue " + std::to_string(lmin) +
                         " at t = " + std::to_string(t) + " ps");
  if (rec.mode == ExtractMode::Full) {
    double p00 = 0, p11 = 0;
    Complex p01 = 0;
    for (int q = 0; q < 4; ++q)
      for (int v = 0; v < rec.p; ++v) {
        p00 += sigma(rec.idx(q, 0, v), rec.idx(q, 0, v)).real();
        p11 += sigma(rec.idx(q, 1, v), rec.idx(q, 1, v)).real();
        p01 += sigma(rec.idx(q, 0, v), rec.idx(q, 1, v));
      }
    if (std::norm(p01) > p00 * p11 + 1e-10)
      throw NumericalError("photon Cauchy-Schwarz violation at t = " +
                           std::to_string(t) + " ps");
  }
}

TrajectoryRecord run(const Generator& gen, const Matrix& rho0,
                     const IntegrationOptions& opts, ExtractMode mode,
                     int n_max, double kappa, double tail_window) {
  const int dim = gen.dim();
  if (rho0.rows() != dim || rho0.cols() != dim)
    throw std::invalid_argument("evolve: initial state dimension mismatch");

  const bool has_drives = !gen.drives().empty();
  const double sigma_min = has_drives ? min_drive_sigma(gen) : 0.0;
  double dt_pulse = opts.dt_pulse_ps;
  if (dt_pulse <= 0.0) dt_pulse = has_drives ? sigma_min / 64.0 : opts.dt_free_ps;
  if (has_drives && dt_pulse > sigma_min / 10.0)
    throw std::invalid_argument(
        "dt_pulse_ps: step exceeds sigma_min/10, refusing to integrate");
  if (opts.dt_free_ps <= 0.0)
    throw std::invalid_argument("dt_free_ps: must be > 0");

  const double pulses_start = has_drives ? gen.pulses_start() : 0.0;
  const double pulses_end = has_drives ? gen.pulses_end() : 0.0;
  const double t_start = opts.t_start_ps.value_or(pulses_start);
  const double t_end = opts.t_end_ps.value_or(pulses_end + tail_window);
  if (t_end < t_start)
    throw std::invalid_argument("t_end_ps: ends before the window starts");

  TrajectoryRecord traj;
  traj.has_photons = (mode == ExtractMode::Full);
  traj.n_max = n_max;

  Recorder rec{mode, n_max + 1, kappa, &traj};

  Matrix sigma = gen.to_frame(t_start, rho0);
  Matrix k1(dim, dim), k2(dim, dim), k3(dim, dim), k4(dim, dim), tmp(dim, dim);

  struct Segment {
    double t_end, dt;
  };
  std::vector<Segment> segments;
  if (has_drives && pulses_end > t_start && pulses_end < t_end)
    segments.push_back({std::max(pulses_end, t_start), dt_pulse});
  segments.push_back({t_end, (has_drives && t_end <= pulses_end)
                                 ? dt_pulse
                                 : opts.dt_free_ps});

  double t = t_start;
  long step_count = 0;
  rec(t, sigma);
  bool stopped = false;
  for (const auto& seg : segments) {
    if (seg.t_end <= t + 1e-12 || stopped) continue;
    const long n = std::max<long>(
        1, static_cast<long>(std::ceil((seg.t_end - t) / seg.dt - 1e-9)));
    const double h = (seg.t_end - t) / static_cast<double>(n);
    const double seg_t0 = t;
    for (long i = 0; i < n; ++i) {
      rk4_step(gen, t, h, sigma, k1, k2, k3, k4, tmp);
      t = seg_t0 + static_cast<double>(i + 1) * h;
      rec(t, sigma);
      {
        double terr = std::abs(sigma.trace().real() - 1.0);
        traj.max_trace_error = std::max(traj.max_trace_error, terr);
      }
      ++step_count;
      if (step_count % opts.checkpoint_stride == 0) {
        traj.max_hermiticity_error =
            std::max(traj.max_hermiticity_error, hermiticity_error(sigma));
        if (opts.validate_checkpoints) checkpoint_validate(sigma, rec, t);
        if (t >= pulses_end &&
            1.0 - sigma(0, 0).real() < opts.excited_stop_threshold) {
          traj.early_stopped = true;
          stopped = true;
          break;
        }
      }
    }
  }

  traj.max_hermiticity_error =
      std::max(traj.max_hermiticity_error, hermiticity_error(sigma));
  traj.t_final = t;
  traj.rho_final = gen.to_lab(t, sigma);
  return traj;
}

}  // namespace

TrajectoryRecord evolve(const SystemParams& params, const PulseParams& tpe,
                        const std::optional<PulseParams>& stim,
                        const IntegrationOptions& opts) {
  params.validate();
  const HilbertSpace space(params.n_max);
  const Generator gen = Generator::full_model(space, params, tpe, stim);
  Matrix rho0 = Matrix::Zero(gen.dim(), gen.dim());
  rho0(0, 0) = 1.0;  // ground state, no photons
  const double window =
      opts.tail_window_ps > 0 ? opts.tail_window_ps : auto_tail_window(params, true);
  return run(gen, rho0, opts, ExtractMode::Full, params.n_max,
             params.kappa_per_ps, window);
}

TrajectoryRecord evolve_qd_only(const SystemParams& params,
                                const PulseParams& tpe,
                                const std::optional<PulseParams>& stim,
                                const IntegrationOptions& opts) {
  params.validate();
  const Generator gen = Generator::qd_only(params, tpe, stim);
  Matrix rho0 = Matrix::Zero(4, 4);
  rho0(0, 0) = 1.0;
  const double window =
      opts.tail_window_ps > 0 ? opts.tail_window_ps : auto_tail_window(params, false);
  return run(gen, rho0, opts, ExtractMode::QdOnly, 0, 0.0, window);
}

TrajectoryRecord evolve_custom(const Generator& gen, const Matrix& rho0,
                               const IntegrationOptions& opts) {
  return run(gen, rho0, opts, ExtractMode::Generic, 0, 0.0,
             opts.tail_window_ps);
}

IntegratedMetrics integrated_metrics(const TrajectoryRecord& traj,
                                     const SystemParams& params,
                                     const TailClosure* closure) {
  IntegratedMetrics m;
  const double kappa = params.kappa_per_ps;
  const double gamma = params.gamma_per_ps;
  const int p = traj.n_max + 1;
  auto idx = [p](int q, int h, int v) { return (q * p + h) * p + v; };

  if (traj.has_photons) {
    m.occ_calc = kappa * integrate_series(traj.times, traj.ph_p11);
    m.pnc_calc = kappa * integrate_series(traj.times, traj.pnc_instant);
  }
  m.xh_yield_qdonly = gamma * integrate_series(traj.times, traj.pop_xh);
  m.pnc_qdonly = 0.5 * gamma * integrate_series(traj.times, traj.coh_gxh);

  if (closure != nullptr) {
    if (traj.rho_final.rows() == 0)
      throw std::invalid_argument("integrated_metrics: trajectory lacks a final state");
    const Matrix x = closure->integral_from(traj.rho_final);
    if (traj.has_photons) {
      double occ_tail = 0, xh_tail = 0;
      for (int q = 0; q < 4; ++q)
        for (int v = 0; v < p; ++v)
          occ_tail += x(idx(q, 1, v), idx(q, 1, v)).real();
      for (int h = 0; h < p; ++h)
        for (int v = 0; v < p; ++v)
          xh_tail += x(idx(1, h, v), idx(1, h, v)).real();
      m.occ_calc += kappa * occ_tail;
      m.xh_yield_qdonly += gamma * xh_tail;
    } else {
      m.xh_yield_qdonly += gamma * x(1, 1).real();
    }
  }
  if (!traj.has_photons && !traj.coh_gxh.empty()) {
    // After the pulses the g-xH coherence decays as a single exponential.
    const double rate = 0.5 * (params.gamma_per_ps + params.dephasing_per_ps);
    if (rate > 0)
      m.pnc_qdonly += 0.5 * gamma * traj.coh_gxh.back() / rate;
  }

  if (traj.has_photons) {
    if (m.occ_calc < 1e-12) {
      m.v_calc = 0.0;
      m.v_guarded = true;
    } else {
      m.v_calc = m.pnc_calc * m.pnc_calc / m.occ_calc;
    }
  }
  return m;
}

double rhs_oracle_check(const Generator& gen, const Matrix& rho0,
                        double t_span, double dt) {
  for (const auto& d : gen.drives())
    if (d.pulse.area_rad != 0.0)
      throw std::logic_error("rhs_oracle_check: generator must be static");
  const int d = gen.dim();

  // Oracle: dense matrix exponential of the vectorized Liouvillian.
  Matrix l = gen.static_liouvillian_dense();
  Matrix propagator = (l * t_span).exp();
  Vector v(d * d);
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < d; ++r) v(c * d + r) = rho0(r, c);
  Vector ve = propagator * v;
  Matrix exact(d, d);
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < d; ++r) exact(r, c) = ve(c * d + r);

  // Time stepping from the same initial condition.
  Matrix sigma = rho0;  // frame and lab coincide at t = 0
  Matrix k1(d, d), k2(d, d), k3(d, d), k4(d, d), tmp(d, d);
  const long n =
      std::max<long>(1, static_cast<long>(std::ceil(t_span / dt - 1e-9)));
  const double h = t_span / static_cast<double>(n);
  double t = 0.0;
  for (long i = 0; i < n; ++i) {
    rk4_step(gen, t, h, sigma, k1, k2, k3, k4, tmp);
    t = static_cast<double>(i + 1) * h;
  }
  Matrix stepped = gen.to_lab(t_span, sigma);

  const double scale = exact.cwiseAbs().maxCoeff();
  if (scale == 0.0) return (stepped - exact).cwiseAbs().maxCoeff();
  return (stepped - exact).cwiseAbs().maxCoeff() / scale;
}

double integrate_series(const std::vector<double>& t,
                        const std::vector<double>& y) {
  const size_t n = t.size();
  if (y.size() != n)
    throw std::invalid_argument("integrate_series: length mismatch");
  if (n < 2) return 0.0;
  double acc = 0.0;
  size_t i = 0;
  while (i + 1 < n) {
    if (i + 2 < n) {
      const double h1 = t[i + 1] - t[i];
      const double h2 = t[i + 2] - t[i + 1];
      if (std::abs(h1 - h2) < 1e-9 * std::max(h1, h2)) {
        acc += (h1 / 3.0) * (y[i] + 4.0 * y[i + 1] + y[i + 2]);
        i += 2;
        continue;
      }
    }
    acc += 0.5 * (t[i + 1] - t[i]) * (y[i] + y[i + 1]);
    ++i;
  }
  return acc;
}

}  // namespace stix
