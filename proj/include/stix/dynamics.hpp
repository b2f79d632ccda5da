#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "stix/liouvillian.hpp"

// Fixed-step RK4 propagation of the master equation with observable
// recording, plus the time-integrated emission metrics. Slow emission tails
// (the biexciton lifetime is 1/(2 gamma) = 500 ps at default parameters) are
// closed in exact arithmetic through TailClosure instead of brute-force
// integration, so runs stay fast without truncating the occupation integral.

namespace stix {

/// Raised when the evolved state breaks a density-matrix invariant; the
/// message carries the simulation time at which it happened.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IntegrationOptions {
  double dt_pulse_ps = 0.0;   // step while any envelope is live; 0 = sigma_min/64
  double dt_free_ps = 0.025;  // step outside the pulse window
  double tail_window_ps = 0.0;  // free-decay window after the pulses; 0 = auto
  int checkpoint_stride = 50;   // validate invariants every this many steps
  double excited_stop_threshold = 1e-6;  // early stop when excited pop drops below
  bool validate_checkpoints = true;
  std::optional<double> t_start_ps;  // override the automatic window
  std::optional<double> t_end_ps;
};

struct TrajectoryRecord {
  std::vector<double> times;  // ps

  // QD populations (generic generators record the leading diagonal entries).
  std::vector<double> pop_g, pop_xh, pop_xv, pop_xx;

  // Reduced H-mode photon matrix elements (empty for QD-only runs).
  std::vector<double> ph_p00, ph_p11, ph_pnn;
  std::vector<Complex> ph_p01;
  std::vector<double> pnc_instant;  // |rho^ph_{0,1}|
  std::vector<double> flux_h;       // kappa * rho^ph_{1,1}, 1/ps

  std::vector<double> coh_gxh;  // |rho^QD_{g,xH}|
  std::vector<double> coh_gxx;  // |rho^QD_{g,xx}| (pi/2 calibration metric)

  double max_trace_error = 0.0;
  double max_hermiticity_error = 0.0;

  Matrix rho_final;       // lab/rotating frame at t_final
  double t_final = 0.0;
  bool has_photons = false;
  int n_max = 0;
  bool early_stopped = false;
};

struct IntegratedMetrics {
  double occ_calc = 0.0;         // kappa * int rho^ph_{1,1} dt
  double pnc_calc = 0.0;         // kappa * int |rho^ph_{0,1}| dt
  double v_calc = 0.0;           // pnc^2 / occ
  double xh_yield_qdonly = 0.0;  // gamma * int rho_{xH,xH} dt
  double pnc_qdonly = 0.0;       // (gamma/2) * int |rho_{g,xH}| dt
  bool v_guarded = false;        // occ below 1e-12; v reported as 0
};

/// Full-model evolution from the ground state with no photons. The reX scheme
/// is stim = nullopt. Throws std::invalid_argument on configuration errors
/// and NumericalError on invariant breaches.
TrajectoryRecord evolve(const SystemParams& params, const PulseParams& tpe,
                        const std::optional<PulseParams>& stim,
                        const IntegrationOptions& opts = {});

/// Four-level approximation (no photon modes), dim 4.
TrajectoryRecord evolve_qd_only(const SystemParams& params,
                                const PulseParams& tpe,
                                const std::optional<PulseParams>& stim,
                                const IntegrationOptions& opts = {});

/// Propagate an arbitrary generator from rho0. Records diagonal populations
/// into pop_* (first four diagonal entries, or fewer for smaller systems).
TrajectoryRecord evolve_custom(const Generator& gen, const Matrix& rho0,
                               const IntegrationOptions& opts = {});

/// Time-integrated metrics. If `closure` is given (built from the same
/// generator), the linear occupation integrals are extended to t = infinity
/// exactly; otherwise they stop at the trajectory end. The QD-only coherence
/// integral gets an analytic exponential tail (its free decay rate is
/// (gamma + dephasing)/2).
IntegratedMetrics integrated_metrics(const TrajectoryRecord& traj,
                                     const SystemParams& params,
                                     const TailClosure* closure = nullptr);

/// Max deviation of RK4 propagation against the dense matrix exponential of
/// the static vectorized Liouvillian over [0, t_span], normalized by the
/// largest oracle matrix entry. The generator must have no active drives.
double rhs_oracle_check(const Generator& gen, const Matrix& rho0,
                        double t_span, double dt);

/// Composite quadrature (Simpson on locally uniform runs, trapezoid at
/// spacing changes) of y over the grid t.
double integrate_series(const std::vector<double>& t,
                        const std::vector<double>& y);

}  // namespace stix
