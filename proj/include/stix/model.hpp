#pragma once

#include <optional>
#include <vector>

#include "stix/hilbert.hpp"

// Rotating-frame Hamiltonian terms, Gaussian pulse envelopes and Lindblad
// dissipators for the two-photon-excitation (TPE) / stimulation model.
// Units: energies in meV, times in ps, rates in 1/ps. All frequencies are
// stored as hbar*omega energies.

namespace stix {

inline constexpr double kHbarMevPs = 0.6582119569;  // meV * ps

struct SystemParams {
  double delta_cx_mev = 0.0;    // cavity-exciton detuning
  double delta_xl_mev = 2.0;    // exciton-laser detuning
  double delta_stim_mev = -2.0; // stim-laser detuning, signed
  double e_b_mev = 4.0;         // biexciton binding energy
  double g_mev = 0.05;          // QD-cavity coupling (hbar*g)
  double kappa_per_ps = 0.577;  // cavity loss rate
  double gamma_per_ps = 0.001;  // QD loss rate
  double fwhm_tpe_ps = 4.5;
  double fwhm_stim_ps = 3.0;
  double delay_ps = 15.0;       // stim pulse delay
  double temperature_k = 1.5;   // carried but inert (no phonon model)
  int n_max = 2;
  double dephasing_per_ps = 0.0;  // phenomenological pure dephasing
  bool resonant_tpe = true;       // enforce delta_xl = e_b/2

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  static SystemParams table1();      // delay 15 ps
  static SystemParams experiment();  // delay 7 ps

  /// cavity-laser detuning = delta_cx + delta_xl
  double delta_cl_mev() const { return delta_cx_mev + delta_xl_mev; }
};

bool operator==(const SystemParams& a, const SystemParams& b);

enum class PulseRole { TPE, Stim };

struct PulseParams {
  double area_rad = 0.0;
  double sigma_ps = 1.0;
  double center_ps = 0.0;
  PulseRole role = PulseRole::TPE;

  void validate() const;

  static PulseParams tpe(double area_rad, const SystemParams& p);
  static PulseParams stim(double area_rad, const SystemParams& p);
};

double sigma_from_fwhm(double fwhm);

/// Gaussian envelope area/(sqrt(2 pi) sigma) exp(-(t-center)^2/(2 sigma^2)),
/// clipped to exactly zero beyond +-8 sigma from the center.
double envelope(const PulseParams& pulse, double t);

/// Time-independent rotating-frame Hamiltonian (QD + photon + coupling), meV.
Matrix build_static_hamiltonian(const HilbertSpace& space,
                                const SystemParams& params);

/// TPE drive term at time t, meV. Real symmetric in this basis.
Matrix build_tpe_hamiltonian(const HilbertSpace& space,
                             const SystemParams& params,
                             const PulseParams& pulse, double t);

/// Stimulation drive term at time t, meV.
Matrix build_stim_hamiltonian(const HilbertSpace& space,
                              const SystemParams& params,
                              const PulseParams& pulse, double t);

/// rate * (O rho O^dag - 1/2 {O^dag O, rho}). Traceless for any rho.
Matrix lindblad_dissipator(const Matrix& rho, const Matrix& op, double rate);

/// Full right-hand side of the Liouville-von Neumann equation:
/// -(i/hbar)[H(t), rho] + dissipators. Reference implementation; the
/// integrator uses the equivalent precomputed form in liouvillian.hpp.
Matrix total_rhs(const HilbertSpace& space, const SystemParams& params,
                 const PulseParams& tpe, const PulseParams* stim, double t,
                 const Matrix& rho);

/// Collapse operators with rates for the full model, in full-space dimensions.
std::vector<std::pair<Matrix, double>> collapse_operators(
    const HilbertSpace& space, const SystemParams& params);

}  // namespace stix
