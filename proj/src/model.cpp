#include "stix/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace stix {

namespace {

void require(bool ok, const char* field, const std::string& msg) {
  if (!ok) throw std::invalid_argument(std::string(field) + ": " + msg);
}

}  // namespace

void SystemParams::validate() const {
  require(kappa_per_ps >= 0, "kappa_per_ps", "rate must be >= 0");
  require(gamma_per_ps >= 0, "gamma_per_ps", "rate must be >= 0");
  require(dephasing_per_ps >= 0, "dephasing_per_ps", "rate must be >= 0");
  require(fwhm_tpe_ps > 0, "fwhm_tpe_ps", "FWHM must be > 0");
  require(fwhm_stim_ps > 0, "fwhm_stim_ps", "FWHM must be > 0");
  require(n_max >= 1, "n_max", "must be >= 1");
  require(e_b_mev >= 0, "e_b_mev", "binding energy must be >= 0");
  if (resonant_tpe) {
    require(std::abs(delta_xl_mev - 0.5 * e_b_mev) < 1e-9, "delta_xl_mev",
            "resonant TPE requires delta_xl = e_b/2");
  }
}

SystemParams SystemParams::table1() { return SystemParams{}; }

SystemParams SystemParams::experiment() {
  SystemParams p;
  p.delay_ps = 7.0;
  return p;
}

bool operator==(const SystemParams& a, const SystemParams& b) {
  return a.delta_cx_mev == b.delta_cx_mev && a.delta_xl_mev == b.delta_xl_mev &&
         a.delta_stim_mev == b.delta_stim_mev && a.e_b_mev == b.e_b_mev &&
         a.g_mev == b.g_mev && a.kappa_per_ps == b.kappa_per_ps &&
         a.gamma_per_ps == b.gamma_per_ps && a.fwhm_tpe_ps == b.fwhm_tpe_ps &&
         a.fwhm_stim_ps == b.fwhm_stim_ps && a.delay_ps == b.delay_ps &&
         a.temperature_k == b.temperature_k && a.n_max == b.n_max &&
         a.dephasing_per_ps == b.dephasing_per_ps &&
         a.resonant_tpe == b.resonant_tpe;
}

void PulseParams::validate() const {
  if (sigma_ps <= 0) throw std::invalid_argument("sigma_ps: must be > 0");
  if (area_rad < 0) throw std::invalid_argument("area_rad: must be >= 0");
}

double sigma_from_fwhm(double fwhm) {
  return fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
}

PulseParams PulseParams::tpe(double area_rad, const SystemParams& p) {
  return PulseParams{area_rad, sigma_from_fwhm(p.fwhm_tpe_ps), 0.0,
                     PulseRole::TPE};
}

PulseParams PulseParams::stim(double area_rad, const SystemParams& p) {
  return PulseParams{area_rad, sigma_from_fwhm(p.fwhm_stim_ps), p.delay_ps,
                     PulseRole::Stim};
}

double envelope(const PulseParams& pulse, double t) {
  const double u = t - pulse.center_ps;
  if (std::abs(u) > 8.0 * pulse.sigma_ps) return 0.0;
  const double s = pulse.sigma_ps;
  return pulse.area_rad / (std::sqrt(2.0 * M_PI) * s) *
         std::exp(-u * u / (2.0 * s * s));
}

Matrix build_static_hamiltonian(const HilbertSpace& space,
                                const SystemParams& params) {
  const int d = space.dim_total();
  Matrix h = Matrix::Zero(d, d);

  // Diagonal: exciton / biexciton / photon rotating-frame energies.
  const double e_x = params.delta_xl_mev;
  const double e_xx = 2.0 * params.delta_xl_mev - params.e_b_mev;
  const double e_ph = params.delta_cl_mev();
  for (int i = 0; i < d; ++i) {
    QdState q;
    int nh, nv;
    space.decompose(i, q, nh, nv);
    double e = e_ph * (nh + nv);
    if (q == QdState::xH || q == QdState::xV) e += e_x;
    if (q == QdState::xx) e += e_xx;
    h(i, i) = e;
  }

  // QD-cavity coupling: hbar*g a_H (|xH><g| + |xx><xH|) + h.c., same for V.
  const Matrix a = annihilation(space.photon_dim());
  const Matrix a_h = embed(space, a, Subsystem::PhotonH);
  const Matrix a_v = embed(space, a, Subsystem::PhotonV);
  const Matrix up_h = embed(space,
                            qd_transition(QdState::xH, QdState::g) +
                                qd_transition(QdState::xx, QdState::xH),
                            Subsystem::QD);
  const Matrix up_v = embed(space,
                            qd_transition(QdState::xV, QdState::g) +
                                qd_transition(QdState::xx, QdState::xV),
                            Subsystem::QD);
  Matrix coup = params.g_mev * (a_h * up_h + a_v * up_v);
  h += coup + coup.adjoint();
  return h;
}

Matrix build_tpe_hamiltonian(const HilbertSpace& space,
                             const SystemParams& params,
                             const PulseParams& pulse, double t) {
  (void)params;
  const double f = envelope(pulse, t);
  Matrix qd = qd_transition(QdState::g, QdState::xH) +
              qd_transition(QdState::g, QdState::xV) +
              qd_transition(QdState::xH, QdState::xx) +
              qd_transition(QdState::xV, QdState::xx);
  qd += qd.adjoint().eval();
  return embed(space, Matrix(-0.5 * kHbarMevPs * f * qd), Subsystem::QD);
}

Matrix build_stim_hamiltonian(const HilbertSpace& space,
                              const SystemParams& params,
                              const PulseParams& pulse, double t) {
  const double f = envelope(pulse, t);
  const double omega = params.delta_stim_mev / kHbarMevPs;  // rad/ps
  const Complex phase = std::exp(Complex(0.0, omega * t));
  Matrix lower = qd_transition(QdState::g, QdState::xH) +
                 qd_transition(QdState::xH, QdState::xx);
  Matrix qd = -0.5 * kHbarMevPs * f * phase * lower;
  qd += qd.adjoint().eval();
  return embed(space, qd, Subsystem::QD);
}

Matrix lindblad_dissipator(const Matrix& rho, const Matrix& op, double rate) {
  if (rate < 0) throw std::domain_error("lindblad_dissipator: negative rate");
  if (op.rows() != rho.rows() || op.cols() != rho.cols())
    throw std::domain_error("lindblad_dissipator: dimension mismatch");
  const Matrix n = op.adjoint() * op;
  return rate * (op * rho * op.adjoint() - 0.5 * (n * rho + rho * n));
}

std::vector<std::pair<Matrix, double>> collapse_operators(
    const HilbertSpace& space, const SystemParams& params) {
  std::vector<std::pair<Matrix, double>> ops;
  const Matrix a = annihilation(space.photon_dim());
  ops.emplace_back(embed(space, a, Subsystem::PhotonH), params.kappa_per_ps);
  ops.emplace_back(embed(space, a, Subsystem::PhotonV), params.kappa_per_ps);
  const QdState lowers[4][2] = {{QdState::g, QdState::xH},
                                {QdState::g, QdState::xV},
                                {QdState::xH, QdState::xx},
                                {QdState::xV, QdState::xx}};
  for (const auto& lw : lowers) {
    ops.emplace_back(embed(space, qd_transition(lw[0], lw[1]), Subsystem::QD),
                     params.gamma_per_ps);
  }
  if (params.dephasing_per_ps > 0) {
    for (QdState s : {QdState::xH, QdState::xV, QdState::xx}) {
      ops.emplace_back(embed(space, qd_transition(s, s), Subsystem::QD),
                       params.dephasing_per_ps);
    }
  }
  return ops;
}

Matrix total_rhs(const HilbertSpace& space, const SystemParams& params,
                 const PulseParams& tpe, const PulseParams* stim, double t,
                 const Matrix& rho) {
  Matrix h = build_static_hamiltonian(space, params);
  h += build_tpe_hamiltonian(space, params, tpe, t);
  if (stim) h += build_stim_hamiltonian(space, params, *stim, t);
  const Complex mi_over_hbar(0.0, -1.0 / kHbarMevPs);
  Matrix out = mi_over_hbar * (h * rho - rho * h);
  for (const auto& [op, rate] : collapse_operators(space, params)) {
    if (rate > 0) out += lindblad_dissipator(rho, op, rate);
  }
  return out;
}

}  // namespace stix
