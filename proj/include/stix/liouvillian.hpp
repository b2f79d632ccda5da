#pragma once

#include <Eigen/Sparse>
#include <memory>
#include <optional>
#include <vector>

#include "stix/model.hpp"

// Precomputed master-equation generator. The right-hand side is evaluated in
// an interaction picture with respect to the diagonal of the static
// Hamiltonian: the state sigma(t) relates to the lab-frame density matrix by
// an elementwise phase, sigma_ij = exp(i (D_i - D_j) t / hbar) rho_ij. This
// removes the fast free rotation from the integrated state while leaving all
// dissipators form-invariant (every collapse operator has a uniform Bohr
// frequency with respect to D), so a fixed-step integrator can use steps set
// by the physical rates rather than by the rotating-frame detunings.

namespace stix {

/// One classical drive term: H(t) = f(t) * (e^{i omega t} B + h.c.).
struct DriveTerm {
  PulseParams pulse;
  double omega_rad_per_ps = 0.0;
  Matrix b;  // meV
};

class Generator {
 public:
  Generator(Matrix h_static_mev, std::vector<DriveTerm> drives,
            std::vector<std::pair<Matrix, double>> collapse);

  static Generator full_model(const HilbertSpace& space,
                              const SystemParams& params,
                              const PulseParams& tpe,
                              const std::optional<PulseParams>& stim);

  /// Four-level approximation: photon modes and their coupling omitted.
  static Generator qd_only(const SystemParams& params, const PulseParams& tpe,
                           const std::optional<PulseParams>& stim);

  int dim() const { return dim_; }
  const Matrix& h_static() const { return h_static_; }
  const std::vector<DriveTerm>& drives() const { return drives_; }
  const std::vector<std::pair<Matrix, double>>& collapse() const {
    return collapse_;
  }

  /// d(sigma)/dt in the interaction picture. `sigma` must be Hermitian.
  void rhs(double t, const Matrix& sigma, Matrix& out) const;

  /// Earliest/latest time at which any drive envelope is nonzero.
  double pulses_start() const;
  double pulses_end() const;

  /// Elementwise frame transforms between sigma (interaction picture)
  /// and rho (lab/rotating frame).
  Matrix to_lab(double t, const Matrix& sigma) const;
  Matrix to_frame(double t, const Matrix& rho) const;

  /// Dense vectorized Liouvillian of the static part (drives off),
  /// lab frame, column-major vec convention.
  Matrix static_liouvillian_dense() const;
  Eigen::SparseMatrix<Complex> static_liouvillian_sparse() const;

 private:
  struct SparseJump {
    std::vector<int> row, col;
    std::vector<Complex> w;
    double rate;
  };

  int dim_;
  Matrix h_static_;
  RealVector diag_energies_;   // D, meV
  Matrix h_offdiag_;           // static Hamiltonian minus its diagonal
  RealVector damping_diag_;    // (1/2) sum_k rate_k O_k^dag O_k (diagonal)
  std::vector<DriveTerm> drives_;
  std::vector<std::pair<Matrix, double>> collapse_;
  std::vector<SparseJump> jumps_;

  mutable Matrix work_h_, work_a_, work_m_;
  mutable Vector work_phase_;
};

/// Closes the integrals of linear observables over the truncated emission
/// tail: given rho(T), returns X = integral_T^inf (rho(t) - rho_ss) dt where
/// rho_ss is the vacuum ground state, by solving the (deflated) static
/// Liouvillian system. Requires a unique steady state.
class TailClosure {
 public:
  explicit TailClosure(const Generator& gen);
  Matrix integral_from(const Matrix& rho_final) const;

 private:
  int dim_;
  Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lu_;
};

}  // namespace stix
