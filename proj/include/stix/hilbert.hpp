#pragma once

#include <Eigen/Dense>
#include <complex>

// Composite Hilbert-space bookkeeping for a four-level quantum dot coupled
// to two Fock-truncated bosonic modes (H and V polarization).

namespace stix {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

enum class QdState : int { g = 0, xH = 1, xV = 2, xx = 3 };

enum class Subsystem { QD, PhotonH, PhotonV };

/// Basis ordering is QD-major, then n_H, then n_V:
/// index = qd * (n_max+1)^2 + n_H * (n_max+1) + n_V.
class HilbertSpace {
 public:
  static constexpr int kDimQd = 4;

  explicit HilbertSpace(int n_max);

  int n_max() const { return n_max_; }
  int photon_dim() const { return n_max_ + 1; }
  int dim_total() const { return kDimQd * photon_dim() * photon_dim(); }

  int basis_index(QdState qd, int n_h, int n_v) const;

  /// Inverse of basis_index.
  void decompose(int index, QdState& qd, int& n_h, int& n_v) const;

 private:
  int n_max_;
};

/// Bosonic lowering operator on a (dim x dim) truncated Fock space.
Matrix annihilation(int dim);

/// 4x4 quantum-dot transition operator |to><from|.
Matrix qd_transition(QdState to, QdState from);

/// Kronecker product, row-major convention matching basis_index.
Matrix kron(const Matrix& a, const Matrix& b);

/// Lift a subsystem operator to the full space (identity on the other factors).
Matrix embed(const HilbertSpace& space, const Matrix& op, Subsystem where);

/// Trace out everything but `keep`. Preserves trace and Hermiticity.
Matrix partial_trace(const HilbertSpace& space, const Matrix& rho,
                     Subsystem keep);

// Density-matrix diagnostics.
double hermiticity_error(const Matrix& rho);    // max |rho - rho^dagger|
double trace_error(const Matrix& rho);          // |tr(rho) - 1|
double min_eigenvalue(const Matrix& rho);       // of (rho + rho^dagger)/2

/// Throws std::runtime_error if rho violates the density-matrix invariants
/// (Hermitian to 1e-10, unit trace to 1e-8, min eigenvalue >= -1e-8).
void validate_density_matrix(const Matrix& rho);

}  // namespace stix
