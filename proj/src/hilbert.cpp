#include "stix/hilbert.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <string>

namespace stix {

HilbertSpace::HilbertSpace(int n_max) : n_max_(n_max) {
  if (n_max < 0) {
    throw std::domain_error("HilbertSpace: n_max must be >= 0, got " +
                            std::to_string(n_max));
  }
}

int HilbertSpace::basis_index(QdState qd, int n_h, int n_v) const {
  if (n_h < 0 || n_h > n_max_ || n_v < 0 || n_v > n_max_) {
    throw std::domain_error("basis_index: Fock number out of range [0, " +
                            std::to_string(n_max_) + "]");
  }
  const int p = photon_dim();
  return static_cast<int>(qd) * p * p + n_h * p + n_v;
}

void HilbertSpace::decompose(int index, QdState& qd, int& n_h, int& n_v) const {
  const int p = photon_dim();
  if (index < 0 || index >= dim_total()) {
    throw std::domain_error("decompose: index out of range");
  }
  qd = static_cast<QdState>(index / (p * p));
  n_h = (index / p) % p;
  n_v = index % p;
}

Matrix annihilation(int dim) {
  Matrix a = Matrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

Matrix qd_transition(QdState to, QdState from) {
  Matrix m = Matrix::Zero(4, 4);
  m(static_cast<int>(to), static_cast<int>(from)) = 1.0;
  return m;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      c.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return c;
}

Matrix embed(const HilbertSpace& space, const Matrix& op, Subsystem where) {
  const int p = space.photon_dim();
  const Matrix iq = Matrix::Identity(4, 4);
  const Matrix ip = Matrix::Identity(p, p);
  switch (where) {
    case Subsystem::QD:
      if (op.rows() != 4 || op.cols() != 4)
        throw std::domain_error("embed: QD operator must be 4x4");
      return kron(kron(op, ip), ip);
    case Subsystem::PhotonH:
      if (op.rows() != p || op.cols() != p)
        throw std::domain_error("embed: photon operator dimension mismatch");
      return kron(kron(iq, op), ip);
    case Subsystem::PhotonV:
      if (op.rows() != p || op.cols() != p)
        throw std::domain_error("embed: photon operator dimension mismatch");
      return kron(kron(iq, ip), op);
  }
  throw std::domain_error("embed: bad subsystem");
}

Matrix partial_trace(const HilbertSpace& space, const Matrix& rho,
                     Subsystem keep) {
  const int p = space.photon_dim();
  const int d = space.dim_total();
  if (rho.rows() != d || rho.cols() != d)
    throw std::domain_error("partial_trace: dimension mismatch");

  auto idx = [&](int q, int h, int v) { return (q * p + h) * p + v; };

  if (keep == Subsystem::QD) {
    Matrix out = Matrix::Zero(4, 4);
    for (int q = 0; q < 4; ++q)
      for (int r = 0; r < 4; ++r)
        for (int h = 0; h < p; ++h)
          for (int v = 0; v < p; ++v)
            out(q, r) += rho(idx(q, h, v), idx(r, h, v));
    return out;
  }
  Matrix out = Matrix::Zero(p, p);
  if (keep == Subsystem::PhotonH) {
    for (int m = 0; m < p; ++m)
      for (int n = 0; n < p; ++n)
        for (int q = 0; q < 4; ++q)
          for (int v = 0; v < p; ++v)
            out(m, n) += rho(idx(q, m, v), idx(q, n, v));
  } else {
    for (int m = 0; m < p; ++m)
      for (int n = 0; n < p; ++n)
        for (int q = 0; q < 4; ++q)
          for (int h = 0; h < p; ++h)
            out(m, n) += rho(idx(q, h, m), idx(q, h, n));
  }
  return out;
}

double hermiticity_error(const Matrix& rho) {
  return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}

double trace_error(const Matrix& rho) { return std::abs(rho.trace() - 1.0); }

double min_eigenvalue(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es;
  es.compute(Matrix(0.5 * (rho + rho.adjoint())), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void validate_density_matrix(const Matrix& rho) {
  const double herm = hermiticity_error(rho);
  if (herm > 1e-10)
    throw std::runtime_error("density matrix not Hermitian, residual " +
                             std::to_string(herm));
  const double terr = trace_error(rho);
  if (terr > 1e-8)
    throw std::runtime_error("density matrix trace off by " +
                             std::to_string(terr));
  const double lmin = min_eigenvalue(rho);
  if (lmin < -1e-8)
    throw std::runtime_error("density matrix not positive, min eigenvalue " +
                             std::to_string(lmin));
}

}  // namespace stix
