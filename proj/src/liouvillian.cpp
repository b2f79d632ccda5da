#include "stix/liouvillian.hpp"

#include <cmath>
#include <stdexcept>

namespace stix {

namespace {

constexpr double kEntryTol = 1e-14;

}  // namespace

Generator::Generator(Matrix h_static_mev, std::vector<DriveTerm> drives,
                     std::vector<std::pair<Matrix, double>> collapse)
    : dim_(static_cast<int>(h_static_mev.rows())),
      h_static_(std::move(h_static_mev)),
      drives_(std::move(drives)),
      collapse_(std::move(collapse)) {
  if (h_static_.rows() != h_static_.cols())
    throw std::domain_error("Generator: Hamiltonian must be square");
  if ((h_static_ - h_static_.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::domain_error("Generator: static Hamiltonian not Hermitian");

  diag_energies_ = h_static_.diagonal().real();
  h_offdiag_ = h_static_;
  h_offdiag_.diagonal().setZero();

  damping_diag_ = RealVector::Zero(dim_);
  for (const auto& [op, rate] : collapse_) {
    if (op.rows() != dim_ || op.cols() != dim_)
      throw std::domain_error("Generator: collapse operator dimension");
    if (rate < 0) throw std::domain_error("Generator: negative rate");
    if (rate == 0) continue;

    SparseJump j;
    j.rate = rate;
    bool have_freq = false;
    double freq = 0.0;
    for (int c = 0; c < dim_; ++c) {
      for (int r = 0; r < dim_; ++r) {
        const Complex v = op(r, c);
        if (std::abs(v) < kEntryTol) continue;
        j.row.push_back(r);
        j.col.push_back(c);
        j.w.push_back(v);
        const double f = diag_energies_(r) - diag_energies_(c);
        if (!have_freq) {
          freq = f;
          have_freq = true;
        } else if (std::abs(f - freq) > 1e-9) {
          // The interaction picture relies on dissipator form-invariance.
          throw std::logic_error(
              "Generator: collapse operator mixes Bohr frequencies");
        }
      }
    }
    const Matrix n = op.adjoint() * op;
    Matrix noff = n;
    noff.diagonal().setZero();
    if (noff.cwiseAbs().maxCoeff() > kEntryTol)
      throw std::logic_error("Generator: O^dag O must be diagonal");
    damping_diag_ += 0.5 * rate * n.diagonal().real();
    jumps_.push_back(std::move(j));
  }

  for (const auto& d : drives_) d.pulse.validate();

  work_h_.resize(dim_, dim_);
  work_a_.resize(dim_, dim_);
  work_m_.resize(dim_, dim_);
  work_phase_.resize(dim_);
}

Generator Generator::full_model(const HilbertSpace& space,
                                const SystemParams& params,
                                const PulseParams& tpe,
                                const std::optional<PulseParams>& stim) {
  Matrix h = build_static_hamiltonian(space, params);

  std::vector<DriveTerm> drives;
  {
    Matrix t4 = qd_transition(QdState::g, QdState::xH) +
                qd_transition(QdState::g, QdState::xV) +
                qd_transition(QdState::xH, QdState::xx) +
                qd_transition(QdState::xV, QdState::xx);
    t4 += t4.adjoint().eval();
    // B + B^dag = -(hbar/2) f(t) * (symmetric TPE coupling)
    Matrix b = embed(space, Matrix(-0.25 * kHbarMevPs * t4), Subsystem::QD);
    drives.push_back({tpe, 0.0, std::move(b)});
  }
  if (stim) {
    Matrix lower = qd_transition(QdState::g, QdState::xH) +
                   qd_transition(QdState::xH, QdState::xx);
    Matrix b = embed(space, Matrix(-0.5 * kHbarMevPs * lower), Subsystem::QD);
    drives.push_back({*stim, params.delta_stim_mev / kHbarMevPs, std::move(b)});
  }
  return Generator(std::move(h), std::move(drives),
                   collapse_operators(space, params));
}

Generator Generator::qd_only(const SystemParams& params, const PulseParams& tpe,
                             const std::optional<PulseParams>& stim) {
  Matrix h = Matrix::Zero(4, 4);
  h(1, 1) = params.delta_xl_mev;
  h(2, 2) = params.delta_xl_mev;
  h(3, 3) = 2.0 * params.delta_xl_mev - params.e_b_mev;

  std::vector<DriveTerm> drives;
  {
    Matrix t4 = qd_transition(QdState::g, QdState::xH) +
                qd_transition(QdState::g, QdState::xV) +
                qd_transition(QdState::xH, QdState::xx) +
                qd_transition(QdState::xV, QdState::xx);
    t4 += t4.adjoint().eval();
    drives.push_back({tpe, 0.0, Matrix(-0.25 * kHbarMevPs * t4)});
  }
  if (stim) {
    Matrix lower = qd_transition(QdState::g, QdState::xH) +
                   qd_transition(QdState::xH, QdState::xx);
    drives.push_back({*stim, params.delta_stim_mev / kHbarMevPs,
                      Matrix(-0.5 * kHbarMevPs * lower)});
  }

  std::vector<std::pair<Matrix, double>> collapse;
  const QdState lowers[4][2] = {{QdState::g, QdState::xH},
                                {QdState::g, QdState::xV},
                                {QdState::xH, QdState::xx},
                                {QdState::xV, QdState::xx}};
  for (const auto& lw : lowers)
    collapse.emplace_back(qd_transition(lw[0], lw[1]), params.gamma_per_ps);
  if (params.dephasing_per_ps > 0) {
    for (QdState s : {QdState::xH, QdState::xV, QdState::xx})
      collapse.emplace_back(qd_transition(s, s), params.dephasing_per_ps);
  }
  return Generator(std::move(h), std::move(drives), std::move(collapse));
}

void Generator::rhs(double t, const Matrix& sigma, Matrix& out) const {
  work_h_ = h_offdiag_;
  for (const auto& d : drives_) {
    const double f = envelope(d.pulse, t);
    if (f == 0.0) continue;
    if (d.omega_rad_per_ps == 0.0) {
      work_h_ += f * (d.b + d.b.adjoint());
    } else {
      const Complex ph = std::exp(Complex(0.0, d.omega_rad_per_ps * t));
      work_h_ += (f * ph) * d.b;
      work_h_ += (f * std::conj(ph)) * d.b.adjoint();
    }
  }

  // Interaction-picture phases and -(i/hbar) prefactor.
  const double w = t / kHbarMevPs;
  for (int i = 0; i < dim_; ++i)
    work_phase_(i) = std::exp(Complex(0.0, diag_energies_(i) * w));
  work_a_ = work_phase_.asDiagonal() * work_h_;
  work_a_ = work_a_ * work_phase_.conjugate().asDiagonal();
  work_a_ *= Complex(0.0, -1.0 / kHbarMevPs);
  work_a_.diagonal() -= damping_diag_.cast<Complex>();

  work_m_.noalias() = work_a_ * sigma;
  out = work_m_ + work_m_.adjoint();

  for (const auto& j : jumps_) {
    const size_t m = j.w.size();
    for (size_t k = 0; k < m; ++k) {
      const Complex wk = j.rate * j.w[k];
      for (size_t l = 0; l < m; ++l) {
        out(j.row[k], j.row[l]) += wk * std::conj(j.w[l]) * sigma(j.col[k], j.col[l]);
      }
    }
  }
}

double Generator::pulses_start() const {
  double t0 = 0.0;
  bool any = false;
  for (const auto& d : drives_) {
    const double s = d.pulse.center_ps - 8.0 * d.pulse.sigma_ps;
    t0 = any ? std::min(t0, s) : s;
    any = true;
  }
  return t0;
}

double Generator::pulses_end() const {
  double t1 = 0.0;
  bool any = false;
  for (const auto& d : drives_) {
    const double e = d.pulse.center_ps + 8.0 * d.pulse.sigma_ps;
    t1 = any ? std::max(t1, e) : e;
    any = true;
  }
  return t1;
}

Matrix Generator::to_lab(double t, const Matrix& sigma) const {
  const double w = t / kHbarMevPs;
  Vector u(dim_);
  for (int i = 0; i < dim_; ++i)
    u(i) = std::exp(Complex(0.0, -diag_energies_(i) * w));
  return u.asDiagonal() * sigma * u.conjugate().asDiagonal();
}

Matrix Generator::to_frame(double t, const Matrix& rho) const {
  const double w = t / kHbarMevPs;
  Vector u(dim_);
  for (int i = 0; i < dim_; ++i)
    u(i) = std::exp(Complex(0.0, diag_energies_(i) * w));
  return u.asDiagonal() * rho * u.conjugate().asDiagonal();
}

Eigen::SparseMatrix<Complex> Generator::static_liouvillian_sparse() const {
  const int d = dim_;
  const Complex mi(0.0, -1.0 / kHbarMevPs);
  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(static_cast<size_t>(d) * d * 8);

  auto vecidx = [d](int row, int col) { return col * d + row; };

  for (int c = 0; c < d; ++c) {
    for (int r = 0; r < d; ++r) {
      const Complex v = h_static_(r, c);
      if (std::abs(v) < kEntryTol) continue;
      for (int j = 0; j < d; ++j) {
        // -(i/hbar) H rho
        trip.emplace_back(vecidx(r, j), vecidx(c, j), mi * v);
        // +(i/hbar) rho H : (rho H)(i, c) uses rho(i, r) with H(r, c)
        trip.emplace_back(vecidx(j, c), vecidx(j, r), -mi * v);
      }
    }
  }

  for (const auto& j : jumps_) {
    const size_t m = j.w.size();
    for (size_t k = 0; k < m; ++k)
      for (size_t l = 0; l < m; ++l)
        trip.emplace_back(vecidx(j.row[k], j.row[l]),
                          vecidx(j.col[k], j.col[l]),
                          j.rate * j.w[k] * std::conj(j.w[l]));
  }
  // -(1/2){sum rate O^dag O, rho}; damping_diag_ already holds the half-sum.
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < d; ++r) {
      const double v = damping_diag_(r) + damping_diag_(c);
      if (v != 0.0) trip.emplace_back(vecidx(r, c), vecidx(r, c), Complex(-v, 0.0));
    }

  Eigen::SparseMatrix<Complex> L(d * d, d * d);
  L.setFromTriplets(trip.begin(), trip.end());
  return L;
}

Matrix Generator::static_liouvillian_dense() const {
  return Matrix(static_liouvillian_sparse());
}

TailClosure::TailClosure(const Generator& gen) : dim_(gen.dim()) {
  Eigen::SparseMatrix<Complex> L = gen.static_liouvillian_sparse();
  // Rank-one deflation: the steady state is the vacuum ground state, whose
  // vectorization is the first unit vector; subtracting e_0 * vec(I)^H moves
  // the zero eigenvalue away while leaving the traceless solution intact.
  const int d = dim_;
  std::vector<Eigen::Triplet<Complex>> trip;
  for (int j = 0; j < d; ++j) trip.emplace_back(0, j * d + j, Complex(-1.0, 0.0));
  Eigen::SparseMatrix<Complex> defl(d * d, d * d);
  defl.setFromTriplets(trip.begin(), trip.end());
  L += defl;
  L.makeCompressed();
  lu_.compute(L);
  if (lu_.info() != Eigen::Success)
    throw std::runtime_error(
        "TailClosure: static Liouvillian factorization failed "
        "(no unique steady state?)");
}

Matrix TailClosure::integral_from(const Matrix& rho_final) const {
  const int d = dim_;
  Vector b(d * d);
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < d; ++r) b(c * d + r) = -rho_final(r, c);
  b(0) += 1.0;  // subtract the vacuum ground steady state
  Vector x = lu_.solve(b);
  Matrix out(d, d);
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < d; ++r) out(r, c) = x(c * d + r);
  return out;
}

}  // namespace stix
