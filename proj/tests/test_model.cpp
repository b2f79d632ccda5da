#include <doctest.h>

#include <cmath>

#include "stix/model.hpp"

using namespace stix;

namespace {

Matrix random_hermitian(int dim, unsigned seed) {
  std::srand(seed);
  Matrix m = Matrix::Random(dim, dim);
  return 0.5 * (m + m.adjoint());
}

}  // namespace

TEST_CASE("SystemParams presets and validation") {
  SystemParams t1 = SystemParams::table1();
  CHECK(t1.delay_ps == 15.0);
  CHECK(t1.kappa_per_ps == doctest::Approx(0.577));
  CHECK(t1.delta_cl_mev() == doctest::Approx(2.0));
  CHECK_NOTHROW(t1.validate());

  SystemParams ex = SystemParams::experiment();
  CHECK(ex.delay_ps == 7.0);
  CHECK_NOTHROW(ex.validate());

  SystemParams bad = t1;
  bad.kappa_per_ps = -1.0;
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("kappa_per_ps"),
                       std::invalid_argument);
  bad = t1;
  bad.n_max = 0;
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("n_max"),
                       std::invalid_argument);
  bad = t1;
  bad.delta_xl_mev = 1.0;  // resonant TPE demands delta_xl = E_B/2
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("delta_xl_mev"),
                       std::invalid_argument);
  bad.resonant_tpe = false;
  CHECK_NOTHROW(bad.validate());
}

TEST_CASE("Gaussian envelope: peak, clipping, normalization") {
  PulseParams pulse{M_PI, 1.0, 0.0, PulseRole::TPE};
  CHECK(envelope(pulse, 0.0) ==
        doctest::Approx(M_PI / std::sqrt(2.0 * M_PI)).epsilon(1e-12));
  CHECK(envelope(pulse, 10.0) == 0.0);
  CHECK(envelope(pulse, -10.0) == 0.0);

  // Trapezoid integral over [-8 sigma, 8 sigma] recovers the area.
  const int n = 200000;
  double acc = 0;
  const double a = -8.0, b = 8.0, h = (b - a) / n;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    acc += w * envelope(pulse, a + i * h);
  }
  CHECK(acc * h == doctest::Approx(M_PI).epsilon(1e-9));

  CHECK(sigma_from_fwhm(2.0 * std::sqrt(2.0 * std::log(2.0))) ==
        doctest::Approx(1.0));
}

TEST_CASE("pulse factories place the stim pulse at the delay") {
  SystemParams p = SystemParams::table1();
  PulseParams tpe = PulseParams::tpe(1.0, p);
  CHECK(tpe.center_ps == 0.0);
  CHECK(tpe.sigma_ps == doctest::Approx(sigma_from_fwhm(4.5)));
  PulseParams stim = PulseParams::stim(2.0, p);
  CHECK(stim.center_ps == 15.0);
  CHECK(stim.sigma_ps == doctest::Approx(sigma_from_fwhm(3.0)));
}

TEST_CASE("static Hamiltonian structure") {
  SystemParams p = SystemParams::table1();
  HilbertSpace space(2);
  Matrix h = build_static_hamiltonian(space, p);

  CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() < 1e-12);

  // Biexciton at zero detuning under resonant TPE: 2*2 - 4 = 0 meV.
  const int ixx = space.basis_index(QdState::xx, 0, 0);
  CHECK(std::abs(h(ixx, ixx)) < 1e-12);

  // Photon rotating-frame energy: delta_cl per photon.
  const int ig11 = space.basis_index(QdState::g, 1, 1);
  CHECK(h(ig11, ig11).real() == doctest::Approx(2.0 * p.delta_cl_mev()));

  // Excitation-conserving QD-cavity coupling at hbar g.
  const int ix00 = space.basis_index(QdState::xH, 0, 0);
  const int ig10 = space.basis_index(QdState::g, 1, 0);
  CHECK(h(ix00, ig10).real() == doctest::Approx(0.05));
  CHECK(h(ig10, ix00).real() == doctest::Approx(0.05));

  SUBCASE("g = 0 is block-diagonal in photon number") {
    SystemParams p0 = p;
    p0.g_mev = 0.0;
    Matrix h0 = build_static_hamiltonian(space, p0);
    Matrix offdiag = h0;
    offdiag.diagonal().setZero();
    CHECK(offdiag.cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("TPE Hamiltonian: support, peak value, hermiticity") {
  SystemParams p = SystemParams::table1();
  HilbertSpace space(1);
  PulseParams tpe = PulseParams::tpe(M_PI, p);

  Matrix far = build_tpe_hamiltonian(space, p, tpe, 100.0);
  CHECK(far.cwiseAbs().maxCoeff() == 0.0);

  Matrix peak = build_tpe_hamiltonian(space, p, tpe, 0.0);
  CHECK((peak - peak.adjoint()).cwiseAbs().maxCoeff() == 0.0);
  const int ig = space.basis_index(QdState::g, 0, 0);
  const int ix = space.basis_index(QdState::xH, 0, 0);
  CHECK(peak(ig, ix).real() ==
        doctest::Approx(-0.5 * kHbarMevPs * envelope(tpe, 0.0)));
  CHECK(peak.imag().cwiseAbs().maxCoeff() == 0.0);  // real symmetric
}

TEST_CASE("stim Hamiltonian phase advances at the stim detuning") {
  SystemParams p = SystemParams::table1();
  HilbertSpace space(1);
  PulseParams stim = PulseParams::stim(M_PI, p);

  CHECK(build_stim_hamiltonian(space, p, stim, 100.0).cwiseAbs().maxCoeff() ==
        0.0);

  const int ix = space.basis_index(QdState::xH, 0, 0);
  const int ixx = space.basis_index(QdState::xx, 0, 0);
  const double t1 = 14.0, t2 = 14.5;
  Matrix h1 = build_stim_hamiltonian(space, p, stim, t1);
  Matrix h2 = build_stim_hamiltonian(space, p, stim, t2);
  CHECK((h1 - h1.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
  // <xH| H |xx> carries e^{i delta_stim t / hbar}.
  const Complex ratio = (h2(ix, ixx) / envelope(stim, t2)) /
                        (h1(ix, ixx) / envelope(stim, t1));
  const Complex expected =
      std::exp(Complex(0.0, p.delta_stim_mev / kHbarMevPs * (t2 - t1)));
  CHECK(std::abs(ratio - expected) < 1e-12);
}

TEST_CASE("Lindblad dissipator basics") {
  HilbertSpace space(1);
  const int d = space.dim_total();
  const Matrix a_h = embed(space, annihilation(2), Subsystem::PhotonH);

  Matrix rho1 = Matrix::Zero(d, d);
  const int i1 = space.basis_index(QdState::g, 1, 0);
  const int i0 = space.basis_index(QdState::g, 0, 0);
  rho1(i1, i1) = 1.0;
  const double kappa = 0.577;
  Matrix out = lindblad_dissipator(rho1, a_h, kappa);
  CHECK(out(i1, i1).real() == doctest::Approx(-kappa));
  CHECK(out(i0, i0).real() == doctest::Approx(kappa));

  CHECK(lindblad_dissipator(rho1, a_h, 0.0).cwiseAbs().maxCoeff() == 0.0);

  Matrix rho = random_hermitian(d, 7);
  CHECK(std::abs(lindblad_dissipator(rho, a_h, 1.3).trace()) < 1e-12);
  CHECK_THROWS_AS(lindblad_dissipator(rho, a_h, -0.1), std::domain_error);
}

TEST_CASE("total_rhs: stationarity, tracelessness, linearity") {
  SystemParams p = SystemParams::table1();
  p.n_max = 1;
  HilbertSpace space(1);
  const int d = space.dim_total();
  PulseParams tpe = PulseParams::tpe(M_PI, p);
  PulseParams stim = PulseParams::stim(M_PI, p);

  Matrix ground = Matrix::Zero(d, d);
  ground(space.basis_index(QdState::g, 0, 0),
         space.basis_index(QdState::g, 0, 0)) = 1.0;
  // Pulses off at t = -100 ps: ground state is stationary.
  CHECK(total_rhs(space, p, tpe, &stim, -100.0, ground).cwiseAbs().maxCoeff() <
        1e-14);

  Matrix rho = random_hermitian(d, 11);
  CHECK(std::abs(total_rhs(space, p, tpe, &stim, 14.0, rho).trace()) < 1e-12);

  Matrix r1 = random_hermitian(d, 1), r2 = random_hermitian(d, 2);
  const double alpha = 0.3, beta = -1.7;
  Matrix lhs = total_rhs(space, p, tpe, &stim, 14.0,
                         Matrix(alpha * r1 + beta * r2));
  Matrix rhs_sum = alpha * total_rhs(space, p, tpe, &stim, 14.0, r1) +
                   beta * total_rhs(space, p, tpe, &stim, 14.0, r2);
  CHECK((lhs - rhs_sum).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("collapse operator roster") {
  SystemParams p = SystemParams::table1();
  HilbertSpace space(1);
  auto ops = collapse_operators(space, p);
  CHECK(ops.size() == 6);  // 2 cavity + 4 QD channels, no dephasing
  CHECK(ops[0].second == doctest::Approx(p.kappa_per_ps));
  CHECK(ops[2].second == doctest::Approx(p.gamma_per_ps));

  p.dephasing_per_ps = 0.1;
  CHECK(collapse_operators(space, p).size() == 9);
}
