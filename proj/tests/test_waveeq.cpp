#include "relbundle/waveeq.hpp"

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <numbers>

using namespace relbundle;

namespace {

const auto gamma4 = clifford::build_gamma_set();

CVector random_state(Eigen::Index n, unsigned seed) {
  std::srand(seed);
  return CVector::Random(n);
}

PotentialField smooth_potential(const Lattice& lat, double e, double a) {
  PotentialField pot(lat, e);
  const double k = 2.0 * std::numbers::pi / lat.length_x();
  pot.A[0] = ScalarField::sample(lat, [&](double, double x) { return a * std::cos(k * x); });
  pot.A[1] = ScalarField::sample(lat, [&](double, double x) { return 0.5 * a * std::sin(k * x); });
  return pot;
}

double interior_max(const VectorField& f) { return f.max_abs(2, f.lattice().nt - 2); }

}  // namespace

TEST(DiracHamiltonian, IsHermitian) {
  const Lattice lat(4, 12, 0.05, 0.2);
  const CMatrix h = waveeq::dirac_hamiltonian(gamma4, smooth_potential(lat, 0.8, 0.4), 1.0, 0.5);
  EXPECT_LT((h - h.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
}

// Free spectrum: +-sqrt((hbar c ktilde)^2 + (m c^2)^2) per lattice momentum, twice each.
TEST(DiracHamiltonian, FreeSpectrumMatchesDispersion) {
  const double hbar = 0.7, m = 1.3, c = 1.5;
  const Lattice lat(4, 10, 0.05, 0.3, c);
  const PotentialField pot(lat, 0.0, hbar);
  const CMatrix h = waveeq::dirac_hamiltonian(gamma4, pot, m, 0.0);
  Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<CMatrix>(h).eigenvalues();
  std::vector<double> want;
  for (int j = 0; j < lat.nx; ++j) {
    const double kt = std::sin(2.0 * std::numbers::pi * j / lat.nx) / lat.dx;
    const double e = std::hypot(hbar * c * kt, m * c * c);
    for (double s : {-1.0, 1.0})
      for (int d = 0; d < 2; ++d) want.push_back(s * e);
  }
  std::sort(want.begin(), want.end());
  ASSERT_EQ(static_cast<std::size_t>(ev.size()), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(ev(static_cast<Eigen::Index>(i)), want[i], 1e-12);
}

TEST(DiracHamiltonian, ConstantScalarPotentialShiftsSpectrum) {
  const Lattice lat(4, 8, 0.05, 0.2);
  PotentialField free(lat, 0.6), shifted(lat, 0.6);
  shifted.A[0] = ScalarField(lat, 0.75);
  const auto e0 = Eigen::SelfAdjointEigenSolver<CMatrix>(waveeq::dirac_hamiltonian(gamma4, free, 1.0, 0.0)).eigenvalues();
  const auto e1 = Eigen::SelfAdjointEigenSolver<CMatrix>(waveeq::dirac_hamiltonian(gamma4, shifted, 1.0, 0.0)).eigenvalues();
  EXPECT_LT((e1 - e0 - Eigen::VectorXd::Constant(e0.size(), 0.6 * 0.75)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(DiracHamiltonian, ComplexPotentialIsRejected) {
  const Lattice lat(4, 6, 0.05, 0.2);
  PotentialField pot(lat, 1.0);
  pot.A[0](0, 2) = cplx(0.1, 0.5);
  pot.A[0](1, 2) = cplx(0.1, 0.5);
  EXPECT_THROW(waveeq::dirac_hamiltonian(gamma4, pot, 1.0, 0.5), NonHermitian);
}

TEST(CrankNicolson, StepIsUnitaryAndCayleyOfH) {
  const Lattice lat(8, 8, 0.05, 0.2);
  const auto pot = smooth_potential(lat, 0.5, 0.3);
  const auto prop = waveeq::dirac_propagator(gamma4, pot, 1.0);
  const CMatrix u = prop.step_matrix(0);
  const CMatrix id = CMatrix::Identity(u.rows(), u.cols());
  EXPECT_LT((u.adjoint() * u - id).cwiseAbs().maxCoeff(), 1e-13);
  // (1 + iaH) U = (1 - iaH) with a = dt/2hbar
  const CMatrix h = waveeq::dirac_hamiltonian(gamma4, pot, 1.0, 0.5);
  const cplx a = I_unit * (lat.dt / 2.0);
  EXPECT_LT(((id + a * h) * u - (id - a * h)).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(CrankNicolson, BackwardUndoesForward) {
  const Lattice lat(20, 8, 0.05, 0.2);
  PotentialField pot = smooth_potential(lat, 0.5, 0.3);
  pot.A[0] = ScalarField::sample(lat, [](double t, double x) { return 0.2 * std::sin(x + 3 * t); });
  const auto prop = waveeq::dirac_propagator(gamma4, pot, 1.0);
  const CVector psi = random_state(4 * lat.nx, 3);
  EXPECT_LT((prop.evolve(prop.evolve(psi, 2, 15), 15, 2) - psi).cwiseAbs().maxCoeff(), 1e-12);
}

// CN against the matrix exponential (independent Pade oracle): second order in dt.
TEST(CrankNicolson, SecondOrderAgainstExponential) {
  const double T = 0.8;
  std::vector<double> errs;
  for (int steps : {8, 16, 32}) {
    const Lattice lat(steps + 1, 8, T / steps, 0.3);
    const auto pot = smooth_potential(lat, 0.5, 0.4);
    const CMatrix h = waveeq::dirac_hamiltonian(gamma4, pot, 1.0, 0.0);
    const CMatrix exact = (h * (-I_unit * T)).exp();
    const CVector psi = random_state(h.rows(), 11);
    const CVector cn = waveeq::evolve_dirac(gamma4, psi, pot, 1.0, 0, steps);
    errs.push_back((cn - exact * psi).norm());
  }
  EXPECT_NEAR(std::log2(errs[0] / errs[1]), 2.0, 0.15);
  EXPECT_NEAR(std::log2(errs[1] / errs[2]), 2.0, 0.15);
}

TEST(CrankNicolson, ExactSchemeMatchesPade) {
  const Lattice lat(11, 6, 0.1, 0.3);
  const auto pot = smooth_potential(lat, 0.5, 0.4);
  const CMatrix h = waveeq::dirac_hamiltonian(gamma4, pot, 1.0, 0.0);
  const CVector psi = random_state(h.rows(), 5);
  const CVector a = waveeq::evolve_dirac(gamma4, psi, pot, 1.0, 0, 10, waveeq::Scheme::exact_exponential);
  EXPECT_LT((a - (h * (-I_unit * 1.0)).exp() * psi).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(CrankNicolson, CoarseStepRaisesWarning) {
  const Lattice lat(4, 8, 0.9, 0.1);
  waveeq::EvolutionDiagnostics diag;
  (void)waveeq::evolve_dirac(gamma4, random_state(32, 1), PotentialField(lat), 1.0, 0, 2,
                             waveeq::Scheme::crank_nicolson, &diag);
  EXPECT_TRUE(diag.accuracy_warning);
  EXPECT_GT(diag.max_h_dt, 1.0);
}

TEST(DiracPlaneWave, SolvesTheLatticeEquation) {
  const Lattice lat(24, 16, 0.05, 0.2);
  const PotentialField pot(lat);
  for (int mode : {0, 1, 3})
    for (bool pos : {true, false}) {
      const auto psi = waveeq::dirac_plane_wave(gamma4, lat, mode, 1.0, 1.0, pos);
      EXPECT_LT(interior_max(waveeq::dirac_residual(gamma4, psi, pot, 1.0)), 1e-12) << mode << pos;
    }
}

TEST(DiracPlaneWave, TooLargeStepIsRejected) {
  EXPECT_THROW(waveeq::lattice_mode(Lattice(4, 8, 2.0, 0.2), 1, 1.0, 1.0), ConfigError);
}

// CN histories solve the centered-difference equation up to O(dt^2).
TEST(DiracResidual, CrankNicolsonHistoryConverges) {
  const double T = 1.6, L = 6.4;
  std::vector<double> res;
  for (int n : {32, 64, 128}) {
    const Lattice lat(n + 1, n, T / n, L / n);
    const auto pot = smooth_potential(lat, 0.5, 0.3);
    CVector psi0(4 * lat.nx);
    for (int x = 0; x < lat.nx; ++x) {
      const double xx = lat.position(x) - 0.5 * L;
      psi0.segment<4>(4 * x) << std::exp(-xx * xx), 0.0, 0.0, 0.5 * std::exp(-xx * xx);
    }
    const auto hist = waveeq::evolve_dirac_history(gamma4, psi0, pot, 1.0);
    res.push_back(interior_max(waveeq::dirac_residual(gamma4, hist, pot, 1.0)));
  }
  EXPECT_NEAR(std::log2(res[0] / res[1]), 2.0, 0.15);
  EXPECT_NEAR(std::log2(res[1] / res[2]), 2.0, 0.15);
}

TEST(BundleEvolution, AgreesWithConventional) {
  const Lattice lat(12, 8, 0.05, 0.2);
  PotentialField pot = smooth_potential(lat, 0.7, 0.4);
  pot.A[0] = ScalarField::sample(lat, [](double t, double x) { return 0.3 * std::cos(x - 2 * t); });
  const auto frame = transport::make_frame_preset("random-smooth(9)", lat, 4);
  const CVector psi0 = random_state(4 * lat.nx, 8);
  const CVector want = waveeq::evolve_dirac(gamma4, psi0, pot, 1.0, 0, 11);
  const CVector sec = waveeq::evolve_dirac_bundle(gamma4, waveeq::to_bundle(frame, psi0, 0), frame, pot, 1.0, 0, 11);
  EXPECT_LT((waveeq::from_bundle(frame, sec, 11) - want).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(KleinGordon, PlaneWaveSolvesBothForms) {
  const Lattice lat(24, 16, 0.05, 0.2);
  const PotentialField pot(lat);
  for (int mode : {0, 2}) {
    const ScalarField phi = waveeq::kg_plane_wave(lat, mode, 1.0, 1.0);
    VectorField wrap(std::vector<ScalarField>{waveeq::kg_residual(phi, pot, 1.0)});
    EXPECT_LT(interior_max(wrap), 1e-10);
    EXPECT_LT(interior_max(waveeq::kg5_residual(waveeq::kg_reduce_5(phi, pot, 1.0), pot, 1.0)), 1e-10);
  }
}

TEST(KleinGordon, NonSolutionHasResidual) {
  const Lattice lat(24, 16, 0.05, 0.2);
  const PotentialField pot(lat);
  const ScalarField phi = waveeq::kg_plane_wave(lat, 1, 1.3, 1.0);  // wrong mass for the residual below
  VectorField wrap(std::vector<ScalarField>{waveeq::kg_residual(phi, pot, 1.0)});
  EXPECT_GT(interior_max(wrap), 0.1);
}

TEST(KleinGordon, MasslessFiveComponentIsDegenerate) {
  const Lattice lat(4, 4, 0.05, 0.2);
  EXPECT_THROW(waveeq::kg_reduce_5(ScalarField(lat), PotentialField(lat), 0.0), DegenerateMass);
}

// Plane wave period from the two-component stepper: phi(T) = e^{-i omega T} phi(0), O(dt^2).
TEST(KleinGordon, TwoComponentReproducesPlaneWavePhase) {
  const double T = 1.0;
  std::vector<double> errs;
  for (int n : {20, 40, 80}) {
    const Lattice lat(n + 1, 16, T / n, 0.2);
    const PotentialField pot(lat);
    const auto md = waveeq::lattice_mode(lat, 1, 1.0, 1.0);
    CVector phi(lat.nx), chi(lat.nx);
    const double w = std::sqrt(md.k_tilde * md.k_tilde + 1.0);  // continuum-time frequency of the semi-discrete system
    for (int x = 0; x < lat.nx; ++x) {
      phi(x) = std::exp(I_unit * md.k * lat.position(x));
      chi(x) = -I_unit * w * phi(x);
    }
    const waveeq::KleinGordonTwoComponent sys(pot, 1.0);
    const CVector out = waveeq::two_component_phi(sys.evolve(waveeq::pack_two_component(phi, chi), 0, n));
    errs.push_back((out - std::exp(-I_unit * w * T) * phi).cwiseAbs().maxCoeff());
  }
  EXPECT_NEAR(std::log2(errs[0] / errs[1]), 2.0, 0.2);
  EXPECT_NEAR(std::log2(errs[1] / errs[2]), 2.0, 0.2);
}

TEST(KleinGordon, ChargeConservedForStaticPotential) {
  const Lattice lat(201, 16, 0.01, 0.2);
  PotentialField pot(lat, 0.8);
  pot.A[0] = ScalarField::sample(lat, [](double, double x) { return 0.4 * std::cos(2 * std::numbers::pi * x / 3.2); });
  const waveeq::KleinGordonTwoComponent sys(pot, 1.0);
  CVector s = random_state(2 * lat.nx, 21);
  const double q0 = waveeq::kg_charge(s, pot, 0);
  for (int n = 0; n < 200; ++n) s = sys.step_matrix(n) * s;
  EXPECT_NEAR(waveeq::kg_charge(s, pot, 200), q0, 1e-10 * std::max(1.0, std::abs(q0)));
}

TEST(KleinGordon, LeapfrogAndTwoComponentAgreeToSecondOrder) {
  const double T = 0.8;
  std::vector<double> errs;
  for (int n : {32, 64, 128}) {
    const Lattice lat(n + 1, 16, T / n, 0.2);
    PotentialField pot(lat, 0.5);
    pot.A[0] = ScalarField::sample(lat, [](double, double x) { return 0.3 * std::sin(2 * std::numbers::pi * x / 3.2); });
    CVector phi(lat.nx), chi(lat.nx);
    for (int x = 0; x < lat.nx; ++x) {
      const double xx = lat.position(x) - 1.6;
      phi(x) = std::exp(-2.0 * xx * xx);
      chi(x) = cplx(0, 0.5) * phi(x);
    }
    const ScalarField lf = waveeq::evolve_kg_leapfrog(phi, chi, pot, 1.0);
    const CVector mid = waveeq::two_component_phi(
        waveeq::KleinGordonTwoComponent(pot, 1.0).evolve(waveeq::pack_two_component(phi, chi), 0, n));
    errs.push_back((waveeq::slice_of(lf, n) - mid).cwiseAbs().maxCoeff());
  }
  EXPECT_NEAR(std::log2(errs[0] / errs[1]), 2.0, 0.3);
  EXPECT_NEAR(std::log2(errs[1] / errs[2]), 2.0, 0.3);
}

TEST(KleinGordon, PackRoundTrip) {
  const CVector phi = random_state(5, 1), chi = random_state(5, 2);
  const CVector s = waveeq::pack_two_component(phi, chi);
  EXPECT_EQ((waveeq::two_component_phi(s) - phi).norm(), 0.0);
  EXPECT_EQ((waveeq::two_component_chi(s) - chi).norm(), 0.0);
}
