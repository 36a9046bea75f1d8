#include "relbundle/kernel_io.hpp"

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <filesystem>
#include <numbers>
#include <sstream>

using namespace relbundle;

namespace {

const auto gamma4 = clifford::build_gamma_set();

CVector random_state(Eigen::Index n, unsigned seed) {
  std::srand(seed);
  return CVector::Random(n);
}

double max_abs(const CMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

PotentialField smooth_potential(const Lattice& lat, double e, double a) {
  PotentialField pot(lat, e);
  const double k = 2.0 * std::numbers::pi / lat.length_x();
  pot.A[0] = ScalarField::sample(lat, [&](double, double x) { return a * std::cos(k * x); });
  pot.A[1] = ScalarField::sample(lat, [&](double, double x) { return 0.5 * a * std::sin(k * x); });
  return pot;
}

std::vector<double> well(const Lattice& lat) {
  std::vector<double> v;
  for (int x = 0; x < lat.nx; ++x) v.push_back(0.5 * std::cos(2 * std::numbers::pi * x / lat.nx));
  return v;
}

}  // namespace

TEST(SchrodingerGreen, CoincidentBlockIsIdentityOnTheSlice) {
  const Lattice lat(6, 12, 0.1, 0.25);
  const auto g = green::schrodinger_green(green::schrodinger_hamiltonian(lat, 1.0, 1.0, well(lat)), lat, 1.0);
  const CVector psi = random_state(lat.nx, 1);
  EXPECT_LT((green::apply_kernel(g, psi, 2, 2) - psi).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SchrodingerGreen, MatchesPadeExponential) {
  const double hbar = 0.8;
  const Lattice lat(6, 12, 0.1, 0.25);
  const CMatrix h = green::schrodinger_hamiltonian(lat, 1.5, hbar, well(lat));
  const auto g = green::schrodinger_green(h, lat, hbar);
  const CVector psi = random_state(lat.nx, 2);
  for (int tp = 1; tp < lat.nt; ++tp) {
    const CMatrix u = (h * (-I_unit * ((tp - 1) * lat.dt / hbar))).exp();
    EXPECT_LT((green::apply_kernel(g, psi, 1, tp) - u * psi).cwiseAbs().maxCoeff(), 1e-11) << tp;
  }
}

TEST(SchrodingerGreen, EigenbasisIsOrthonormalAndComplete) {
  const Lattice lat(4, 16, 0.1, 0.3);
  const auto b = green::SpectralBasis::from(green::schrodinger_hamiltonian(lat, 1.0, 1.0, well(lat)), lat.dx);
  EXPECT_LT(b.orthonormality_error(), 1e-12);
  EXPECT_LT(b.completeness_error(), 1e-12);
}

// Retarded = symmetric + (1 / 2 i hbar) U for every pair of slices.
TEST(SchrodingerGreen, RetardedIsSymmetricPlusHalfPropagator) {
  const Lattice lat(5, 8, 0.1, 0.25);
  const CMatrix h = green::schrodinger_hamiltonian(lat, 1.0, 1.0, well(lat));
  const auto ret = green::schrodinger_green(h, lat, 1.0, green::Coincidence::retarded);
  const auto sym = green::schrodinger_green(h, lat, 1.0, green::Coincidence::symmetric);
  const auto b = green::SpectralBasis::from(h, lat.dx);
  for (int tp = 0; tp < lat.nt; ++tp)
    for (int t = 0; t < lat.nt; ++t) {
      const CVector ph = (b.energies.cast<cplx>() * (-I_unit * ((tp - t) * lat.dt))).array().exp();
      const CMatrix half = (b.states * ph.asDiagonal() * b.states.adjoint()) / (2.0 * I_unit);
      EXPECT_LT(max_abs(ret.block(tp, t) - sym.block(tp, t) - half), 1e-12) << tp << "," << t;
    }
}

TEST(SchrodingerGreen, RetardedBlocksBelowDiagonalVanish) {
  const Lattice lat(5, 8, 0.1, 0.25);
  const auto g = green::schrodinger_green(green::schrodinger_hamiltonian(lat, 1.0, 1.0), lat, 1.0);
  for (int tp = 0; tp < lat.nt; ++tp)
    for (int t = tp + 1; t < lat.nt; ++t) EXPECT_EQ(max_abs(g.block(tp, t)), 0.0);
  EXPECT_THROW(g.block(5, 0), IndexOutOfRange);
}

// Free Dirac kernel, one step: block(1, 0) W = (1 + i a H)^-1 (1 - i a H) built here by explicit inverse.
TEST(DiracGreen, OneStepRegression) {
  const Lattice lat(3, 6, 0.05, 0.2);
  const PotentialField pot(lat);
  const auto g = green::dirac_green(gamma4, pot, 1.0);
  const CMatrix h = waveeq::dirac_hamiltonian(gamma4, pot, 1.0, 0.5);
  const CMatrix id = CMatrix::Identity(h.rows(), h.cols());
  const cplx a = I_unit * lat.dt / 2.0;
  const CMatrix want = (id + a * h).inverse() * (id - a * h);
  EXPECT_LT(max_abs(g.block(1, 0) * g.weight(0) - want), 1e-13);
  EXPECT_LT(max_abs(g.block(0, 0) * g.weight(0) - id), 1e-15);
}

TEST(DiracGreen, ReconstructsEvolution) {
  const Lattice lat(10, 8, 0.05, 0.2);
  PotentialField pot = smooth_potential(lat, 0.6, 0.3);
  pot.A[0] = ScalarField::sample(lat, [](double t, double x) { return 0.2 * std::cos(x + 4 * t); });
  const auto g = green::dirac_green(gamma4, pot, 1.0);
  const CVector psi = random_state(4 * lat.nx, 4);
  const auto col = g.column(2);
  for (int tp = 2; tp < lat.nt; ++tp) {
    const CVector want = waveeq::evolve_dirac(gamma4, psi, pot, 1.0, 2, tp);
    EXPECT_LT((green::apply_kernel(g, psi, 2, tp) - want).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT(max_abs(col[static_cast<std::size_t>(tp - 2)] - g.block(tp, 2)), 1e-13);
  }
}

TEST(DiracGreen, ComposeThroughIntermediateSlice) {
  const Lattice lat(9, 6, 0.05, 0.2);
  const auto pot = smooth_potential(lat, 0.5, 0.3);
  const auto g = green::dirac_green(gamma4, pot, 1.0);
  const auto two = green::compose(g, g, 4);
  EXPECT_LT(max_abs(two.block(7, 1) - g.block(7, 1)), 1e-12);
  EXPECT_EQ(max_abs(two.block(3, 1)), 0.0);  // does not reach slice 4
}

TEST(GreenMorphism, IdentityFrameChangesNothing) {
  const Lattice lat(6, 6, 0.05, 0.2);
  const auto g = green::dirac_green(gamma4, smooth_potential(lat, 0.5, 0.3), 1.0);
  const auto gm = green::green_morphism(g, transport::make_frame_preset("identity", lat, 4));
  for (int t = 0; t < lat.nt; ++t)
    for (int tp = t; tp < lat.nt; ++tp) EXPECT_EQ(max_abs(gm.block(tp, t) - g.block(tp, t)), 0.0);
}

TEST(GreenMorphism, ReconstructsSections) {
  const Lattice lat(8, 6, 0.05, 0.2);
  const auto pot = smooth_potential(lat, 0.5, 0.3);
  const auto frame = transport::make_frame_preset("random-smooth(4)", lat, 4);
  const auto g = green::dirac_green(gamma4, pot, 1.0);
  const auto gb = green::green_morphism(g, frame);
  const CVector psi = random_state(4 * lat.nx, 6);
  const CVector sec = waveeq::to_bundle(frame, psi, 1);
  for (int tp = 1; tp < lat.nt; ++tp) {
    const CVector want = waveeq::to_bundle(frame, green::apply_kernel(g, psi, 1, tp), tp);
    EXPECT_LT((green::apply_kernel(gb, sec, 1, tp) - want).cwiseAbs().maxCoeff(), 1e-11);
  }
}

// Morphing by l1 and then by l2 equals morphing once by the product l1 l2.
TEST(GreenMorphism, Functorial) {
  const Lattice lat(5, 4, 0.05, 0.2);
  const auto f1 = transport::make_frame_preset("random-smooth(1)", lat, 4);
  const auto f2 = transport::make_frame_preset("boost(0.3)", lat, 4);
  MatrixField prod(lat, 4);
  for (std::size_t i = 0; i < lat.sites(); ++i) prod[i] = f1.basis().matrix()[i] * f2.basis().matrix()[i];
  const transport::FrameField f12(prod);
  const auto g = green::dirac_green(gamma4, PotentialField(lat), 1.0);
  const auto twice = green::green_morphism(green::green_morphism(g, f1), f2);
  const auto once = green::green_morphism(g, f12);
  for (int t = 0; t < lat.nt; ++t)
    for (int tp = t; tp < lat.nt; ++tp)
      EXPECT_LT(max_abs(twice.block(tp, t) - once.block(tp, t)), 1e-11 * std::max(1.0, max_abs(once.block(tp, t))));
  EXPECT_LT(max_abs(twice.weight(2) - once.weight(2)), 1e-12);
}

TEST(FiniteWindow, ZeroHamiltonianGivesIdentity) {
  const Lattice lat(9, 5, 0.1, 0.2);
  const waveeq::CrankNicolsonPropagator prop([](double) { return CMatrix::Zero(5, 5); }, lat, 1.0, true);
  EXPECT_EQ(max_abs(green::finite_window_evolution(prop, 4, 3) - CMatrix::Identity(5, 5)), 0.0);
  EXPECT_THROW(green::finite_window_evolution(prop, 4, 5), IndexOutOfRange);
}

TEST(FiniteWindow, UnitaryAndGroupLaw) {
  const Lattice lat(13, 6, 0.05, 0.2);
  PotentialField pot = smooth_potential(lat, 0.5, 0.3);
  pot.A[0] = ScalarField::sample(lat, [](double t, double x) { return 0.3 * std::sin(x - 5 * t); });
  const auto prop = waveeq::dirac_propagator(gamma4, pot, 1.0);
  const CMatrix s = green::finite_window_evolution(prop, 6, 4);
  EXPECT_LT(max_abs(s.adjoint() * s - CMatrix::Identity(s.rows(), s.cols())), 1e-12);
  EXPECT_LT(max_abs(s - prop.evolution(10, 6) * prop.evolution(6, 2)), 1e-12);
}

TEST(Born, FreeFixedPointIsExact) {
  const Lattice lat(6, 6, 0.05, 0.2);
  const PotentialField pot = smooth_potential(lat, 0.0, 0.5);
  const auto g0 = green::dirac_green(gamma4, PotentialField(lat), 1.0);
  const auto res = green::born_iterate(g0, gamma4, pot, 3);
  EXPECT_EQ(res.residuals.front(), 0.0);
  EXPECT_EQ(max_abs(green::materialize(res.kernel) - green::materialize(g0)), 0.0);
}

TEST(Born, ConvergedKernelSolvesIntegralEquation) {
  const Lattice lat(6, 6, 0.05, 0.2);
  const PotentialField pot = smooth_potential(lat, 0.5, 0.5);
  const auto g0 = green::dirac_green(gamma4, PotentialField(lat, 0.5), 1.0);
  const auto res = green::born_solve(g0, gamma4, pot, 1e-12);
  EXPECT_FALSE(res.divergence_warning);
  EXPECT_LT(green::born_fixed_point_residual(res.kernel, g0, gamma4, pot), 1e-11);
  for (std::size_t i = 1; i < res.residuals.size(); ++i) EXPECT_LT(res.residuals[i], res.residuals[i - 1]);
}

TEST(Budget, MaterializeAndBornRefuse) {
  const Lattice lat(6, 6, 0.05, 0.2);
  const auto g0 = green::dirac_green(gamma4, PotentialField(lat), 1.0);
  const std::size_t one = green::materialized_bytes(lat, 4);
  EXPECT_THROW(green::materialize(g0, one - 1), BudgetExceeded);
  EXPECT_NO_THROW(green::materialize(g0, one));
  EXPECT_THROW(green::born_iterate(g0, gamma4, PotentialField(lat), 1, 2 * one), BudgetExceeded);
}

// The phi-row, chi-column block of the two-component kernel and the scalar
// kernel approximate the same function; their gap shrinks with the step.
TEST(KleinGordonGreen, TildeFirstRowMatchesScalarKernel) {
  const double T = 0.8;
  std::vector<double> gaps;
  for (int n : {16, 32, 64}) {
    const Lattice lat(n + 1, 12, T / n, 0.25);
    PotentialField pot(lat, 0.5);
    pot.A[0] = ScalarField(lat, 0.4);
    const auto scalar = green::kg_scalar_green(pot, 1.0);
    const auto tilde = green::kg_green_tilde(pot, 1.0);
    const auto [phi_phi, phi_chi] = green::first_row_blocks(tilde.block(n, 0));
    gaps.push_back(max_abs(phi_chi - scalar.block(n, 0)) / max_abs(scalar.block(n, 0)));
  }
  EXPECT_LT(gaps[1], gaps[0]);
  EXPECT_LT(gaps[2], gaps[1]);
  EXPECT_LT(gaps[2], 1e-2);
}

TEST(KleinGordonGreen, ReconstructionOfZeroDataIsZero) {
  const Lattice lat(8, 6, 0.05, 0.2);
  const auto g = green::kg_scalar_green(PotentialField(lat), 1.0);
  const CVector z = CVector::Zero(lat.nx);
  EXPECT_EQ(green::kg_reconstruct(g, z, z, PotentialField(lat), 1, 5).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(green::kg_reconstruct(g, z, z, PotentialField(lat), 0, 5), IndexOutOfRange);
  EXPECT_THROW(g.weight(0), ConfigError);
}

TEST(KleinGordonGreen, ScalarKernelInitialData) {
  const Lattice lat(6, 5, 0.05, 0.2);
  const auto g = green::kg_scalar_green(PotentialField(lat), 1.0);
  EXPECT_EQ(max_abs(g.block(2, 2)), 0.0);
  // g(t+1, t) = h / dx + O(h^3)
  EXPECT_LT(max_abs(g.block(3, 2) - CMatrix::Identity(5, 5) * (lat.dt / lat.dx)), 1e-3 * lat.dt / lat.dx);
}

TEST(KernelDump, RoundTrip) {
  const Lattice lat(5, 4, 0.05, 0.2);
  const auto g = green::dirac_green(gamma4, smooth_potential(lat, 0.5, 0.3), 1.0);
  std::stringstream ss;
  kernel_io::write_dump(ss, g, {0, 3});
  EXPECT_EQ(ss.str().size(), kernel_io::dump_bytes(g, 5 + 2));
  const auto [h, blocks] = kernel_io::read_dump(ss);
  EXPECT_EQ(h.family, green::Family::dirac);
  EXPECT_EQ(h.components, 4u);
  EXPECT_EQ(h.nt, 5u);
  EXPECT_EQ(h.nx, 4u);
  EXPECT_EQ(h.dt, 0.05);
  EXPECT_EQ(h.block_count, 7u);
  for (const auto& b : blocks) EXPECT_EQ(max_abs(b.block - g.block(static_cast<int>(b.tp), static_cast<int>(b.t))), 0.0);
}

TEST(KernelDump, BudgetRefusalLeavesNoFile) {
  const Lattice lat(5, 4, 0.05, 0.2);
  const auto g = green::dirac_green(gamma4, PotentialField(lat), 1.0);
  const auto path = std::filesystem::temp_directory_path() / "relbundle_refused.bin";
  std::filesystem::remove(path);
  EXPECT_THROW(kernel_io::write_dump(path.string(), g, {}, 1000), BudgetExceeded);
  EXPECT_FALSE(std::filesystem::exists(path));
}

TEST(KernelDump, RejectsForeignBytes) {
  std::stringstream ss("not a dump at all, definitely not");
  EXPECT_THROW(kernel_io::read_dump(ss), ConfigError);
}
