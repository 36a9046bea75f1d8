#include "relbundle/transport.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace relbundle;

namespace {

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

ScalarField plane(const Lattice& lat, double k) {
  return ScalarField::sample(lat, [&](double, double x) { return std::exp(I_unit * k * x); });
}

}  // namespace

TEST(Clifford, DiracAnticommutatorsAreTwiceTheMetric) {
  const auto g = clifford::build_gamma_set();
  const double eta[4] = {1, -1, -1, -1};
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu) {
      const CMatrix want = CMatrix::Identity(4, 4) * (mu == nu ? 2.0 * eta[mu] : 0.0);
      EXPECT_EQ(max_abs(clifford::anticommutator(g, mu, nu) - want), 0.0) << mu << nu;
    }
}

TEST(Clifford, HermiticityPattern) {
  const auto g = clifford::build_gamma_set();
  EXPECT_EQ(max_abs(g[0] - g[0].adjoint()), 0.0);
  for (int k = 1; k < 4; ++k) EXPECT_EQ(max_abs(g[k] + g[k].adjoint()), 0.0);
}

// det(pslash - m) = (p.p - m^2)^2 for any real p.
TEST(Clifford, SlashDeterminantOracle) {
  const auto g = clifford::build_gamma_set();
  const std::array<std::array<double, 4>, 3> ps = {{{1.3, 0.2, -0.7, 0.4}, {0.1, 2.0, 0.0, -1.0}, {-0.5, 0.3, 0.3, 0.3}}};
  for (const auto& p : ps) {
    const double m = 0.8;
    const std::array<cplx, 4> lower = {p[0], -p[1], -p[2], -p[3]};
    const cplx det = (clifford::slash(g, lower) - Eigen::Matrix4cd::Identity() * m).determinant();
    const double pp = p[0] * p[0] - p[1] * p[1] - p[2] * p[2] - p[3] * p[3];
    EXPECT_NEAR(det.real(), (pp - m * m) * (pp - m * m), 1e-12);
    EXPECT_NEAR(det.imag(), 0.0, 1e-12);
  }
}

TEST(Clifford, SlashIsLinear) {
  const auto g = clifford::build_gamma_set();
  const std::array<cplx, 4> a = {1.0, cplx(0, 2), -0.5, 3.0}, b = {0.2, 0.1, cplx(1, 1), -1.0};
  const cplx s(0.3, -1.2);
  std::array<cplx, 4> comb{};
  for (std::size_t i = 0; i < 4; ++i) comb[i] = a[i] + s * b[i];
  EXPECT_LT(max_abs(clifford::slash(g, comb) - clifford::slash(g, a) - s * clifford::slash(g, b)), 1e-15);
}

// {G^mu, G^nu} = eta_nn E(mu,nu) + eta_mm E(nu,mu) + 2 eta_mm delta_mn E(4,4), worked out by hand.
TEST(Clifford, FiveByFiveAnticommutators) {
  const auto g5 = clifford::build_gamma5_set();
  const double eta[4] = {1, -1, -1, -1};
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu) {
      CMatrix want = CMatrix::Zero(5, 5);
      want(mu, nu) += eta[nu];
      want(nu, mu) += eta[mu];
      if (mu == nu) want(4, 4) += 2.0 * eta[mu];
      EXPECT_EQ(max_abs(clifford::anticommutator(g5, mu, nu) - want), 0.0) << mu << nu;
    }
}

TEST(Clifford, IndexChecked) {
  const auto g = clifford::build_gamma_set();
  EXPECT_THROW((void)g[4], IndexOutOfRange);
  EXPECT_THROW((void)g[-1], IndexOutOfRange);
}

TEST(MatrixOp, DerivativeSymbolOnPlaneWave) {
  const Lattice lat(6, 32, 0.1, 0.25);
  const double k = 2.0 * std::numbers::pi * 3 / lat.length_x();
  VectorField psi(lat, 2);
  psi[0] = plane(lat, k);
  psi[1] = plane(lat, -k);
  const auto d = matrixop::MatrixOperator::derivative(lat, 2, 1).apply(psi);
  const double sym = std::sin(k * lat.dx) / lat.dx;
  for (int t = 0; t < lat.nt; ++t)
    for (int x = 0; x < lat.nx; ++x) {
      EXPECT_LT(std::abs(d[0](t, x) - I_unit * sym * psi[0](t, x)), 1e-13);
      EXPECT_LT(std::abs(d[1](t, x) + I_unit * sym * psi[1](t, x)), 1e-13);
    }
}

TEST(MatrixOp, FrozenAxesDifferentiateToZero) {
  const Lattice lat(4, 8, 0.1, 0.2);
  VectorField psi(lat, 1);
  psi[0] = plane(lat, 1.0);
  EXPECT_EQ(matrixop::MatrixOperator::derivative(lat, 1, 2).apply(psi).max_abs(), 0.0);
  EXPECT_EQ(matrixop::MatrixOperator::derivative(lat, 1, 3).apply(psi).max_abs(), 0.0);
}

TEST(MatrixOp, IdentityFrameLeavesOperatorUnchanged) {
  const Lattice lat(8, 12, 0.1, 0.2);
  const auto g = clifford::build_gamma_set();
  const auto op = matrixop::MatrixOperator::slashed_derivative(lat, g);
  const auto frame = transport::make_frame_preset("identity", lat, 4);
  VectorField psi(lat, 4);
  for (int a = 0; a < 4; ++a) psi[a] = plane(lat, 1.0 + a);
  auto diff = matrixop::matrix_of(op, frame.basis()).apply(psi);
  diff -= op.apply(psi);
  EXPECT_LT(diff.max_abs(), 1e-13);
}

// For a constant frame C the frame matrix of gamma^mu d_mu is C^-1 gamma^mu C d_mu.
TEST(MatrixOp, ConstantFrameConjugatesCoefficients) {
  const Lattice lat(8, 12, 0.1, 0.2);
  const auto g = clifford::build_gamma_set();
  CMatrix c(4, 4);
  c << 1, 0.2, 0, cplx(0, 0.3), 0, 2, 0.1, 0, 0.5, 0, 1, 0, 0, cplx(0.1, 0.1), 0, 1.5;
  const matrixop::FrameMatrixField frame(MatrixField::constant(lat, c));
  const CMatrix ci = c.inverse();
  matrixop::MatrixOperator want(lat, 4);
  for (int mu = 0; mu < 2; ++mu)
    want += matrixop::MatrixOperator::constant(lat, ci * g[mu] * c) * matrixop::MatrixOperator::derivative(lat, 4, mu);
  VectorField psi(lat, 4);
  for (int a = 0; a < 4; ++a) psi[a] = plane(lat, 0.5 * (a + 1));
  auto diff = matrixop::matrix_of(matrixop::MatrixOperator::slashed_derivative(lat, g), frame).apply(psi);
  diff -= want.apply(psi);
  EXPECT_LT(diff.max_abs(), 1e-12);
}

// The frame matrix of the Dirac operator agrees with the conventional residual
// in the identity frame.
TEST(MatrixOp, DiracOperatorMatchesResidualInIdentityFrame) {
  const Lattice lat(10, 16, 0.05, 0.2);
  const auto g = clifford::build_gamma_set();
  PotentialField pot(lat, 0.7);
  pot.A[0] = ScalarField::sample(lat, [&](double t, double x) { return 0.3 * std::cos(2 * std::numbers::pi * x / lat.length_x()) + 0.1 * t; });
  pot.A[1] = ScalarField::sample(lat, [&](double, double x) { return 0.2 * std::sin(2 * std::numbers::pi * x / lat.length_x()); });
  const auto frame = transport::make_frame_preset("identity", lat, 4);
  const auto op = matrixop::dirac_operator_matrix(g, frame.basis(), pot, 1.0);
  VectorField psi(lat, 4);
  for (int a = 0; a < 4; ++a) psi[a] = plane(lat, 0.4 * (a + 1));
  // residual computed independently: i gamma^mu (d_mu + i kappa A_mu) - m
  VectorField want(lat, 4);
  for (int mu = 0; mu < 2; ++mu)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        if (g[mu](a, b) == cplx(0.0)) continue;
        ScalarField d = centered_difference(psi[b], mu);
        for (std::size_t i = 0; i < lat.sites(); ++i) d[i] += I_unit * pot.kappa() * pot.A[static_cast<std::size_t>(mu)][i] * psi[b][i];
        want[a] += (I_unit * g[mu](a, b)) * d;
      }
  for (int a = 0; a < 4; ++a) want[a] -= psi[a];
  auto diff = op.apply(psi);
  diff -= want;
  EXPECT_LT(diff.max_abs(), 1e-12);
}

TEST(MatrixOp, OdotIsAssociativeOnMixedEntries) {
  const Lattice lat(6, 10, 0.1, 0.2);
  const ScalarField f = ScalarField::sample(lat, [](double t, double x) { return cplx(1.0 + 0.3 * std::sin(x), 0.2 * t); });
  matrixop::MatrixOperator a(lat, 2), b(lat, 2), c(lat, 2);
  a(0, 1) = matrixop::OperatorEntry::derivative(lat, 1, 2.0);
  a(1, 1) = matrixop::OperatorEntry::multiply(f);
  b(0, 0) = matrixop::OperatorEntry::scalar(0.5) + matrixop::OperatorEntry::derivative(lat, 0);
  b(1, 0) = compose(matrixop::OperatorEntry::multiply(f), matrixop::OperatorEntry::derivative(lat, 1));
  c(0, 1) = matrixop::OperatorEntry::multiply(f, cplx(0, 1));
  c(1, 0) = matrixop::OperatorEntry::derivative(lat, 1);
  VectorField psi(lat, 2);
  psi[0] = plane(lat, 1.0);
  psi[1] = f;
  auto lhs = odot(odot(a, b), c).apply(psi);
  const auto rhs = odot(a, odot(b, c)).apply(psi);
  const auto nested = a.apply(b.apply(c.apply(psi)));
  auto d1 = lhs;
  d1 -= rhs;
  lhs -= nested;
  EXPECT_LT(d1.max_abs(), 1e-12);
  EXPECT_LT(lhs.max_abs(), 1e-12);
}

TEST(MatrixOp, SingularFrameIsRejected) {
  const Lattice lat(4, 4, 0.1, 0.2);
  CMatrix c = CMatrix::Identity(2, 2);
  c(1, 1) = 0.0;
  EXPECT_THROW(matrixop::FrameMatrixField(MatrixField::constant(lat, c)), SingularFrame);
}

TEST(Transport, PhaseFrameCoefficientIsIGradient) {
  // Gamma_mu = l^-1 d_mu l -> i d_mu theta for l = exp(i k theta); second-order in the step.
  double prev = 0.0;
  for (int n : {16, 32, 64}) {
    const Lattice lat(n, n, 3.2 / n, 3.2 / n);
    const double k = 0.4;
    const auto frame = transport::make_frame_preset("phase(0.4)", lat, 2);
    const auto coeffs = transport::coefficients(frame);
    const double two_pi = 2.0 * std::numbers::pi;
    double err = 0.0;
    for (int t = 0; t < lat.nt; ++t)
      for (int x = 0; x < lat.nx; ++x) {
        const double dth_x = k * two_pi / lat.length_x() * std::cos(two_pi * lat.position(x) / lat.length_x());
        const double dth_t =
            -k * 0.5 * two_pi / lat.length_t() * std::sin(two_pi * lat.time(t) / lat.length_t() + 0.3) / lat.c;
        err = std::max(err, max_abs(coeffs[1](t, x) - I_unit * dth_x * CMatrix::Identity(2, 2)));
        err = std::max(err, max_abs(coeffs[0](t, x) - I_unit * dth_t * CMatrix::Identity(2, 2)));
      }
    if (prev > 0.0) {
      EXPECT_NEAR(std::log2(prev / err), 2.0, 0.3) << n;
    }
    prev = err;
  }
}

TEST(Transport, UnitaryFrameGivesUnitaryTransport) {
  const Lattice lat(8, 8, 0.1, 0.2);
  const auto tr = transport::make_transport(transport::make_frame_preset("rotation(0.6)", lat, 4));
  EXPECT_TRUE(tr.frame().unitary());
  for (int i = 0; i < 10; ++i) {
    const CMatrix l = tr(Site{i % 8, (3 * i) % 8}, Site{(5 * i + 1) % 8, i % 8});
    EXPECT_LT(max_abs(l.adjoint() * l - CMatrix::Identity(4, 4)), 1e-13);
  }
}

TEST(Transport, CompositionAndIdentity) {
  const Lattice lat(8, 8, 0.1, 0.2);
  const auto tr = transport::make_transport(transport::make_frame_preset("random-smooth(3)", lat, 4));
  const Site a{0, 1}, b{5, 2}, c{3, 7};
  EXPECT_LT(max_abs(tr(c, b) * tr(b, a) - tr(c, a)), 1e-12);
  EXPECT_EQ(max_abs(tr(a, a) - CMatrix::Identity(4, 4)), 0.0);
  const std::vector<Site> path = {a, {0, 2}, {1, 2}, {2, 2}, b};
  EXPECT_LT(max_abs(tr.path_product(path) - tr(b, a)), 1e-12);
}

// The coefficient field equals the frame connection computed by hand.
TEST(Transport, CoefficientsEqualFrameConnection) {
  const Lattice lat(6, 10, 0.1, 0.2);
  const auto frame = transport::make_frame_preset("boost(0.3)", lat, 4);
  const auto coeffs = transport::coefficients(frame);
  for (int mu = 0; mu < 2; ++mu) {
    const MatrixField d = centered_difference(frame.basis().matrix(), mu);
    for (int t = 0; t < lat.nt; ++t)
      for (int x = 0; x < lat.nx; ++x)
        EXPECT_EQ(max_abs(coeffs[mu](t, x) - frame.l_inv(t, x) * d(t, x)), 0.0);
  }
}

TEST(Transport, CorruptedFactorizationIsDetected) {
  std::vector<CMatrix> f;
  for (int i = 0; i < 6; ++i) f.push_back(CMatrix::Identity(3, 3) * (1.0 + 0.1 * i) + CMatrix::Ones(3, 3) * 0.05 * i);
  auto good = transport::Factorization::from(f);
  EXPECT_TRUE(good.transport(0, 0).isIdentity(1e-12));
  EXPECT_LT(transport::generic_transport_check(good).max(), 1e-12);
  auto bad = good;
  bad.inverse[2] *= 1.01;
  const auto rep = transport::generic_transport_check(bad);
  EXPECT_GT(rep.identity, 1e-3);
  EXPECT_GT(rep.composition, 1e-3);
  EXPECT_LT(rep.linearity, 1e-12);  // still linear, just not a transport
}

TEST(Transport, TransportedSectionIsParallel) {
  // D_mu Psi = 0 in the continuum for Psi = l^-1 psi0; the lattice remainder is O(h^2).
  std::vector<double> errs;
  for (int n : {16, 32, 64}) {
    const Lattice lat(n, n, 3.2 / n, 3.2 / n);
    const auto frame = transport::make_frame_preset("rotation(0.5)", lat, 4);
    const CVector psi0 = (CVector(4) << 1.0, cplx(0, 1), 0.5, -0.25).finished();
    const auto sec = transport::transported_section(frame, psi0, Site{0, 0});
    const auto coeffs = transport::coefficients(frame);
    errs.push_back(std::max(transport::derivation_along(sec, coeffs, 0).max_abs(),
                            transport::derivation_along(sec, coeffs, 1).max_abs()));
  }
  EXPECT_NEAR(std::log2(errs[0] / errs[1]), 2.0, 0.3);
  EXPECT_NEAR(std::log2(errs[1] / errs[2]), 2.0, 0.3);
}

TEST(Transport, PresetErrors) {
  const Lattice lat(4, 4, 0.1, 0.2);
  EXPECT_THROW(transport::make_frame_preset("spiral(1)", lat, 4), ConfigError);
  EXPECT_THROW(transport::make_frame_preset("phase", lat, 4), ConfigError);
  EXPECT_THROW(transport::make_frame_preset("phase(x)", lat, 4), ConfigError);
  EXPECT_NO_THROW(transport::make_frame_preset("random-smooth(7)", lat, 3));
}

TEST(Transport, NonUnitaryFrameFlaggedUnitaryIsRejected) {
  const Lattice lat(4, 4, 0.1, 0.2);
  EXPECT_THROW(transport::FrameField(MatrixField::constant(lat, 2.0 * CMatrix::Identity(2, 2)), true), SingularFrame);
}
