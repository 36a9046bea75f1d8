#ifndef RELBUNDLE_WAVEEQ_HPP
#define RELBUNDLE_WAVEEQ_HPP

// Conventional-picture solvers and residual evaluators for the Dirac and
// Klein-Gordon equations on the 1+1-D lattice, and the bundle-picture
// Dirac evolution.
//
// Slice states are site-major vectors: index x*k + component.

#include "relbundle/clifford.hpp"
#include "relbundle/potential.hpp"
#include "relbundle/transport.hpp"

#include <functional>
#include <memory>
#include <numbers>
#include <optional>

namespace relbundle::waveeq {

using SpinorField = VectorField;
using FiveComponentField = VectorField;

// ---------------------------------------------------------------------------
// Generic Crank-Nicolson propagation for slice Hamiltonians
// ---------------------------------------------------------------------------

enum class Scheme { crank_nicolson, exact_exponential };

struct EvolutionDiagnostics {
  double max_h_dt = 0.0;          ///< ||H||_2 dt / hbar over the slices visited
  bool accuracy_warning = false;  ///< set when max_h_dt > 1
};

/// Slice Hamiltonian at fractional time index s (s = n + 1/2 for the step n -> n+1).
using SliceHamiltonian = std::function<CMatrix(double s)>;

/// Unitary Crank-Nicolson stepping of i hbar d_t psi = H(t) psi with H taken
/// at the midpoint of every step.
class CrankNicolsonPropagator {
 public:
  CrankNicolsonPropagator(SliceHamiltonian h, const Lattice& lat, double hbar, bool time_independent)
      : h_(std::move(h)), lat_(lat), hbar_(hbar), static_(time_independent) {
    if (static_) static_step_ = std::make_shared<const CMatrix>(build_step(0.5));
  }

  [[nodiscard]] const Lattice& lattice() const { return lat_; }
  [[nodiscard]] bool time_independent() const { return static_; }
  [[nodiscard]] CMatrix hamiltonian(double s) const { return h_(s); }
  [[nodiscard]] double hbar() const { return hbar_; }

  /// (1 + i dt H/2hbar)^{-1} (1 - i dt H/2hbar) for the step n -> n+1.
  [[nodiscard]] CMatrix step_matrix(int n) const { return static_ ? *static_step_ : build_step(n + 0.5); }

  [[nodiscard]] CVector evolve(CVector psi, int n0, int n1, EvolutionDiagnostics* diag = nullptr) const {
    if (diag) note(diag, n0);
    if (n1 >= n0) {
      for (int n = n0; n < n1; ++n) psi = step_matrix(n) * psi;
    } else {
      for (int n = n0 - 1; n >= n1; --n) psi = step_matrix(n).adjoint() * psi;
    }
    return psi;
  }

  /// Dense U(n1, n0).
  [[nodiscard]] CMatrix evolution(int n1, int n0) const {
    const Eigen::Index dim = h_(n0 + 0.5).rows();
    CMatrix u = CMatrix::Identity(dim, dim);
    if (n1 >= n0) {
      for (int n = n0; n < n1; ++n) u = step_matrix(n) * u;
    } else {
      for (int n = n0 - 1; n >= n1; --n) u = step_matrix(n).adjoint() * u;
    }
    return u;
  }

  /// U(n0, n0), U(n0+1, n0), ..., U(n_last, n0).
  [[nodiscard]] std::vector<CMatrix> evolutions_from(int n0, int n_last) const {
    std::vector<CMatrix> out;
    const Eigen::Index dim = h_(n0 + 0.5).rows();
    CMatrix u = CMatrix::Identity(dim, dim);
    out.push_back(u);
    for (int n = n0; n < n_last; ++n) {
      u = step_matrix(n) * u;
      out.push_back(u);
    }
    return out;
  }

 private:
  [[nodiscard]] CMatrix build_step(double s) const {
    const CMatrix h = h_(s);
    const Eigen::Index dim = h.rows();
    const cplx a = I_unit * (lat_.dt / (2.0 * hbar_));
    const CMatrix lhs = CMatrix::Identity(dim, dim) + a * h;
    const CMatrix rhs = CMatrix::Identity(dim, dim) - a * h;
    return lhs.partialPivLu().solve(rhs);
  }
  void note(EvolutionDiagnostics* diag, int n0) const {
    const CMatrix h = h_(n0 + 0.5);
    const double norm = Eigen::SelfAdjointEigenSolver<CMatrix>(h, Eigen::EigenvaluesOnly).eigenvalues().cwiseAbs().maxCoeff();
    diag->max_h_dt = std::max(diag->max_h_dt, norm * lat_.dt / hbar_);
    diag->accuracy_warning = diag->max_h_dt > 1.0;
  }

  SliceHamiltonian h_;
  Lattice lat_;
  double hbar_;
  bool static_;
  std::shared_ptr<const CMatrix> static_step_;
};

/// exp(-i H tau / hbar) of a Hermitian matrix by eigendecomposition.
inline CMatrix exact_exponential(const CMatrix& h, double tau, double hbar) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  const CVector phase = (es.eigenvalues().cast<cplx>() * (-I_unit * tau / hbar)).array().exp();
  return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

inline void require_hermitian(const CMatrix& h, const char* what) {
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw NonHermitian(std::string(what) + " is not Hermitian");
}

// ---------------------------------------------------------------------------
// Dirac equation
// ---------------------------------------------------------------------------

/// H = gamma^0 (-i hbar c gamma^k D_k + m c^2) + e A_0 on the slice at
/// fractional time index s, with centered spatial differences.
inline CMatrix dirac_hamiltonian(const clifford::GammaSet& g, const PotentialField& pot, double m, double s) {
  const Lattice& lat = pot.lattice();
  const int nx = lat.nx;
  const double c = lat.c;
  const double hbar = pot.hbar;
  CMatrix h = CMatrix::Zero(4 * nx, 4 * nx);
  std::array<Eigen::Matrix4cd, 4> alpha;
  for (int k = 1; k < 4; ++k) alpha[static_cast<std::size_t>(k)] = g[0] * g[k];
  const Eigen::Matrix4cd hop = alpha[1] * (-I_unit * hbar * c / (2.0 * lat.dx));
  for (int x = 0; x < nx; ++x) {
    Eigen::Matrix4cd onsite = g[0] * (m * c * c) + Eigen::Matrix4cd::Identity() * (pot.e * pot.at(0, s, x));
    for (int k = 1; k < 4; ++k) onsite += alpha[static_cast<std::size_t>(k)] * (pot.e * pot.at(k, s, x));
    h.block<4, 4>(4 * x, 4 * x) += onsite;
    h.block<4, 4>(4 * x, 4 * lat.wrap_x(x + 1)) += hop;
    h.block<4, 4>(4 * x, 4 * lat.wrap_x(x - 1)) -= hop;
  }
  if (!pot.is_real()) throw NonHermitian("Dirac Hamiltonian needs a real potential");
  return h;
}

inline CrankNicolsonPropagator dirac_propagator(const clifford::GammaSet& g, const PotentialField& pot, double m) {
  return CrankNicolsonPropagator([g, pot, m](double s) { return dirac_hamiltonian(g, pot, m, s); }, pot.lattice(),
                                 pot.hbar, pot.is_static());
}

/// psi(n1) from psi(n0). The exact exponential needs a static potential.
inline CVector evolve_dirac(const clifford::GammaSet& g, const CVector& psi0, const PotentialField& pot, double m, int n0,
                            int n1, Scheme scheme = Scheme::crank_nicolson, EvolutionDiagnostics* diag = nullptr) {
  const Lattice& lat = pot.lattice();
  if (psi0.size() != 4 * lat.nx) throw DimensionMismatch("Dirac slice state must have 4*nx entries");
  if (scheme == Scheme::exact_exponential) {
    if (!pot.is_static()) throw ConfigError("exact-exponential evolution needs a time-independent potential");
    const CMatrix h = dirac_hamiltonian(g, pot, m, 0.0);
    if (diag) {
      diag->max_h_dt = std::max(diag->max_h_dt, h.operatorNorm() * lat.dt / pot.hbar);
      diag->accuracy_warning = diag->max_h_dt > 1.0;
    }
    return exact_exponential(h, (n1 - n0) * lat.dt, pot.hbar) * psi0;
  }
  return dirac_propagator(g, pot, m).evolve(psi0, n0, n1, diag);
}

/// Whole spacetime field obtained by CN evolution of psi0 from slice n0;
/// slices before n0 are left at zero.
inline SpinorField evolve_dirac_history(const clifford::GammaSet& g, const CVector& psi0, const PotentialField& pot,
                                        double m, int n0 = 0) {
  const Lattice& lat = pot.lattice();
  const auto prop = dirac_propagator(g, pot, m);
  SpinorField out(lat, 4);
  CVector psi = psi0;
  out.set_slice(n0, psi);
  for (int n = n0; n + 1 < lat.nt; ++n) {
    psi = prop.step_matrix(n) * psi;
    out.set_slice(n + 1, psi);
  }
  return out;
}

/// Bundle-picture Crank-Nicolson: the state section Psi = l^{-1} psi is
/// stepped with the bundle morphism of H and the transport between slices,
///   (1 + i a Hb_{n+1}) Psi' = L(n+1 <- n) (1 - i a Hb_n) Psi,
/// where Hb_j = l_j^{-1} H l_j and a = dt / (2 hbar).
inline CVector evolve_dirac_bundle(const clifford::GammaSet& g, const CVector& section0,
                                   const transport::FrameField& frame, const PotentialField& pot, double m, int n0,
                                   int n1) {
  const Lattice& lat = pot.lattice();
  require_same_lattice(lat, frame.lattice(), "evolve_dirac_bundle");
  if (frame.n() != 4) throw DimensionMismatch("Dirac bundle evolution needs a 4x4 frame");
  if (section0.size() != 4 * lat.nx) throw DimensionMismatch("Dirac slice state must have 4*nx entries");
  if (n1 < n0) throw ConfigError("bundle evolution runs forward in time");
  const Eigen::Index dim = 4 * lat.nx;
  const cplx a = I_unit * (lat.dt / (2.0 * pot.hbar));
  const CMatrix id = CMatrix::Identity(dim, dim);
  auto morph = [&](const CMatrix& h, int t) {
    // l_t^{-1} H l_t using the block-diagonal structure of the frame.
    CMatrix out(dim, dim);
    for (int xr = 0; xr < lat.nx; ++xr)
      for (int xc = 0; xc < lat.nx; ++xc)
        out.block<4, 4>(4 * xr, 4 * xc) = frame.l_inv(t, xr) * h.block<4, 4>(4 * xr, 4 * xc) * frame.l(t, xc);
    return out;
  };
  CVector psi = section0;
  for (int n = n0; n < n1; ++n) {
    const CMatrix h = dirac_hamiltonian(g, pot, m, n + 0.5);
    const CMatrix lhs = id + a * morph(h, n + 1);
    CVector rhs = (id - a * morph(h, n)) * psi;
    for (int x = 0; x < lat.nx; ++x) {
      const CMatrix hop = frame.l_inv(n + 1, x) * frame.l(n, x);  // L((n+1,x), (n,x))
      rhs.segment<4>(4 * x) = hop * rhs.segment<4>(4 * x).eval();
    }
    psi = lhs.partialPivLu().solve(rhs);
  }
  return psi;
}

/// Slice section l_t^{-1} psi and its inverse l_t Psi.
inline CVector to_bundle(const transport::FrameField& frame, const CVector& psi, int t) {
  const int n = frame.n();
  CVector out(psi.size());
  for (int x = 0; x < frame.lattice().nx; ++x) out.segment(n * x, n) = frame.l_inv(t, x) * psi.segment(n * x, n);
  return out;
}
inline CVector from_bundle(const transport::FrameField& frame, const CVector& section, int t) {
  const int n = frame.n();
  CVector out(section.size());
  for (int x = 0; x < frame.lattice().nx; ++x) out.segment(n * x, n) = frame.l(t, x) * section.segment(n * x, n);
  return out;
}

/// (i hbar gamma^mu D_mu - m c) psi with centered differences.
inline SpinorField dirac_residual(const clifford::GammaSet& g, const SpinorField& psi, const PotentialField& pot,
                                  double m) {
  if (psi.n() != 4) throw DimensionMismatch("Dirac residual needs a 4-spinor field");
  const Lattice& lat = psi.lattice();
  require_same_lattice(lat, pot.lattice(), "dirac_residual");
  const double kappa = pot.kappa();
  SpinorField out(lat, 4);
  for (int mu = 0; mu < 4; ++mu) {
    // D_mu psi componentwise
    SpinorField d(lat, 4);
    for (int a = 0; a < 4; ++a) {
      d[a] = centered_difference(psi[a], mu);
      for (std::size_t i = 0; i < lat.sites(); ++i) d[a][i] += I_unit * kappa * pot.A[static_cast<std::size_t>(mu)][i] * psi[a][i];
    }
    const Eigen::Matrix4cd gm = g[mu] * (I_unit * pot.hbar);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        if (gm(a, b) != cplx(0.0))
          for (std::size_t i = 0; i < lat.sites(); ++i) out[a][i] += gm(a, b) * d[b][i];
  }
  for (int a = 0; a < 4; ++a)
    for (std::size_t i = 0; i < lat.sites(); ++i) out[a][i] -= m * lat.c * psi[a][i];
  return out;
}

// ---------------------------------------------------------------------------
// Lattice plane waves
// ---------------------------------------------------------------------------

/// Dispersion data of e^{-i(omega t - k x)} for the centered-difference
/// symbols: sin(omega dt)/dt = c sqrt(ktilde^2 + (m c / hbar)^2), ktilde = sin(k dx)/dx.
struct LatticeMode {
  double k = 0.0;
  double k_tilde = 0.0;
  double omega = 0.0;
  double omega_tilde = 0.0;
};

inline LatticeMode lattice_mode(const Lattice& lat, int mode, double m, double hbar, bool positive_energy = true) {
  LatticeMode out;
  out.k = 2.0 * std::numbers::pi * mode / lat.length_x();
  out.k_tilde = std::sin(out.k * lat.dx) / lat.dx;
  const double mc = m * lat.c / hbar;
  out.omega_tilde = lat.c * std::sqrt(out.k_tilde * out.k_tilde + mc * mc);
  if (out.omega_tilde * lat.dt > 1.0) throw ConfigError("time step too large for a lattice plane wave of this mode");
  out.omega = std::asin(out.omega_tilde * lat.dt) / lat.dt;
  if (!positive_energy) {
    out.omega = -out.omega;
    out.omega_tilde = -out.omega_tilde;
  }
  return out;
}

/// Unit-norm spinor u with (hbar omega~/c gamma^0 - hbar k~ gamma^1 - m c) u = 0.
inline Eigen::Vector4cd plane_wave_spinor(const clifford::GammaSet& g, const Lattice& lat, const LatticeMode& md,
                                          double m, double hbar) {
  const Eigen::Matrix4cd s = g[0] * (hbar * md.omega_tilde / lat.c) - g[1] * (hbar * md.k_tilde) -
                             Eigen::Matrix4cd::Identity() * (m * lat.c);
  Eigen::JacobiSVD<Eigen::Matrix4cd> svd(s, Eigen::ComputeFullV);
  Eigen::Vector4cd u = svd.matrixV().col(3);
  // fix the global phase deterministically
  Eigen::Index arg = 0;
  u.cwiseAbs().maxCoeff(&arg);
  u *= std::polar(1.0, -std::arg(u(arg)));
  return u.normalized();
}

inline SpinorField dirac_plane_wave(const clifford::GammaSet& g, const Lattice& lat, int mode, double m, double hbar,
                                    bool positive_energy = true) {
  const LatticeMode md = lattice_mode(lat, mode, m, hbar, positive_energy);
  const Eigen::Vector4cd u = plane_wave_spinor(g, lat, md, m, hbar);
  SpinorField out(lat, 4);
  for (int t = 0; t < lat.nt; ++t)
    for (int x = 0; x < lat.nx; ++x) {
      const cplx ph = std::exp(-I_unit * (md.omega * lat.time(t) - md.k * lat.position(x)));
      out.set(t, x, u * ph);
    }
  return out;
}

inline ScalarField kg_plane_wave(const Lattice& lat, int mode, double m, double hbar, bool positive_energy = true) {
  const LatticeMode md = lattice_mode(lat, mode, m, hbar, positive_energy);
  return ScalarField::sample(lat, [&](double t, double x) { return std::exp(-I_unit * (md.omega * t - md.k * x)); });
}

// ---------------------------------------------------------------------------
// Klein-Gordon equation
// ---------------------------------------------------------------------------

inline void require_scalar_inputs(const ScalarField& phi, const PotentialField& pot) {
  require_same_lattice(phi.lattice(), pot.lattice(), "Klein-Gordon field and potential");
}

/// D_mu phi = d_mu phi + i kappa A_mu phi (centered difference).
inline ScalarField covariant_difference(const ScalarField& phi, const PotentialField& pot, int mu) {
  ScalarField d = centered_difference(phi, mu);
  const double kappa = pot.kappa();
  const auto& a = pot.A[static_cast<std::size_t>(mu)];
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += I_unit * kappa * a[i] * phi[i];
  return d;
}

/// (D^mu D_mu + m^2 c^2 / hbar^2) phi built from composed first differences.
inline ScalarField kg_residual(const ScalarField& phi, const PotentialField& pot, double m) {
  require_scalar_inputs(phi, pot);
  const Lattice& lat = phi.lattice();
  const double mc = m * lat.c / pot.hbar;
  ScalarField out = (mc * mc) * phi;
  clifford::Metric eta;
  for (int mu = 0; mu < 4; ++mu) {
    const ScalarField dd = covariant_difference(covariant_difference(phi, pot, mu), pot, mu);
    out += static_cast<double>(eta(mu, mu)) * dd;
  }
  return out;
}

/// varphi = (i hbar D_0 phi, ..., i hbar D_3 phi, m c phi).
inline FiveComponentField kg_reduce_5(const ScalarField& phi, const PotentialField& pot, double m) {
  require_scalar_inputs(phi, pot);
  if (m == 0.0) throw DegenerateMass("five-component reduction needs m > 0");
  const Lattice& lat = phi.lattice();
  FiveComponentField out(lat, 5);
  for (int mu = 0; mu < 4; ++mu) out[mu] = (I_unit * pot.hbar) * covariant_difference(phi, pot, mu);
  out[4] = (m * lat.c) * phi;
  return out;
}

/// (i hbar Gamma^mu D_mu - m c 1_5) varphi.
inline FiveComponentField kg5_residual(const FiveComponentField& varphi, const PotentialField& pot, double m) {
  if (varphi.n() != 5) throw DimensionMismatch("five-component residual needs 5 components");
  require_same_lattice(varphi.lattice(), pot.lattice(), "kg5_residual");
  if (m == 0.0) throw DegenerateMass("five-component reduction needs m > 0");
  const Lattice& lat = varphi.lattice();
  const auto gam = clifford::build_gamma5_set();
  FiveComponentField out = (-m * lat.c) * varphi;
  for (int mu = 0; mu < 4; ++mu) {
    const auto& gm = gam[mu];
    for (int j = 0; j < 5; ++j) {
      bool used = false;
      for (int i = 0; i < 5; ++i) used = used || gm(i, j) != 0.0;
      if (!used) continue;
      const ScalarField d = covariant_difference(varphi[j], pot, mu);
      for (int i = 0; i < 5; ++i)
        if (gm(i, j) != 0.0) out[i] += (I_unit * pot.hbar * gm(i, j)) * d;
    }
  }
  return out;
}

/// Spatial part R of d_0^2 phi = R phi - 2 i kappa A_0 d_0 phi on the slice at
/// fractional index s:  R = D_1 D_1 - (m c/hbar)^2 + kappa^2 (A_0^2 - A_2^2 - A_3^2) - i kappa d_0 A_0.
inline CMatrix kg_spatial_operator(const PotentialField& pot, double m, double s) {
  const Lattice& lat = pot.lattice();
  const int nx = lat.nx;
  const double kappa = pot.kappa();
  const double mc = m * lat.c / pot.hbar;
  CMatrix d1 = CMatrix::Zero(nx, nx);
  for (int x = 0; x < nx; ++x) {
    d1(x, lat.wrap_x(x + 1)) += 1.0 / (2.0 * lat.dx);
    d1(x, lat.wrap_x(x - 1)) -= 1.0 / (2.0 * lat.dx);
    d1(x, x) += I_unit * kappa * pot.at(1, s, x);
  }
  CMatrix r = d1 * d1;
  const int t0 = static_cast<int>(std::floor(s));
  const double w = s - t0;
  for (int x = 0; x < nx; ++x) {
    const double a0 = pot.at(0, s, x), a2 = pot.at(2, s, x), a3 = pot.at(3, s, x);
    const double da0 = w == 0.0 ? pot.d0(0, t0, x) : (1.0 - w) * pot.d0(0, t0, x) + w * pot.d0(0, t0 + 1, x);
    r(x, x) += -mc * mc + kappa * kappa * (a0 * a0 - a2 * a2 - a3 * a3) - I_unit * kappa * da0;
  }
  return r;
}

/// Generator M of d_0 (phi, chi) = M (phi, chi), chi = d_0 phi, site-major.
inline CMatrix kg_two_component_generator(const PotentialField& pot, double m, double s) {
  const Lattice& lat = pot.lattice();
  const int nx = lat.nx;
  const CMatrix r = kg_spatial_operator(pot, m, s);
  const double kappa = pot.kappa();
  CMatrix g = CMatrix::Zero(2 * nx, 2 * nx);
  for (int x = 0; x < nx; ++x) {
    g(2 * x, 2 * x + 1) = 1.0;
    for (int y = 0; y < nx; ++y) g(2 * x + 1, 2 * y) = r(x, y);
    g(2 * x + 1, 2 * x + 1) = -2.0 * I_unit * kappa * pot.at(0, s, x);
  }
  return g;
}

/// Implicit-midpoint stepping of the two-component Klein-Gordon system.
class KleinGordonTwoComponent {
 public:
  KleinGordonTwoComponent(const PotentialField& pot, double m) : pot_(pot), m_(m), static_(pot.is_static()) {
    if (static_) static_step_ = std::make_shared<const CMatrix>(build_step(0.5));
  }

  [[nodiscard]] const Lattice& lattice() const { return pot_.lattice(); }
  [[nodiscard]] CMatrix step_matrix(int n) const { return static_ ? *static_step_ : build_step(n + 0.5); }

  [[nodiscard]] CVector evolve(CVector state, int n0, int n1) const {
    if (state.size() != 2 * lattice().nx) throw DimensionMismatch("two-component state must have 2*nx entries");
    for (int n = n0; n < n1; ++n) state = step_matrix(n) * state;
    return state;
  }
  [[nodiscard]] std::vector<CMatrix> evolutions_from(int n0, int n_last) const {
    std::vector<CMatrix> out;
    CMatrix u = CMatrix::Identity(2 * lattice().nx, 2 * lattice().nx);
    out.push_back(u);
    for (int n = n0; n < n_last; ++n) {
      u = step_matrix(n) * u;
      out.push_back(u);
    }
    return out;
  }

 private:
  [[nodiscard]] CMatrix build_step(double s) const {
    const CMatrix g = kg_two_component_generator(pot_, m_, s);
    const double h = lattice().step(0);
    const CMatrix id = CMatrix::Identity(g.rows(), g.cols());
    return (id - 0.5 * h * g).partialPivLu().solve(id + 0.5 * h * g);
  }

  PotentialField pot_;
  double m_;
  bool static_;
  std::shared_ptr<const CMatrix> static_step_;
};

/// One midpoint step n -> n+1 of the two-component state (phi, d_0 phi).
inline CVector kg_two_component_step(const CVector& state, const PotentialField& pot, double m, int n) {
  if (state.size() != 2 * pot.lattice().nx) throw DimensionMismatch("two-component state must have 2*nx entries");
  const CMatrix g = kg_two_component_generator(pot, m, n + 0.5);
  const double h = pot.lattice().step(0);
  const CMatrix id = CMatrix::Identity(g.rows(), g.cols());
  return (id - 0.5 * h * g).partialPivLu().solve((id + 0.5 * h * g) * state);
}

inline CVector pack_two_component(const CVector& phi, const CVector& chi) {
  CVector s(2 * phi.size());
  for (Eigen::Index x = 0; x < phi.size(); ++x) {
    s(2 * x) = phi(x);
    s(2 * x + 1) = chi(x);
  }
  return s;
}
inline CVector two_component_phi(const CVector& s) { return Eigen::Map<const CVector, 0, Eigen::InnerStride<2>>(s.data(), s.size() / 2); }
inline CVector two_component_chi(const CVector& s) {
  return Eigen::Map<const CVector, 0, Eigen::InnerStride<2>>(s.data() + 1, s.size() / 2);
}

/// Klein-Gordon charge Q = Im sum_x phi^* (chi + i kappa A_0 phi) dx on slice t.
inline double kg_charge(const CVector& state, const PotentialField& pot, int t) {
  const Lattice& lat = pot.lattice();
  const double kappa = pot.kappa();
  double q = 0.0;
  for (int x = 0; x < lat.nx; ++x) {
    const cplx phi = state(2 * x), chi = state(2 * x + 1);
    q += (std::conj(phi) * (chi + I_unit * kappa * pot.A[0](t, x) * phi)).imag();
  }
  return q * lat.dx;
}

/// One leapfrog step for every column of `cur` (slice n) given slice n-1:
///   (g+ - 2g + g-)/h^2 + i kappa A_0 (g+ - g-)/h = R(n) g.
inline CMatrix kg_leapfrog_next(const CMatrix& prev, const CMatrix& cur, const PotentialField& pot, double m, int n) {
  const Lattice& lat = pot.lattice();
  const double h = lat.step(0);
  const double kappa = pot.kappa();
  CMatrix next = kg_spatial_operator(pot, m, n) * cur + (2.0 * cur - prev) / (h * h);
  for (int x = 0; x < lat.nx; ++x) {
    const cplx ika = I_unit * kappa * pot.A[0](n, x).real();
    next.row(x) += (ika / h) * prev.row(x);
    next.row(x) /= (1.0 / (h * h) + ika / h);
  }
  return next;
}

/// Second-order start: slice n+1 from (phi, d_0 phi) at slice n.
inline CMatrix kg_leapfrog_start(const CMatrix& phi, const CMatrix& chi, const PotentialField& pot, double m, int n) {
  const Lattice& lat = pot.lattice();
  const double h = lat.step(0);
  CMatrix acc = kg_spatial_operator(pot, m, n) * phi;
  for (int x = 0; x < lat.nx; ++x) acc.row(x) -= (2.0 * I_unit * pot.kappa() * pot.A[0](n, x).real()) * chi.row(x);
  return phi + h * chi + 0.5 * h * h * acc;
}

/// Scalar field obtained by leapfrog from (phi, d_0 phi) at slice n0; earlier slices are zero.
inline ScalarField evolve_kg_leapfrog(const CVector& phi0, const CVector& chi0, const PotentialField& pot, double m,
                                      int n0 = 0) {
  const Lattice& lat = pot.lattice();
  if (phi0.size() != lat.nx || chi0.size() != lat.nx) throw DimensionMismatch("Klein-Gordon slice must have nx entries");
  ScalarField out(lat);
  CMatrix prev = phi0;
  for (int x = 0; x < lat.nx; ++x) out(n0, x) = prev(x, 0);
  if (n0 + 1 >= lat.nt) return out;
  CMatrix cur = kg_leapfrog_start(phi0, chi0, pot, m, n0);
  for (int x = 0; x < lat.nx; ++x) out(n0 + 1, x) = cur(x, 0);
  for (int n = n0 + 1; n + 1 < lat.nt; ++n) {
    CMatrix next = kg_leapfrog_next(prev, cur, pot, m, n);
    prev = std::move(cur);
    cur = std::move(next);
    for (int x = 0; x < lat.nx; ++x) out(n + 1, x) = cur(x, 0);
  }
  return out;
}

inline CVector slice_of(const ScalarField& f, int t) {
  CVector v(f.lattice().nx);
  for (int x = 0; x < f.lattice().nx; ++x) v(x) = f(t, x);
  return v;
}

}  // namespace relbundle::waveeq

#endif  // RELBUNDLE_WAVEEQ_HPP
