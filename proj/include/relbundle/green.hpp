#ifndef RELBUNDLE_GREEN_HPP
#define RELBUNDLE_GREEN_HPP

// Retarded Green kernels as slice-to-slice blocks.
//
// block(t', t) is a (k*nx) x (k*nx) matrix in site-major order. Together with
// the source weight W(t) it reconstructs the evolution:
//   psi(t') = block(t', t) * W(t) * psi(t)          (t' >= t)
// with W = i hbar dx (Schroedinger), i hbar dx gamma^0 (Dirac), dx (two-component
// Klein-Gordon). The scalar Klein-Gordon kernel has no single weight; use
// kg_reconstruct.

#include "relbundle/waveeq.hpp"

#include <cstdint>
#include <cstdlib>

namespace relbundle::green {

enum class Family : std::uint32_t { schrodinger = 1, dirac = 2, kg_scalar = 3, kg_two_component = 4 };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::schrodinger: return "schrodinger";
    case Family::dirac: return "dirac";
    case Family::kg_scalar: return "kg-scalar";
    case Family::kg_two_component: return "kg-2comp";
  }
  return "unknown";
}

/// Produces kernel blocks on demand.
class BlockSource {
 public:
  virtual ~BlockSource() = default;
  [[nodiscard]] virtual CMatrix block(int tp, int t) const = 0;
  /// block(t, t), block(t+1, t), ..., block(nt-1, t).
  [[nodiscard]] virtual std::vector<CMatrix> column(int t, int nt) const {
    std::vector<CMatrix> out;
    for (int tp = t; tp < nt; ++tp) out.push_back(block(tp, t));
    return out;
  }
};

using WeightFn = std::function<CMatrix(int t)>;

class GreenKernel {
 public:
  GreenKernel(const Lattice& lat, int k, Family family, std::shared_ptr<const BlockSource> src, WeightFn weight,
              bool retarded = true, double hbar = 1.0)
      : lat_(lat), k_(k), family_(family), src_(std::move(src)), weight_(std::move(weight)), retarded_(retarded),
        hbar_(hbar) {}

  [[nodiscard]] const Lattice& lattice() const { return lat_; }
  [[nodiscard]] int components() const { return k_; }
  [[nodiscard]] Eigen::Index slice_dim() const { return static_cast<Eigen::Index>(k_) * lat_.nx; }
  [[nodiscard]] Family family() const { return family_; }
  [[nodiscard]] bool retarded() const { return retarded_; }
  [[nodiscard]] double hbar() const { return hbar_; }
  [[nodiscard]] bool has_weight() const { return static_cast<bool>(weight_); }
  [[nodiscard]] const std::shared_ptr<const BlockSource>& source() const { return src_; }
  [[nodiscard]] const WeightFn& weight_fn() const { return weight_; }

  [[nodiscard]] CMatrix block(int tp, int t) const {
    check_slice(tp);
    check_slice(t);
    if (retarded_ && tp < t) return CMatrix::Zero(slice_dim(), slice_dim());
    return src_->block(tp, t);
  }
  /// Blocks for t' = t .. nt-1.
  [[nodiscard]] std::vector<CMatrix> column(int t) const {
    check_slice(t);
    return src_->column(t, lat_.nt);
  }
  [[nodiscard]] CMatrix weight(int t) const {
    if (!weight_) throw ConfigError(std::string(family_name(family_)) + " kernel has no slice weight");
    return weight_(t);
  }

 private:
  void check_slice(int t) const {
    if (t < 0 || t >= lat_.nt) throw IndexOutOfRange("kernel slice index out of range");
  }

  Lattice lat_;
  int k_;
  Family family_;
  std::shared_ptr<const BlockSource> src_;
  WeightFn weight_;
  bool retarded_;
  double hbar_;
};

/// block(t', t) * W(t) * psi; zero for t' < t on a retarded kernel.
inline CVector apply_kernel(const GreenKernel& g, const CVector& psi, int t, int tp) {
  if (psi.size() != g.slice_dim()) throw DimensionMismatch("slice state does not match the kernel");
  return g.block(tp, t) * (g.weight(t) * psi);
}

/// Block-diagonal repetition of a k x k matrix over the nx sites of a slice.
inline CMatrix site_blockdiag(const CMatrix& m, int nx) {
  const Eigen::Index k = m.rows();
  CMatrix out = CMatrix::Zero(k * nx, k * nx);
  for (int x = 0; x < nx; ++x) out.block(k * x, k * x, k, k) = m;
  return out;
}

// ---------------------------------------------------------------------------
// Memory budget and materialization
// ---------------------------------------------------------------------------

inline constexpr const char* budget_env_var = "RELBUNDLE_KERNEL_BUDGET_MB";
inline constexpr double default_budget_mb = 64.0;

/// Budget in bytes for materialized spacetime kernels; the environment
/// variable RELBUNDLE_KERNEL_BUDGET_MB overrides the 64 MB default.
inline std::size_t kernel_budget_bytes() {
  double mb = default_budget_mb;
  if (const char* env = std::getenv(budget_env_var)) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end == env || !(v > 0.0)) throw ConfigError(std::string("invalid ") + budget_env_var + ": " + env);
    mb = v;
  }
  return static_cast<std::size_t>(mb * 1024.0 * 1024.0);
}

inline std::size_t materialized_bytes(const Lattice& lat, int k) {
  const std::size_t n = static_cast<std::size_t>(k) * lat.nt * lat.nx;
  return n * n * sizeof(cplx);
}

/// Full spacetime kernel, rows (t', x', a) and columns (t, x, b) in
/// slice-major order.
inline CMatrix materialize(const GreenKernel& g, std::size_t budget = kernel_budget_bytes()) {
  const Lattice& lat = g.lattice();
  const std::size_t need = materialized_bytes(lat, g.components());
  if (need > budget)
    throw BudgetExceeded("spacetime kernel needs " + std::to_string(need) + " bytes, budget is " +
                         std::to_string(budget));
  const Eigen::Index d = g.slice_dim();
  CMatrix full = CMatrix::Zero(d * lat.nt, d * lat.nt);
  for (int t = 0; t < lat.nt; ++t) {
    const auto col = g.column(t);
    for (int tp = t; tp < lat.nt; ++tp) full.block(d * tp, d * t, d, d) = col[static_cast<std::size_t>(tp - t)];
    if (!g.retarded())
      for (int tp = 0; tp < t; ++tp) full.block(d * tp, d * t, d, d) = g.block(tp, t);
  }
  return full;
}

class DenseSource final : public BlockSource {
 public:
  DenseSource(CMatrix full, Eigen::Index slice_dim) : full_(std::move(full)), d_(slice_dim) {}
  [[nodiscard]] CMatrix block(int tp, int t) const override { return full_.block(d_ * tp, d_ * t, d_, d_); }
  [[nodiscard]] const CMatrix& full() const { return full_; }

 private:
  CMatrix full_;
  Eigen::Index d_;
};

// ---------------------------------------------------------------------------
// Schroedinger-type kernels
// ---------------------------------------------------------------------------

/// Slice Hamiltonian -hbar^2/(2m) d_x^2 + V(x) with the periodic three-point Laplacian.
inline CMatrix schrodinger_hamiltonian(const Lattice& lat, double m, double hbar, const std::vector<double>& v = {}) {
  if (m <= 0.0) throw DegenerateMass("Schroedinger mass must be positive");
  if (!v.empty() && static_cast<int>(v.size()) != lat.nx) throw DimensionMismatch("potential must have nx entries");
  const double a = hbar * hbar / (2.0 * m * lat.dx * lat.dx);
  CMatrix h = CMatrix::Zero(lat.nx, lat.nx);
  for (int x = 0; x < lat.nx; ++x) {
    h(x, x) += 2.0 * a + (v.empty() ? 0.0 : v[static_cast<std::size_t>(x)]);
    h(x, lat.wrap_x(x + 1)) -= a;
    h(x, lat.wrap_x(x - 1)) -= a;
  }
  return h;
}

/// Eigenpairs of a Hermitian slice Hamiltonian; eigenvectors are scaled so
/// that sum_x psi_a^* psi_b dx = delta_ab.
struct SpectralBasis {
  Eigen::VectorXd energies;
  CMatrix states;  ///< column a is psi_a
  double dx = 1.0;

  static SpectralBasis from(const CMatrix& h, double dx) {
    waveeq::require_hermitian(h, "slice Hamiltonian");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    return {es.eigenvalues(), es.eigenvectors() / std::sqrt(dx), dx};
  }
  [[nodiscard]] double orthonormality_error() const {
    const CMatrix gram = states.adjoint() * states * dx;
    return (gram - CMatrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
  }
  /// max |sum_a psi_a(x') psi_a^*(x) dx - delta_{x'x}|.
  [[nodiscard]] double completeness_error() const {
    const CMatrix sum = states * states.adjoint() * dx;
    return (sum - CMatrix::Identity(sum.rows(), sum.cols())).cwiseAbs().maxCoeff();
  }
};

/// How the step function is evaluated: retarded theta with theta(0) = 1, or
/// the symmetric theta(tau) - 1/2 (half retarded, half advanced, 1/2 at coincidence).
enum class Coincidence { retarded, symmetric };

class SpectralSource final : public BlockSource {
 public:
  SpectralSource(SpectralBasis basis, double dt, double hbar, Coincidence conv)
      : b_(std::move(basis)), dt_(dt), hbar_(hbar), conv_(conv) {}
  [[nodiscard]] CMatrix block(int tp, int t) const override {
    const double tau = (tp - t) * dt_;
    double theta = tp >= t ? 1.0 : 0.0;
    if (conv_ == Coincidence::symmetric) theta -= 0.5;
    if (theta == 0.0) return CMatrix::Zero(b_.states.rows(), b_.states.rows());
    const CVector phase = (b_.energies.cast<cplx>() * (-I_unit * tau / hbar_)).array().exp();
    return (theta / (I_unit * hbar_)) * (b_.states * phase.asDiagonal() * b_.states.adjoint());
  }

 private:
  SpectralBasis b_;
  double dt_, hbar_;
  Coincidence conv_;
};

/// g(x', x) = (1/i hbar) theta(t' - t) sum_a psi_a(x') psi_a^*(x) exp(-i E_a (t' - t)/hbar).
inline GreenKernel schrodinger_green(const CMatrix& h, const Lattice& lat, double hbar,
                                     Coincidence conv = Coincidence::retarded) {
  if (h.rows() != lat.nx || h.cols() != lat.nx) throw DimensionMismatch("slice Hamiltonian must be nx x nx");
  auto src = std::make_shared<SpectralSource>(SpectralBasis::from(h, lat.dx), lat.dt, hbar, conv);
  const int nx = lat.nx;
  const double dx = lat.dx;
  return GreenKernel(
      lat, 1, Family::schrodinger, std::move(src),
      [nx, dx, hbar](int) -> CMatrix { return CMatrix::Identity(nx, nx) * (I_unit * hbar * dx); },
      conv == Coincidence::retarded, hbar);
}

// ---------------------------------------------------------------------------
// Dirac kernels
// ---------------------------------------------------------------------------

class DiracSource final : public BlockSource {
 public:
  DiracSource(waveeq::CrankNicolsonPropagator prop, CMatrix g0_over_ihdx)
      : prop_(std::move(prop)), right_(std::move(g0_over_ihdx)) {}
  [[nodiscard]] CMatrix block(int tp, int t) const override { return prop_.evolution(tp, t) * right_; }
  [[nodiscard]] std::vector<CMatrix> column(int t, int nt) const override {
    auto us = prop_.evolutions_from(t, nt - 1);
    for (auto& u : us) u = u * right_;
    return us;
  }

 private:
  waveeq::CrankNicolsonPropagator prop_;
  CMatrix right_;
};

/// block(t', t) = U(t', t) (gamma^0)^{-1} / (i hbar dx) with the CN evolution U.
inline GreenKernel dirac_green(const clifford::GammaSet& gamma, const PotentialField& pot, double m) {
  const Lattice& lat = pot.lattice();
  const double hbar = pot.hbar;
  const CMatrix g0 = site_blockdiag(gamma[0], lat.nx);
  // gamma^0 is its own inverse
  auto src = std::make_shared<DiracSource>(waveeq::dirac_propagator(gamma, pot, m), g0 / (I_unit * hbar * lat.dx));
  const double dx = lat.dx;
  return GreenKernel(
      lat, 4, Family::dirac, std::move(src), [g0, hbar, dx](int) -> CMatrix { return g0 * (I_unit * hbar * dx); }, true,
      hbar);
}

// ---------------------------------------------------------------------------
// Born series
// ---------------------------------------------------------------------------

struct BornResult {
  GreenKernel kernel;
  std::vector<double> residuals;  ///< relative fixed-point residual of each iterate g^(0..n)
  std::vector<double> updates;    ///< ||g^(j+1) - g^(j)|| / ||g0||
  bool divergence_warning = false;
  int iterations = 0;
};

/// Block-diagonal V = c dt dx (e/c) Aslash(y) over all spacetime sites.
inline CMatrix born_interaction(const clifford::GammaSet& gamma, const PotentialField& pot) {
  const Lattice& lat = pot.lattice();
  const Eigen::Index n = 4 * static_cast<Eigen::Index>(lat.nt) * lat.nx;
  CMatrix v = CMatrix::Zero(n, n);
  const double w = lat.dt * lat.dx * pot.e;  // c dt dx * e / c
  for (int t = 0; t < lat.nt; ++t)
    for (int x = 0; x < lat.nx; ++x) {
      std::array<cplx, 4> a{};
      for (std::size_t mu = 0; mu < 4; ++mu) a[mu] = pot.A[mu](t, x);
      const Eigen::Index o = 4 * (static_cast<Eigen::Index>(t) * lat.nx + x);
      v.block<4, 4>(o, o) = clifford::slash(gamma, a) * w;
    }
  return v;
}

namespace detail {

inline BornResult born_run(const GreenKernel& g0, const clifford::GammaSet& gamma, const PotentialField& pot,
                           int max_iterations, double tolerance, std::size_t budget) {
  if (g0.family() != Family::dirac || g0.components() != 4) throw ConfigError("Born series needs a Dirac kernel");
  require_same_lattice(g0.lattice(), pot.lattice(), "born_iterate");
  if (max_iterations < 0) throw ConfigError("iteration count must be non-negative");
  // G0, K = G0 V and the iterate live at the same time.
  if (materialized_bytes(g0.lattice(), 4) > budget / 3)
    throw BudgetExceeded("Born series needs three spacetime kernels of " +
                         std::to_string(materialized_bytes(g0.lattice(), 4)) + " bytes, budget is " +
                         std::to_string(budget));
  const CMatrix full0 = materialize(g0, budget);
  const CMatrix k = full0 * born_interaction(gamma, pot);
  const double norm0 = std::max(full0.norm(), std::numeric_limits<double>::min());

  BornResult res{g0, {}, {}, false, 0};
  CMatrix g = full0;
  CMatrix next = full0 + k * g;
  for (int j = 0;; ++j) {
    const double upd = (next - g).norm() / norm0;
    res.residuals.push_back(upd);  // residual of g^(j) equals the next update
    if (j == max_iterations || (tolerance > 0.0 && upd < tolerance)) break;
    if (!res.updates.empty() && upd > res.updates.back()) res.divergence_warning = true;
    res.updates.push_back(upd);
    g = std::move(next);
    next = full0 + k * g;
    res.iterations = j + 1;
  }
  const Eigen::Index d = g0.slice_dim();
  res.kernel = GreenKernel(g0.lattice(), 4, Family::dirac, std::make_shared<DenseSource>(std::move(g), d),
                           g0.weight_fn(), true, g0.hbar());
  return res;
}

}  // namespace detail

/// g^(n) from g^(j+1) = g0 + g0 * (e/c) Aslash * g^(j), g^(0) = g0.
inline BornResult born_iterate(const GreenKernel& g0, const clifford::GammaSet& gamma, const PotentialField& pot,
                               int iterations, std::size_t budget = kernel_budget_bytes()) {
  return detail::born_run(g0, gamma, pot, iterations, 0.0, budget);
}

/// Iterates until the relative update drops below `tolerance`.
inline BornResult born_solve(const GreenKernel& g0, const clifford::GammaSet& gamma, const PotentialField& pot,
                             double tolerance = 1e-10, int max_iterations = 200,
                             std::size_t budget = kernel_budget_bytes()) {
  return detail::born_run(g0, gamma, pot, max_iterations, tolerance, budget);
}

/// ||g - (g0 + g0 * V * g)|| / ||g0|| for an arbitrary Dirac kernel g.
inline double born_fixed_point_residual(const GreenKernel& g, const GreenKernel& g0, const clifford::GammaSet& gamma,
                                        const PotentialField& pot, std::size_t budget = kernel_budget_bytes()) {
  const CMatrix full0 = materialize(g0, budget);
  const CMatrix full = materialize(g, budget);
  const CMatrix r = full - full0 - full0 * (born_interaction(gamma, pot) * full);
  return r.norm() / full0.norm();
}

// ---------------------------------------------------------------------------
// Klein-Gordon kernels
// ---------------------------------------------------------------------------

/// Scalar retarded kernel: for fixed source slice t, g(., t) solves the
/// homogeneous equation for t' > t with g(t, t) = 0 and d_0 g(t, t) = delta/dx.
class KgScalarSource final : public BlockSource {
 public:
  KgScalarSource(PotentialField pot, double m) : pot_(std::move(pot)), m_(m) {}
  [[nodiscard]] CMatrix block(int tp, int t) const override {
    if (tp <= t) return zero();
    return column(t, tp + 1).back();
  }
  [[nodiscard]] std::vector<CMatrix> column(int t, int nt) const override {
    const Lattice& lat = pot_.lattice();
    std::vector<CMatrix> out{zero()};
    if (t + 1 >= nt) return out;
    const CMatrix chi = CMatrix::Identity(lat.nx, lat.nx) / lat.dx;
    out.push_back(waveeq::kg_leapfrog_start(zero(), chi, pot_, m_, t));
    for (int n = t + 1; n + 1 < nt; ++n)
      out.push_back(waveeq::kg_leapfrog_next(out[out.size() - 2], out.back(), pot_, m_, n));
    return out;
  }

 private:
  [[nodiscard]] CMatrix zero() const { return CMatrix::Zero(pot_.lattice().nx, pot_.lattice().nx); }
  PotentialField pot_;
  double m_;
};

inline GreenKernel kg_scalar_green(const PotentialField& pot, double m) {
  return GreenKernel(pot.lattice(), 1, Family::kg_scalar, std::make_shared<KgScalarSource>(pot, m), nullptr, true,
                     pot.hbar);
}

/// phi(t') = sum_x [ g (chi + 2 i kappa A_0 phi) - (d g / d x^0_source) phi ] dx,
/// with chi = d_0 phi at the source slice t and a centered source-time
/// difference. Needs 1 <= t < t' < nt.
inline CVector kg_reconstruct(const GreenKernel& g, const CVector& phi, const CVector& dphi, const PotentialField& pot,
                              int t, int tp) {
  const Lattice& lat = g.lattice();
  if (g.family() != Family::kg_scalar) throw ConfigError("kg_reconstruct needs a scalar Klein-Gordon kernel");
  require_same_lattice(lat, pot.lattice(), "kg_reconstruct");
  if (phi.size() != lat.nx || dphi.size() != lat.nx) throw DimensionMismatch("Klein-Gordon slice must have nx entries");
  if (t < 1 || tp <= t || tp >= lat.nt) throw IndexOutOfRange("kg_reconstruct needs 1 <= t < t' < nt");
  const double h = lat.step(0);
  const CMatrix gs = g.block(tp, t);
  const CMatrix dgs = (g.block(tp, t + 1) - g.block(tp, t - 1)) / (2.0 * h);
  CVector src = dphi;
  for (int x = 0; x < lat.nx; ++x) src(x) += 2.0 * I_unit * pot.kappa() * pot.A[0](t, x).real() * phi(x);
  return (gs * src - dgs * phi) * lat.dx;
}

/// The pair (G11, G12) acting on (phi, chi) in kg_reconstruct, per source slice:
/// G11 = -d_s g + 2 i kappa A_0 g, G12 = g.
inline std::pair<CMatrix, CMatrix> kg_reconstruction_rows(const GreenKernel& g, const PotentialField& pot, int t,
                                                          int tp) {
  const Lattice& lat = g.lattice();
  if (t < 1 || tp <= t || tp >= lat.nt) throw IndexOutOfRange("reconstruction rows need 1 <= t < t' < nt");
  const double h = lat.step(0);
  const CMatrix gs = g.block(tp, t);
  CMatrix g11 = -(g.block(tp, t + 1) - g.block(tp, t - 1)) / (2.0 * h);
  for (int x = 0; x < lat.nx; ++x) g11.col(x) += (2.0 * I_unit * pot.kappa() * pot.A[0](t, x).real()) * gs.col(x);
  return {g11, gs};
}

class KgTwoComponentSource final : public BlockSource {
 public:
  KgTwoComponentSource(waveeq::KleinGordonTwoComponent sys, double dx) : sys_(std::move(sys)), dx_(dx) {}
  [[nodiscard]] CMatrix block(int tp, int t) const override { return column(t, tp + 1).back(); }
  [[nodiscard]] std::vector<CMatrix> column(int t, int nt) const override {
    auto us = sys_.evolutions_from(t, nt - 1);
    for (auto& u : us) u /= dx_;
    return us;
  }

 private:
  waveeq::KleinGordonTwoComponent sys_;
  double dx_;
};

/// Kernel of the two-component evolution: block = U~(t', t) / dx, weight dx.
inline GreenKernel kg_green_tilde(const PotentialField& pot, double m) {
  const Lattice& lat = pot.lattice();
  const int nx = lat.nx;
  const double dx = lat.dx;
  return GreenKernel(
      lat, 2, Family::kg_two_component,
      std::make_shared<KgTwoComponentSource>(waveeq::KleinGordonTwoComponent(pot, m), dx),
      [nx, dx](int) -> CMatrix { return CMatrix::Identity(2 * nx, 2 * nx) * dx; }, true, pot.hbar);
}

/// (phi-row, phi-column) and (phi-row, chi-column) sub-blocks of a
/// two-component block, each nx x nx.
inline std::pair<CMatrix, CMatrix> first_row_blocks(const CMatrix& block) {
  const Eigen::Index nx = block.rows() / 2;
  CMatrix a(nx, nx), b(nx, nx);
  for (Eigen::Index i = 0; i < nx; ++i)
    for (Eigen::Index j = 0; j < nx; ++j) {
      a(i, j) = block(2 * i, 2 * j);
      b(i, j) = block(2 * i, 2 * j + 1);
    }
  return {a, b};
}

// ---------------------------------------------------------------------------
// Composition and Green morphisms
// ---------------------------------------------------------------------------

class ComposedSource final : public BlockSource {
 public:
  ComposedSource(GreenKernel outer, GreenKernel inner, int tm)
      : outer_(std::move(outer)), inner_(std::move(inner)), tm_(tm) {}
  [[nodiscard]] CMatrix block(int tp, int t) const override {
    if (t > tm_ || tp < tm_) return CMatrix::Zero(inner_.slice_dim(), inner_.slice_dim());
    return outer_.block(tp, tm_) * outer_.weight(tm_) * inner_.block(tm_, t);
  }

 private:
  GreenKernel outer_, inner_;
  int tm_;
};

/// Two-leg kernel through the intermediate slice tm: nonzero only for t <= tm <= t'.
inline GreenKernel compose(const GreenKernel& outer, const GreenKernel& inner, int tm) {
  require_same_lattice(outer.lattice(), inner.lattice(), "compose");
  if (outer.components() != inner.components()) throw DimensionMismatch("composed kernels must share components");
  if (tm < 0 || tm >= inner.lattice().nt) throw IndexOutOfRange("intermediate slice out of range");
  return GreenKernel(inner.lattice(), inner.components(), inner.family(),
                     std::make_shared<ComposedSource>(outer, inner, tm), inner.weight_fn(), true, inner.hbar());
}

class MorphedSource final : public BlockSource {
 public:
  MorphedSource(GreenKernel g, transport::FrameField frame) : g_(std::move(g)), frame_(std::move(frame)) {}
  [[nodiscard]] CMatrix block(int tp, int t) const override {
    return frame_.slice_block_inverse(tp) * g_.block(tp, t) * frame_.slice_block(t);
  }
  [[nodiscard]] std::vector<CMatrix> column(int t, int nt) const override {
    auto col = g_.source()->column(t, nt);
    const CMatrix right = frame_.slice_block(t);
    for (std::size_t i = 0; i < col.size(); ++i)
      col[i] = frame_.slice_block_inverse(t + static_cast<int>(i)) * col[i] * right;
    return col;
  }

 private:
  GreenKernel g_;
  transport::FrameField frame_;
};

/// Bundle-picture kernel l^{-1}(x') g(x', x) l(x); the weight becomes
/// l^{-1}(x) W l(x), so block' W' Psi = l^{-1} (block W psi) for Psi = l^{-1} psi.
inline GreenKernel green_morphism(const GreenKernel& g, const transport::FrameField& frame) {
  require_same_lattice(g.lattice(), frame.lattice(), "green_morphism");
  if (frame.n() != g.components()) throw DimensionMismatch("frame rank must equal the kernel components");
  WeightFn w;
  if (g.has_weight())
    w = [inner = g.weight_fn(), frame](int t) -> CMatrix {
      return frame.slice_block_inverse(t) * inner(t) * frame.slice_block(t);
    };
  return GreenKernel(g.lattice(), g.components(), g.family(), std::make_shared<MorphedSource>(g, frame), std::move(w),
                     g.retarded(), g.hbar());
}

// ---------------------------------------------------------------------------
// Finite-window evolution
// ---------------------------------------------------------------------------

/// U(center + half, center - half); no infinite-window limit is taken.
inline CMatrix finite_window_evolution(const waveeq::CrankNicolsonPropagator& prop, int center, int half_width) {
  const Lattice& lat = prop.lattice();
  if (half_width < 0 || center - half_width < 0 || center + half_width >= lat.nt)
    throw IndexOutOfRange("window does not fit on the lattice");
  return prop.evolution(center + half_width, center - half_width);
}

inline CMatrix finite_window_evolution(const clifford::GammaSet& gamma, const PotentialField& pot, double m, int center,
                                       int half_width) {
  return finite_window_evolution(waveeq::dirac_propagator(gamma, pot, m), center, half_width);
}

}  // namespace relbundle::green

#endif  // RELBUNDLE_GREEN_HPP
