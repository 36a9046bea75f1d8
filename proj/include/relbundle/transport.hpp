#ifndef RELBUNDLE_TRANSPORT_HPP
#define RELBUNDLE_TRANSPORT_HPP

// Bundle-picture data on the lattice: frame fields l_x, the transport
// L(y,x) = l_y^{-1} l_x along the identity map, its coefficients
// Gamma_mu = l^{-1} d_mu l, section derivations and bundle morphisms.

#include "relbundle/clifford.hpp"
#include "relbundle/matrixop.hpp"

#include <numbers>
#include <random>
#include <string_view>

namespace relbundle::transport {

using Section = VectorField;

/// Sitewise isomorphisms l_x from the fibre over x to the typical fibre.
class FrameField {
 public:
  explicit FrameField(MatrixField l, bool unitary = false,
                      double condition_bound = matrixop::default_condition_bound)
      : basis_(std::move(l), condition_bound), unitary_(unitary) {
    if (unitary_) {
      const int n = basis_.n();
      for (std::size_t i = 0; i < lattice().sites(); ++i) {
        const double dev = (basis_.matrix()[i].adjoint() * basis_.matrix()[i] - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
        if (dev > 1e-12) throw SingularFrame("frame flagged unitary but l^dagger l deviates from identity");
      }
    }
  }

  [[nodiscard]] const Lattice& lattice() const { return basis_.lattice(); }
  [[nodiscard]] int n() const { return basis_.n(); }
  [[nodiscard]] bool unitary() const { return unitary_; }
  [[nodiscard]] const matrixop::FrameMatrixField& basis() const { return basis_; }
  [[nodiscard]] const CMatrix& l(Site s) const { return basis_.matrix()(s); }
  [[nodiscard]] const CMatrix& l_inv(Site s) const { return basis_.inverse()(s); }
  [[nodiscard]] const CMatrix& l(int t, int x) const { return basis_.matrix()(t, x); }
  [[nodiscard]] const CMatrix& l_inv(int t, int x) const { return basis_.inverse()(t, x); }

  /// diag(l(t, 0), ..., l(t, nx-1)) on the slice space.
  [[nodiscard]] CMatrix slice_block(int t) const { return basis_.matrix().slice_block(t); }
  [[nodiscard]] CMatrix slice_block_inverse(int t) const { return basis_.inverse().slice_block(t); }

 private:
  matrixop::FrameMatrixField basis_;
  bool unitary_;
};

namespace detail {

/// Deterministic Hermitian generator used by the rotation and boost presets.
inline CMatrix preset_generator(int n) {
  if (n == 4) {
    const auto g = clifford::build_gamma_set();
    return g[0] * g[1];  // gamma^0 gamma^1 (Hermitian, eigenvalues +-1)
  }
  CMatrix m(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (a == b) m(a, b) = a - 0.5 * (n - 1);
      else if (a < b) m(a, b) = cplx(0.5, 0.5) / double(1 + b - a);
      else m(a, b) = std::conj(cplx(0.5, 0.5) / double(1 + a - b));
    }
  return m / std::max(1.0, 0.5 * n);
}

/// exp(z M) for Hermitian M through one eigendecomposition.
class HermitianExp {
 public:
  explicit HermitianExp(const CMatrix& m) : es_(m) {}
  [[nodiscard]] CMatrix operator()(cplx z) const {
    CVector d = (z * es_.eigenvalues().cast<cplx>()).array().exp();
    return es_.eigenvectors() * d.asDiagonal() * es_.eigenvectors().adjoint();
  }

 private:
  Eigen::SelfAdjointEigenSolver<CMatrix> es_;
};

/// Smooth profile periodic over the lattice extents.
inline double profile(const Lattice& lat, double t, double x) {
  const double two_pi = 2.0 * std::numbers::pi;
  return std::sin(two_pi * x / lat.length_x()) + 0.5 * std::cos(two_pi * t / lat.length_t() + 0.3);
}

}  // namespace detail

/// Frame presets by name: "identity", "phase(k)", "rotation(k)", "boost(r)",
/// "random-smooth(seed)". All are smooth and periodic over the lattice.
inline FrameField make_frame_preset(std::string_view spec, const Lattice& lat, int n) {
  std::string name(spec);
  double param = 0.0;
  bool has_param = false;
  if (auto open = name.find('('); open != std::string::npos) {
    const auto close = name.find(')', open);
    if (close == std::string::npos || close != name.size() - 1) throw ConfigError("unknown preset: " + std::string(spec));
    const std::string arg = name.substr(open + 1, close - open - 1);
    try {
      std::size_t used = 0;
      param = std::stod(arg, &used);
      if (used != arg.size()) throw ConfigError("unknown preset: " + std::string(spec));
    } catch (const std::logic_error&) {
      throw ConfigError("unknown preset: " + std::string(spec));
    }
    has_param = true;
    name = name.substr(0, open);
  }
  const CMatrix id = CMatrix::Identity(n, n);
  if (name == "identity" && !has_param) return FrameField(MatrixField::constant(lat, id), true);
  if (!has_param) throw ConfigError("unknown preset: " + std::string(spec));
  if (name == "phase") {
    return FrameField(MatrixField::sample(lat, n, [&](double t, double x) -> CMatrix {
                        return id * std::exp(I_unit * param * detail::profile(lat, t, x));
                      }),
                      true);
  }
  if (name == "rotation" || name == "boost") {
    const detail::HermitianExp exp_m(detail::preset_generator(n));
    const bool rot = name == "rotation";
    return FrameField(MatrixField::sample(lat, n, [&](double t, double x) -> CMatrix {
                        const double th = param * detail::profile(lat, t, x);
                        return exp_m(rot ? I_unit * th : cplx(th, 0.0));
                      }),
                      rot);
  }
  if (name == "random-smooth") {
    std::mt19937_64 rng(static_cast<std::uint64_t>(param));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    constexpr int modes = 3;
    std::vector<CMatrix> r(modes, CMatrix(n, n));
    std::vector<std::array<double, 4>> ph(modes);
    for (int j = 0; j < modes; ++j) {
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) r[static_cast<std::size_t>(j)](a, b) = cplx(u(rng), u(rng));
      r[static_cast<std::size_t>(j)] /= r[static_cast<std::size_t>(j)].norm();
      for (auto& p : ph[static_cast<std::size_t>(j)]) p = std::numbers::pi * u(rng);
    }
    CMatrix h = CMatrix::Zero(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) h(a, b) = cplx(u(rng), u(rng));
    const detail::HermitianExp exp_h(0.5 * (h + h.adjoint()));
    const double two_pi = 2.0 * std::numbers::pi;
    return FrameField(MatrixField::sample(lat, n, [&](double t, double x) -> CMatrix {
      CMatrix m = id;
      for (int j = 0; j < modes; ++j) {
        const auto& p = ph[static_cast<std::size_t>(j)];
        const double s = std::sin(two_pi * (j + 1) * x / lat.length_x() + p[0]) *
                         std::cos(two_pi * t / lat.length_t() + p[1]);
        m += 0.3 * s * r[static_cast<std::size_t>(j)];
      }
      return exp_h(I_unit * 0.7 * detail::profile(lat, t, x)) * m;
    }));
  }
  throw ConfigError("unknown preset: " + std::string(spec));
}

/// Transport along the identity map, factorized by the frame.
class Transport {
 public:
  explicit Transport(FrameField frame) : frame_(std::move(frame)) {}

  [[nodiscard]] const FrameField& frame() const { return frame_; }
  [[nodiscard]] CMatrix operator()(Site y, Site x) const {
    if (y == x) return CMatrix::Identity(frame_.n(), frame_.n());
    return frame_.l_inv(y) * frame_.l(x);
  }

  /// Flat transport along a lattice path: L(path[t], path[s]).
  [[nodiscard]] CMatrix along_path(const std::vector<Site>& path, std::size_t s, std::size_t t) const {
    return (*this)(path.at(t), path.at(s));
  }
  /// Ordered product of the single-hop transports along the path.
  [[nodiscard]] CMatrix path_product(const std::vector<Site>& path) const {
    CMatrix acc = CMatrix::Identity(frame_.n(), frame_.n());
    for (std::size_t i = 1; i < path.size(); ++i) acc = (*this)(path[i], path[i - 1]) * acc;
    return acc;
  }

 private:
  FrameField frame_;
};

inline Transport make_transport(FrameField frame) { return Transport(std::move(frame)); }

struct TransportCoefficients {
  std::array<MatrixField, 4> gamma;
  [[nodiscard]] const MatrixField& operator[](int mu) const {
    check_axis(mu);
    return gamma[static_cast<std::size_t>(mu)];
  }
};

/// Gamma_mu(x) = l^{-1}(x) d_mu l(x); shares the frame-connection code path.
inline TransportCoefficients coefficients(const FrameField& frame) {
  TransportCoefficients out;
  for (int mu = 0; mu < 4; ++mu) out.gamma[static_cast<std::size_t>(mu)] = matrixop::frame_connection(frame.basis(), mu);
  return out;
}

/// Gamma-slash(x) = gamma^mu Gamma_mu(x).
inline MatrixField slashed_gamma(const TransportCoefficients& coeffs, const clifford::GammaSet& gamma) {
  if (coeffs[0].n() != 4) throw DimensionMismatch("slashed_gamma needs 4x4 coefficients");
  const Lattice& lat = coeffs[0].lattice();
  MatrixField out(lat, 4);
  for (std::size_t i = 0; i < lat.sites(); ++i)
    for (int mu = 0; mu < 4; ++mu) out[i] += gamma[mu] * coeffs[mu][i];
  return out;
}

/// Psi(x) = l_x^{-1} psi0 for every site; psi0 is the state at x0.
inline Section transported_section(const FrameField& frame, const CVector& psi0, Site /*x0*/) {
  if (psi0.size() != frame.n()) throw DimensionMismatch("state vector size differs from frame dimension");
  const Lattice& lat = frame.lattice();
  Section out(lat, frame.n());
  for (int t = 0; t < lat.nt; ++t)
    for (int x = 0; x < lat.nx; ++x) out.set(t, x, frame.l_inv(t, x) * psi0);
  return out;
}

/// (D_mu sigma)(x) = d_mu sigma(x) + Gamma_mu(x) sigma(x).
inline Section derivation_along(const Section& section, const TransportCoefficients& coeffs, int mu) {
  check_axis(mu);
  if (section.n() != coeffs[mu].n()) throw DimensionMismatch("section and coefficient dimensions differ");
  require_same_lattice(section.lattice(), coeffs[mu].lattice(), "derivation_along");
  const Lattice& lat = section.lattice();
  Section out(lat, section.n());
  for (int a = 0; a < section.n(); ++a) out[a] = centered_difference(section[a], mu);
  for (int t = 0; t < lat.nt; ++t)
    for (int x = 0; x < lat.nx; ++x) out.set(t, x, out.at(t, x) + coeffs[mu](t, x) * section.at(t, x));
  return out;
}

/// A_x = l_x^{-1} A(x) l_x for a pointwise operator field.
inline MatrixField bundle_morphism(const FrameField& frame, const MatrixField& op) {
  if (op.n() != frame.n()) throw DimensionMismatch("morphism dimension differs from frame");
  require_same_lattice(op.lattice(), frame.lattice(), "bundle_morphism");
  MatrixField out(op.lattice(), op.n());
  for (std::size_t i = 0; i < frame.lattice().sites(); ++i)
    out[i] = frame.basis().inverse()[i] * op[i] * frame.basis().matrix()[i];
  return out;
}

inline MatrixField bundle_morphism(const FrameField& frame, const CMatrix& op) {
  return bundle_morphism(frame, MatrixField::constant(frame.lattice(), op));
}

/// Morphism of a matrix operator: l^{-1} (.) B (.) l.
inline matrixop::MatrixOperator bundle_morphism(const FrameField& frame, const matrixop::MatrixOperator& op) {
  return matrixop::matrix_of(op, frame.basis());
}

/// G^mu(x) = l_x^{-1} gamma^mu l_x.
inline std::array<MatrixField, 4> bundle_gammas(const FrameField& frame, const clifford::GammaSet& gamma) {
  return {bundle_morphism(frame, gamma[0]), bundle_morphism(frame, gamma[1]), bundle_morphism(frame, gamma[2]),
          bundle_morphism(frame, gamma[3])};
}

/// Conventional Diracian m c 1 + (e/c) A-slash at every site.
inline MatrixField diracian(const clifford::GammaSet& gamma, const PotentialField& pot, double m) {
  const Lattice& lat = pot.lattice();
  MatrixField out(lat, 4);
  for (std::size_t i = 0; i < lat.sites(); ++i) {
    CMatrix d = CMatrix::Identity(4, 4) * (m * lat.c);
    for (int mu = 0; mu < 4; ++mu) d += gamma[mu] * (pot.e / lat.c * pot.A[static_cast<std::size_t>(mu)][i]);
    out[i] = d;
  }
  return out;
}

/// Bundle Diracian l_y^{-1} (m c 1 + (e/c) A-slash) l_y.
inline MatrixField bundle_diracian(const FrameField& frame, const clifford::GammaSet& gamma, const PotentialField& pot,
                                   double m) {
  return bundle_morphism(frame, diracian(gamma, pot, m));
}

/// Backslashed bundle potential G^mu(y) A_mu(y).
inline MatrixField backslashed_potential(const FrameField& frame, const clifford::GammaSet& gamma,
                                         const PotentialField& pot) {
  const auto g = bundle_gammas(frame, gamma);
  const Lattice& lat = frame.lattice();
  MatrixField out(lat, 4);
  for (std::size_t i = 0; i < lat.sites(); ++i)
    for (int mu = 0; mu < 4; ++mu) out[i] += g[static_cast<std::size_t>(mu)][i] * pot.A[static_cast<std::size_t>(mu)][i];
  return out;
}

/// Bijections F_n (with the inverses actually used) defining K_{l->m} = F_m^{-1} F_l.
struct Factorization {
  std::vector<CMatrix> forward;
  std::vector<CMatrix> inverse;

  static Factorization from(std::vector<CMatrix> f) {
    Factorization out;
    out.inverse.reserve(f.size());
    for (const auto& m : f) {
      Eigen::FullPivLU<CMatrix> lu(m);
      if (!lu.isInvertible()) throw SingularFrame("factorization matrix is singular");
      out.inverse.push_back(lu.inverse());
    }
    out.forward = std::move(f);
    return out;
  }
  [[nodiscard]] CMatrix transport(std::size_t from, std::size_t to) const { return inverse.at(to) * forward.at(from); }
};

struct TransportAxiomReport {
  double composition = 0.0;  ///< max |K_{m->n} K_{l->m} - K_{l->n}|
  double identity = 0.0;     ///< max |K_{l->l} - 1|
  double linearity = 0.0;    ///< max |K(a u + b v) - a K u - b K v|
  [[nodiscard]] double max() const { return std::max({composition, identity, linearity}); }
};

/// Samples the transport axioms for K_{l->m} = F_m^{-1} F_l.
inline TransportAxiomReport generic_transport_check(const Factorization& f, int samples = 100,
                                                    std::uint64_t seed = 12345) {
  if (f.forward.size() != f.inverse.size() || f.forward.empty())
    throw DimensionMismatch("factorization needs matching, non-empty forward/inverse lists");
  const int n = static_cast<int>(f.forward.front().rows());
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, f.forward.size() - 1);
  std::normal_distribution<double> g;
  auto rvec = [&] {
    CVector v(n);
    for (int i = 0; i < n; ++i) v(i) = cplx(g(rng), g(rng));
    return v;
  };
  TransportAxiomReport rep;
  // every point serves as the intermediate point at least once
  const std::size_t total = static_cast<std::size_t>(samples) + f.forward.size();
  for (std::size_t s = 0; s < total; ++s) {
    const std::size_t l = pick(rng), k = pick(rng);
    const std::size_t m = s < f.forward.size() ? s : pick(rng);
    const CMatrix klm = f.transport(l, m);
    const CMatrix kmk = f.transport(m, k);
    const CMatrix klk = f.transport(l, k);
    const double scale = std::max(1.0, klk.cwiseAbs().maxCoeff());
    rep.composition = std::max(rep.composition, (kmk * klm - klk).cwiseAbs().maxCoeff() / scale);
    rep.identity = std::max(rep.identity, (f.transport(l, l) - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff());
    const CVector u = rvec(), v = rvec();
    const cplx a(g(rng), g(rng)), b(g(rng), g(rng));
    const CVector lhs = klm * (a * u + b * v);
    const CVector rhs = a * (klm * u) + b * (klm * v);
    rep.linearity = std::max(rep.linearity, (lhs - rhs).cwiseAbs().maxCoeff() / std::max(1.0, lhs.cwiseAbs().maxCoeff()));
  }
  return rep;
}

}  // namespace relbundle::transport

#endif  // RELBUNDLE_TRANSPORT_HPP
