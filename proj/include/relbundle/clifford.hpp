#ifndef RELBUNDLE_CLIFFORD_HPP
#define RELBUNDLE_CLIFFORD_HPP

#include "relbundle/lattice.hpp"

#include <array>

namespace relbundle::clifford {

/// Minkowski metric diag(+1, -1, -1, -1); upper and lower forms coincide.
struct Metric {
  std::array<int, 4> signature{1, -1, -1, -1};
  [[nodiscard]] int operator()(int mu, int nu) const { return mu == nu ? signature[static_cast<std::size_t>(mu)] : 0; }
};

inline void check_index(int mu) {
  if (mu < 0 || mu > 3) throw IndexOutOfRange("gamma index must be in 0..3");
}

/// Dirac gamma matrices in the standard (Dirac) representation:
///   gamma^0 = diag(1, 1, -1, -1),  gamma^k = [[0, sigma_k], [-sigma_k, 0]].
struct GammaSet {
  std::array<Eigen::Matrix4cd, 4> gamma;
  Metric metric;

  [[nodiscard]] const Eigen::Matrix4cd& operator[](int mu) const {
    check_index(mu);
    return gamma[static_cast<std::size_t>(mu)];
  }
  [[nodiscard]] int dim() const { return 4; }
};

/// 5x5 Klein-Gordon matrices: (G^mu)(mu,4) = 1, (G^mu)(4,mu) = eta_{mu mu}.
struct Gamma5Set {
  std::array<Eigen::Matrix<double, 5, 5>, 4> gamma5;
  Metric metric;

  [[nodiscard]] const Eigen::Matrix<double, 5, 5>& operator[](int mu) const {
    check_index(mu);
    return gamma5[static_cast<std::size_t>(mu)];
  }
  [[nodiscard]] int dim() const { return 5; }
};

inline GammaSet build_gamma_set() {
  using M2 = Eigen::Matrix2cd;
  const std::array<M2, 3> sigma = {
      (M2() << 0, 1, 1, 0).finished(),
      (M2() << 0, -I_unit, I_unit, 0).finished(),
      (M2() << 1, 0, 0, -1).finished(),
  };
  GammaSet g;
  g.gamma[0] = Eigen::Matrix4cd::Zero();
  g.gamma[0].diagonal() << 1, 1, -1, -1;
  for (std::size_t k = 0; k < 3; ++k) {
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    m.block<2, 2>(0, 2) = sigma[k];
    m.block<2, 2>(2, 0) = -sigma[k];
    g.gamma[k + 1] = m;
  }
  return g;
}

inline Gamma5Set build_gamma5_set() {
  Gamma5Set g;
  for (int mu = 0; mu < 4; ++mu) {
    Eigen::Matrix<double, 5, 5> m = Eigen::Matrix<double, 5, 5>::Zero();
    m(mu, 4) = 1.0;
    m(4, mu) = g.metric(mu, mu);
    g.gamma5[static_cast<std::size_t>(mu)] = m;
  }
  return g;
}

inline CMatrix anticommutator(const GammaSet& set, int mu, int nu) {
  const auto& a = set[mu];
  const auto& b = set[nu];
  return a * b + b * a;
}

inline CMatrix anticommutator(const Gamma5Set& set, int mu, int nu) {
  const auto& a = set[mu];
  const auto& b = set[nu];
  return (a * b + b * a).cast<cplx>();
}

/// a-slash = gamma^mu a_mu for lower-index coefficients a_mu.
inline Eigen::Matrix4cd slash(const GammaSet& set, const std::array<cplx, 4>& a) {
  Eigen::Matrix4cd out = Eigen::Matrix4cd::Zero();
  for (int mu = 0; mu < 4; ++mu) out += set[mu] * a[static_cast<std::size_t>(mu)];
  return out;
}

/// Generic matrix of the set as a dynamic complex matrix (n = 4 or 5).
inline CMatrix matrix(const GammaSet& set, int mu) { return set[mu]; }
inline CMatrix matrix(const Gamma5Set& set, int mu) { return set[mu].cast<cplx>(); }

}  // namespace relbundle::clifford

#endif  // RELBUNDLE_CLIFFORD_HPP
