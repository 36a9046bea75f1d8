#ifndef RELBUNDLE_POTENTIAL_HPP
#define RELBUNDLE_POTENTIAL_HPP

#include "relbundle/lattice.hpp"

#include <array>

namespace relbundle {

/// External electromagnetic 4-potential with lower indices A_mu, plus the
/// particle charge and hbar. c is taken from the lattice. In 1+1-D runs
/// A_2 = A_3 = 0.
struct PotentialField {
  std::array<ScalarField, 4> A;
  double e = 0.0;
  double hbar = 1.0;

  PotentialField() = default;
  explicit PotentialField(const Lattice& lat, double charge = 0.0, double hbar_ = 1.0)
      : A{ScalarField(lat), ScalarField(lat), ScalarField(lat), ScalarField(lat)}, e(charge), hbar(hbar_) {}

  [[nodiscard]] const Lattice& lattice() const { return A[0].lattice(); }
  /// Minimal-coupling constant kappa = e / (hbar c), so D_mu = d_mu + i kappa A_mu.
  [[nodiscard]] double kappa() const { return e / (hbar * lattice().c); }

  [[nodiscard]] bool is_real() const {
    for (const auto& f : A)
      for (const auto& z : f.data())
        if (z.imag() != 0.0) return false;
    return true;
  }
  /// True when every A_mu slice equals slice 0.
  [[nodiscard]] bool is_static() const {
    const Lattice& lat = lattice();
    for (const auto& f : A)
      for (int t = 1; t < lat.nt; ++t)
        for (int x = 0; x < lat.nx; ++x)
          if (f(t, x) != f(0, x)) return false;
    return true;
  }
  [[nodiscard]] bool is_zero() const {
    for (const auto& f : A)
      if (f.max_abs() != 0.0) return false;
    return true;
  }
  /// A_mu at fractional time index s (linear interpolation between slices).
  [[nodiscard]] double at(int mu, double s, int x) const {
    const int t0 = static_cast<int>(std::floor(s));
    const double w = s - t0;
    const auto& f = A[static_cast<std::size_t>(mu)];
    if (w == 0.0) return f(t0, x).real();
    return (1.0 - w) * f(t0, x).real() + w * f(t0 + 1, x).real();
  }
  /// Time derivative d_0 A_mu at slice t (x^0 units); centered inside the
  /// lattice, second-order one-sided at the first and last slice.
  [[nodiscard]] double d0(int mu, int t, int x) const {
    const Lattice& lat = lattice();
    const auto& f = A[static_cast<std::size_t>(mu)];
    const double h = lat.step(0);
    if (lat.nt < 3) return 0.0;
    if (t <= 0) return (-3.0 * f(0, x).real() + 4.0 * f(1, x).real() - f(2, x).real()) / (2.0 * h);
    if (t >= lat.nt - 1) {
      const int n = lat.nt - 1;
      return (3.0 * f(n, x).real() - 4.0 * f(n - 1, x).real() + f(n - 2, x).real()) / (2.0 * h);
    }
    return (f(t + 1, x).real() - f(t - 1, x).real()) / (2.0 * h);
  }
};

}  // namespace relbundle

#endif  // RELBUNDLE_POTENTIAL_HPP
