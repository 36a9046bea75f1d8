#ifndef RELBUNDLE_LATTICE_HPP
#define RELBUNDLE_LATTICE_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace relbundle {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr cplx I_unit{0.0, 1.0};

/// Base class for every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};
struct IndexOutOfRange : Error {
  using Error::Error;
};
struct SingularFrame : Error {
  using Error::Error;
};
struct DegenerateMass : Error {
  using Error::Error;
};
struct BudgetExceeded : Error {
  using Error::Error;
};
struct NonHermitian : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

/// Point of the 1+1-D lattice: time index t, space index x.
struct Site {
  int t = 0;
  int x = 0;
  friend bool operator==(const Site&, const Site&) = default;
};

/// Discretized spacetime, periodic in both index directions. The time
/// coordinate is x^0 = c*t, so derivatives along axis 0 use the step c*dt.
/// Axes 2 and 3 exist for the 4-vector bookkeeping only; nothing varies
/// along them.
struct Lattice {
  int nt = 2;
  int nx = 2;
  double dt = 1.0;
  double dx = 1.0;
  double c = 1.0;

  Lattice() = default;
  Lattice(int nt_, int nx_, double dt_, double dx_, double c_ = 1.0)
      : nt(nt_), nx(nx_), dt(dt_), dx(dx_), c(c_) {
    validate();
  }

  void validate() const {
    if (nt < 2 || nx < 2) throw ConfigError("lattice needs nt >= 2 and nx >= 2");
    if (!(dt > 0.0) || !(dx > 0.0) || !(c > 0.0))
      throw ConfigError("lattice steps and c must be positive");
  }

  [[nodiscard]] std::size_t sites() const { return static_cast<std::size_t>(nt) * nx; }
  [[nodiscard]] std::size_t index(int t, int x) const {
    return static_cast<std::size_t>(wrap_t(t)) * nx + wrap_x(x);
  }
  [[nodiscard]] std::size_t index(Site s) const { return index(s.t, s.x); }
  [[nodiscard]] int wrap_x(int x) const { return ((x % nx) + nx) % nx; }
  [[nodiscard]] int wrap_t(int t) const { return ((t % nt) + nt) % nt; }

  /// Grid step along axis mu in x^mu units; zero for the frozen axes 2, 3.
  [[nodiscard]] double step(int axis) const {
    switch (axis) {
      case 0: return c * dt;
      case 1: return dx;
      default: return 0.0;
    }
  }
  [[nodiscard]] double time(int t) const { return t * dt; }
  [[nodiscard]] double position(int x) const { return x * dx; }
  [[nodiscard]] double length_t() const { return nt * dt; }
  [[nodiscard]] double length_x() const { return nx * dx; }

  friend bool operator==(const Lattice&, const Lattice&) = default;
};

inline void require_same_lattice(const Lattice& a, const Lattice& b, const char* what) {
  if (!(a == b)) throw DimensionMismatch(std::string(what) + ": lattices differ");
}

inline void check_axis(int axis) {
  if (axis < 0 || axis > 3) throw IndexOutOfRange("axis index must be in 0..3");
}

/// One complex number per lattice site, stored time-major.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const Lattice& lat, cplx fill = 0.0) : lat_(lat), v_(lat.sites(), fill) {}

  template <class F>
  static ScalarField sample(const Lattice& lat, F&& f) {
    ScalarField out(lat);
    for (int t = 0; t < lat.nt; ++t)
      for (int x = 0; x < lat.nx; ++x) out(t, x) = f(lat.time(t), lat.position(x));
    return out;
  }

  [[nodiscard]] const Lattice& lattice() const { return lat_; }
  [[nodiscard]] std::size_t size() const { return v_.size(); }

  cplx& operator()(int t, int x) { return v_[lat_.index(t, x)]; }
  const cplx& operator()(int t, int x) const { return v_[lat_.index(t, x)]; }
  cplx& operator[](std::size_t i) { return v_[i]; }
  const cplx& operator[](std::size_t i) const { return v_[i]; }

  [[nodiscard]] const std::vector<cplx>& data() const { return v_; }

  ScalarField& operator+=(const ScalarField& o) {
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
  }
  ScalarField& operator-=(const ScalarField& o) {
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
    return *this;
  }
  ScalarField& operator*=(cplx a) {
    for (auto& z : v_) z *= a;
    return *this;
  }
  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(cplx a, ScalarField b) { return b *= a; }

  [[nodiscard]] double max_abs() const {
    double m = 0.0;
    for (const auto& z : v_) m = std::max(m, std::abs(z));
    return m;
  }

 private:
  Lattice lat_;
  std::vector<cplx> v_;
};

/// Centered difference along `axis` with periodic wrap; zero for axes 2, 3.
inline ScalarField centered_difference(const ScalarField& f, int axis) {
  check_axis(axis);
  const Lattice& lat = f.lattice();
  ScalarField out(lat);
  if (axis > 1) return out;
  const double inv = 1.0 / (2.0 * lat.step(axis));
  for (int t = 0; t < lat.nt; ++t)
    for (int x = 0; x < lat.nx; ++x) {
      out(t, x) = axis == 0 ? (f(t + 1, x) - f(t - 1, x)) * inv : (f(t, x + 1) - f(t, x - 1)) * inv;
    }
  return out;
}

/// n complex components per site, stored as n scalar fields.
class VectorField {
 public:
  VectorField() = default;
  VectorField(const Lattice& lat, int n) : comps_(static_cast<std::size_t>(n), ScalarField(lat)) {}
  explicit VectorField(std::vector<ScalarField> comps) : comps_(std::move(comps)) {
    for (const auto& c : comps_) require_same_lattice(c.lattice(), comps_.front().lattice(), "VectorField");
  }

  [[nodiscard]] int n() const { return static_cast<int>(comps_.size()); }
  [[nodiscard]] const Lattice& lattice() const { return comps_.front().lattice(); }
  ScalarField& operator[](int i) { return comps_[static_cast<std::size_t>(i)]; }
  const ScalarField& operator[](int i) const { return comps_[static_cast<std::size_t>(i)]; }

  [[nodiscard]] CVector at(int t, int x) const {
    CVector v(n());
    for (int i = 0; i < n(); ++i) v(i) = comps_[static_cast<std::size_t>(i)](t, x);
    return v;
  }
  void set(int t, int x, const CVector& v) {
    for (int i = 0; i < n(); ++i) comps_[static_cast<std::size_t>(i)](t, x) = v(i);
  }

  /// Slice at time index t as a site-major vector (index x*n + component).
  [[nodiscard]] CVector slice(int t) const {
    const int nx = lattice().nx;
    CVector v(static_cast<Eigen::Index>(nx) * n());
    for (int x = 0; x < nx; ++x)
      for (int i = 0; i < n(); ++i) v(x * n() + i) = (*this)[i](t, x);
    return v;
  }
  void set_slice(int t, const CVector& v) {
    const int nx = lattice().nx;
    if (v.size() != static_cast<Eigen::Index>(nx) * n()) throw DimensionMismatch("slice length");
    for (int x = 0; x < nx; ++x)
      for (int i = 0; i < n(); ++i) (*this)[i](t, x) = v(x * n() + i);
  }

  VectorField& operator+=(const VectorField& o) {
    if (o.n() != n()) throw DimensionMismatch("VectorField components");
    for (int i = 0; i < n(); ++i) (*this)[i] += o[i];
    return *this;
  }
  VectorField& operator-=(const VectorField& o) {
    if (o.n() != n()) throw DimensionMismatch("VectorField components");
    for (int i = 0; i < n(); ++i) (*this)[i] -= o[i];
    return *this;
  }
  VectorField& operator*=(cplx a) {
    for (auto& c : comps_) c *= a;
    return *this;
  }
  friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
  friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
  friend VectorField operator*(cplx a, VectorField b) { return b *= a; }

  [[nodiscard]] double max_abs() const {
    double m = 0.0;
    for (const auto& c : comps_) m = std::max(m, c.max_abs());
    return m;
  }
  /// Max over sites with t in [t_begin, t_end).
  [[nodiscard]] double max_abs(int t_begin, int t_end) const {
    double m = 0.0;
    for (const auto& c : comps_)
      for (int t = t_begin; t < t_end; ++t)
        for (int x = 0; x < lattice().nx; ++x) m = std::max(m, std::abs(c(t, x)));
    return m;
  }

 private:
  std::vector<ScalarField> comps_;
};

/// One n x n complex matrix per lattice site.
class MatrixField {
 public:
  MatrixField() = default;
  MatrixField(const Lattice& lat, int n) : lat_(lat), n_(n), m_(lat.sites(), CMatrix::Zero(n, n)) {}

  template <class F>
  static MatrixField sample(const Lattice& lat, int n, F&& f) {
    MatrixField out(lat, n);
    for (int t = 0; t < lat.nt; ++t)
      for (int x = 0; x < lat.nx; ++x) out(t, x) = f(lat.time(t), lat.position(x));
    return out;
  }
  static MatrixField constant(const Lattice& lat, const CMatrix& m) {
    MatrixField out(lat, static_cast<int>(m.rows()));
    for (auto& s : out.m_) s = m;
    return out;
  }

  [[nodiscard]] const Lattice& lattice() const { return lat_; }
  [[nodiscard]] int n() const { return n_; }
  CMatrix& operator()(int t, int x) { return m_[lat_.index(t, x)]; }
  const CMatrix& operator()(int t, int x) const { return m_[lat_.index(t, x)]; }
  CMatrix& operator()(Site s) { return m_[lat_.index(s)]; }
  const CMatrix& operator()(Site s) const { return m_[lat_.index(s)]; }
  CMatrix& operator[](std::size_t i) { return m_[i]; }
  const CMatrix& operator[](std::size_t i) const { return m_[i]; }

  /// Entry (r, c) as a scalar field.
  [[nodiscard]] ScalarField entry(int r, int c) const {
    ScalarField out(lat_);
    for (std::size_t i = 0; i < m_.size(); ++i) out[i] = m_[i](r, c);
    return out;
  }

  /// Block-diagonal slice operator diag(m(t,0), ..., m(t,nx-1)).
  [[nodiscard]] CMatrix slice_block(int t) const {
    CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(lat_.nx) * n_, static_cast<Eigen::Index>(lat_.nx) * n_);
    for (int x = 0; x < lat_.nx; ++x) out.block(x * n_, x * n_, n_, n_) = (*this)(t, x);
    return out;
  }

  [[nodiscard]] double max_abs() const {
    double m = 0.0;
    for (const auto& s : m_) m = std::max(m, s.cwiseAbs().maxCoeff());
    return m;
  }

 private:
  Lattice lat_;
  int n_ = 0;
  std::vector<CMatrix> m_;
};

/// Centered difference of a matrix field along `axis`.
inline MatrixField centered_difference(const MatrixField& f, int axis) {
  check_axis(axis);
  const Lattice& lat = f.lattice();
  MatrixField out(lat, f.n());
  if (axis > 1) return out;
  const double inv = 1.0 / (2.0 * lat.step(axis));
  for (int t = 0; t < lat.nt; ++t)
    for (int x = 0; x < lat.nx; ++x)
      out(t, x) = axis == 0 ? ((f(t + 1, x) - f(t - 1, x)) * inv).eval() : ((f(t, x + 1) - f(t, x - 1)) * inv).eval();
  return out;
}

/// Slice inner product with the lattice measure dx.
inline double slice_norm(const CVector& v, double dx) { return std::sqrt(v.squaredNorm() * dx); }

}  // namespace relbundle

#endif  // RELBUNDLE_LATTICE_HPP
