#ifndef RELBUNDLE_MATRIXOP_HPP
#define RELBUNDLE_MATRIXOP_HPP

// Matrices whose entries are linear operators on scalar lattice fields
// ("matrixors"), their odot product and their matrices relative to a
// site-dependent basis.
//
// Entries are kept in shift form, a sum of coefficient times lattice shift.
// Composition moves the inner coefficient through the outer shift, so terms
// with equal total shift merge and nested products stay small.

#include "relbundle/clifford.hpp"
#include "relbundle/lattice.hpp"
#include "relbundle/potential.hpp"

#include <map>
#include <memory>
#include <optional>

namespace relbundle::matrixop {

/// Linear operator on scalar fields in shift form:
///   (E f)(t, x) = sum_s c_s(t, x) f(t + s_t, x + s_x)
/// with each coefficient either a constant or a field.
class OperatorEntry {
 public:
  using Shift = std::pair<int, int>;

  struct Coefficient {
    cplx scale = 0.0;
    std::shared_ptr<const ScalarField> field;  // null means constant

    [[nodiscard]] cplx at(std::size_t i) const { return field ? scale * (*field)[i] : scale; }
  };

  OperatorEntry() = default;
  static OperatorEntry zero() { return {}; }
  static OperatorEntry scalar(cplx a) {
    OperatorEntry out;
    if (a != cplx(0.0)) out.terms_[{0, 0}] = {a, nullptr};
    return out;
  }
  static OperatorEntry multiply(ScalarField f, cplx scale = 1.0) {
    OperatorEntry out;
    out.terms_[{0, 0}] = {scale, std::make_shared<const ScalarField>(std::move(f))};
    return out;
  }
  /// scale times the centered difference along `axis` (zero for the frozen axes).
  static OperatorEntry derivative(const Lattice& lat, int axis, cplx scale = 1.0) {
    check_axis(axis);
    OperatorEntry out;
    if (axis > 1 || scale == cplx(0.0)) return out;
    const cplx w = scale / (2.0 * lat.step(axis));
    out.terms_[unit(axis, 1)] = {w, nullptr};
    out.terms_[unit(axis, -1)] = {-w, nullptr};
    return out;
  }

  [[nodiscard]] bool is_zero() const { return terms_.empty(); }
  [[nodiscard]] std::size_t term_count() const { return terms_.size(); }

  [[nodiscard]] ScalarField apply(const ScalarField& f) const {
    const Lattice& lat = f.lattice();
    ScalarField out(lat);
    for (const auto& [s, c] : terms_) {
      if (c.field) require_same_lattice(c.field->lattice(), lat, "operator coefficient");
      for (int t = 0; t < lat.nt; ++t)
        for (int x = 0; x < lat.nx; ++x) {
          const std::size_t i = lat.index(t, x);
          out[i] += c.at(i) * f(t + s.first, x + s.second);
        }
    }
    return out;
  }

  OperatorEntry& operator+=(const OperatorEntry& o) {
    for (const auto& [s, c] : o.terms_) add(s, c);
    return *this;
  }
  friend OperatorEntry operator+(OperatorEntry a, const OperatorEntry& b) { return a += b; }

  /// a o b:  c_s(x) (S^s b_r)(x) at shift s + r.
  friend OperatorEntry compose(const OperatorEntry& a, const OperatorEntry& b) {
    OperatorEntry out;
    for (const auto& [s, ca] : a.terms_)
      for (const auto& [r, cb] : b.terms_) {
        Coefficient c;
        c.scale = ca.scale * cb.scale;
        if (ca.field || cb.field) {
          const Lattice& lat = ca.field ? ca.field->lattice() : cb.field->lattice();
          ScalarField prod(lat, 1.0);
          for (int t = 0; t < lat.nt; ++t)
            for (int x = 0; x < lat.nx; ++x) {
              cplx v = 1.0;
              if (ca.field) v *= (*ca.field)(t, x);
              if (cb.field) v *= (*cb.field)(t + s.first, x + s.second);
              prod(t, x) = v;
            }
          c.field = std::make_shared<const ScalarField>(std::move(prod));
        }
        out.add({s.first + r.first, s.second + r.second}, c);
      }
    return out;
  }

 private:
  static Shift unit(int axis, int sign) { return axis == 0 ? Shift{sign, 0} : Shift{0, sign}; }

  void add(const Shift& s, const Coefficient& c) {
    if (c.scale == cplx(0.0)) return;
    auto it = terms_.find(s);
    if (it == terms_.end()) {
      terms_.emplace(s, c);
      return;
    }
    Coefficient& d = it->second;
    if (!d.field && !c.field) {
      d.scale += c.scale;
      if (d.scale == cplx(0.0)) terms_.erase(it);
      return;
    }
    const Lattice& lat = d.field ? d.field->lattice() : c.field->lattice();
    ScalarField sum(lat);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = d.at(i) + c.at(i);
    d = {1.0, std::make_shared<const ScalarField>(std::move(sum))};
  }

  std::map<Shift, Coefficient> terms_;
};

/// n x n matrix of operator entries acting on n-component fields.
class MatrixOperator {
 public:
  MatrixOperator(const Lattice& lat, int n) : lat_(lat), n_(n), e_(static_cast<std::size_t>(n) * n) {}

  static MatrixOperator identity(const Lattice& lat, int n) { return constant(lat, CMatrix::Identity(n, n)); }

  /// Constant matrix C identified with [c_ab id].
  static MatrixOperator constant(const Lattice& lat, const CMatrix& c) {
    MatrixOperator out(lat, static_cast<int>(c.rows()));
    for (int a = 0; a < out.n_; ++a)
      for (int b = 0; b < out.n_; ++b)
        if (c(a, b) != cplx(0.0)) out(a, b) = OperatorEntry::scalar(c(a, b));
    return out;
  }

  /// Pointwise multiplication by a site-dependent matrix.
  static MatrixOperator multiplication(const MatrixField& m) {
    MatrixOperator out(m.lattice(), m.n());
    for (int a = 0; a < out.n_; ++a)
      for (int b = 0; b < out.n_; ++b) {
        ScalarField f = m.entry(a, b);
        if (f.max_abs() != 0.0) out(a, b) = OperatorEntry::multiply(std::move(f));
      }
    return out;
  }

  /// 1_n d_axis.
  static MatrixOperator derivative(const Lattice& lat, int n, int axis) {
    MatrixOperator out(lat, n);
    for (int a = 0; a < n; ++a) out(a, a) = OperatorEntry::derivative(lat, axis);
    return out;
  }

  /// gamma^mu d_mu.
  static MatrixOperator slashed_derivative(const Lattice& lat, const clifford::GammaSet& g) {
    MatrixOperator out(lat, 4);
    for (int mu = 0; mu < 4; ++mu) out += constant(lat, g[mu]) * derivative(lat, 4, mu);
    return out;
  }

  [[nodiscard]] const Lattice& lattice() const { return lat_; }
  [[nodiscard]] int n() const { return n_; }
  OperatorEntry& operator()(int a, int b) { return e_[static_cast<std::size_t>(a) * n_ + b]; }
  const OperatorEntry& operator()(int a, int b) const { return e_[static_cast<std::size_t>(a) * n_ + b]; }

  [[nodiscard]] VectorField apply(const VectorField& psi) const {
    if (psi.n() != n_) throw DimensionMismatch("matrix operator dimension differs from field components");
    require_same_lattice(psi.lattice(), lat_, "MatrixOperator::apply");
    VectorField out(lat_, n_);
    for (int a = 0; a < n_; ++a)
      for (int b = 0; b < n_; ++b)
        if (!(*this)(a, b).is_zero()) out[a] += (*this)(a, b).apply(psi[b]);
    return out;
  }

  MatrixOperator& operator+=(const MatrixOperator& o) {
    check_compatible(o);
    for (std::size_t i = 0; i < e_.size(); ++i) e_[i] += o.e_[i];
    return *this;
  }
  friend MatrixOperator operator+(MatrixOperator a, const MatrixOperator& b) { return a += b; }
  friend MatrixOperator operator-(MatrixOperator a, const MatrixOperator& b) {
    return a += (-1.0) * b;
  }
  friend MatrixOperator operator*(cplx s, const MatrixOperator& b) { return constant(b.lat_, s * CMatrix::Identity(b.n_, b.n_)) * b; }

  /// odot product: (A B)_ab = sum_m a_am o b_mb.
  friend MatrixOperator operator*(const MatrixOperator& a, const MatrixOperator& b) { return odot(a, b); }
  friend MatrixOperator odot(const MatrixOperator& a, const MatrixOperator& b) {
    a.check_compatible(b);
    MatrixOperator out(a.lat_, a.n_);
    for (int r = 0; r < a.n_; ++r)
      for (int c = 0; c < a.n_; ++c)
        for (int m = 0; m < a.n_; ++m) {
          if (a(r, m).is_zero() || b(m, c).is_zero()) continue;
          out(r, c) += compose(a(r, m), b(m, c));
        }
    return out;
  }

 private:
  void check_compatible(const MatrixOperator& o) const {
    if (o.n_ != n_) throw DimensionMismatch("matrix operators of different size");
    require_same_lattice(o.lat_, lat_, "matrix operators");
  }

  Lattice lat_;
  int n_;
  std::vector<OperatorEntry> e_;
};

inline VectorField apply(const MatrixOperator& b, const VectorField& psi) { return b.apply(psi); }

inline constexpr double default_condition_bound = 1e6;

/// Site-dependent basis matrix f(x) = [f^b_a(x)], invertible everywhere.
class FrameMatrixField {
 public:
  explicit FrameMatrixField(MatrixField f, double condition_bound = default_condition_bound)
      : f_(std::move(f)), inv_(f_.lattice(), f_.n()) {
    const Lattice& lat = f_.lattice();
    for (std::size_t i = 0; i < lat.sites(); ++i) {
      Eigen::JacobiSVD<CMatrix> svd(f_[i]);
      const auto& s = svd.singularValues();
      const double smin = s(s.size() - 1);
      if (!(smin > 0.0) || s(0) / smin > condition_bound) {
        const int t = static_cast<int>(i / static_cast<std::size_t>(lat.nx));
        const int x = static_cast<int>(i % static_cast<std::size_t>(lat.nx));
        throw SingularFrame("frame matrix singular or ill-conditioned at site (t=" + std::to_string(t) +
                            ", x=" + std::to_string(x) + ")");
      }
      inv_[i] = f_[i].partialPivLu().inverse();
    }
  }

  [[nodiscard]] const Lattice& lattice() const { return f_.lattice(); }
  [[nodiscard]] int n() const { return f_.n(); }
  [[nodiscard]] const MatrixField& matrix() const { return f_; }
  [[nodiscard]] const MatrixField& inverse() const { return inv_; }

 private:
  MatrixField f_;
  MatrixField inv_;
};

/// E_mu(x) = f^{-1}(x) (centered difference of f along mu)(x).
inline MatrixField frame_connection(const FrameMatrixField& frame, int mu) {
  check_axis(mu);
  MatrixField d = centered_difference(frame.matrix(), mu);
  const Lattice& lat = frame.lattice();
  for (std::size_t i = 0; i < lat.sites(); ++i) d[i] = frame.inverse()[i] * d[i];
  return d;
}

/// Frame-relative matrix of B: f^{-1} (.) B (.) f with f acting by multiplication.
inline MatrixOperator matrix_of(const MatrixOperator& b, const FrameMatrixField& frame) {
  if (b.n() != frame.n()) throw DimensionMismatch("frame and operator dimensions differ");
  require_same_lattice(b.lattice(), frame.lattice(), "matrix_of");
  return odot(odot(MatrixOperator::multiplication(frame.inverse()), b), MatrixOperator::multiplication(frame.matrix()));
}

/// Pointwise similarity transform f^{-1} C f of a constant matrix.
inline MatrixField frame_matrix_of(const CMatrix& c, const FrameMatrixField& frame) {
  MatrixField out(frame.lattice(), frame.n());
  for (std::size_t i = 0; i < frame.lattice().sites(); ++i) out[i] = frame.inverse()[i] * c * frame.matrix()[i];
  return out;
}

/// Matrix of i hbar Dslash - m c 1_4 in the frame f:
///   i hbar G^mu(x) (1_4 D_mu + E_mu(x)) - m c 1_4,  D_mu = d_mu + i kappa A_mu.
inline MatrixOperator dirac_operator_matrix(const clifford::GammaSet& gamma, const FrameMatrixField& frame,
                                            const PotentialField& pot, double m) {
  const Lattice& lat = frame.lattice();
  if (frame.n() != 4) throw DimensionMismatch("Dirac operator needs a 4x4 frame");
  require_same_lattice(lat, pot.lattice(), "dirac_operator_matrix");
  const double hbar = pot.hbar;
  const double kappa = pot.kappa();
  MatrixOperator out = (-m * lat.c) * MatrixOperator::identity(lat, 4);
  for (int mu = 0; mu < 4; ++mu) {
    const MatrixField g_mu = frame_matrix_of(gamma[mu], frame);
    MatrixField conn = frame_connection(frame, mu);
    for (std::size_t i = 0; i < lat.sites(); ++i) conn[i] += CMatrix::Identity(4, 4) * (I_unit * kappa * pot.A[static_cast<std::size_t>(mu)][i]);
    MatrixOperator inner = MatrixOperator::derivative(lat, 4, mu) + MatrixOperator::multiplication(conn);
    out += (I_unit * hbar) * odot(MatrixOperator::multiplication(g_mu), inner);
  }
  return out;
}

}  // namespace relbundle::matrixop

#endif  // RELBUNDLE_MATRIXOP_HPP
