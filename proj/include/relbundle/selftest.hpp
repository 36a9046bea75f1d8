#ifndef RELBUNDLE_SELFTEST_HPP
#define RELBUNDLE_SELFTEST_HPP

// The acceptance suite: nine criteria, each a pass/fail line with the measured
// value and its tolerance. Shared by the acceptance test binary and the CLI
// `selftest` subcommand.

#include "relbundle/runner.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <iomanip>
#include <iostream>
#include <random>

namespace relbundle::selftest {

struct Criterion {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double time_limit = 0.0;
};

namespace detail {

using Rng = std::mt19937_64;

inline cplx random_complex(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return {n(rng), n(rng)};
}

inline CVector random_vector(Rng& rng, Eigen::Index n) {
  CVector v(n);
  for (auto& z : v) z = random_complex(rng);
  return v;
}

/// Sum of a few low Fourier modes, periodic on the lattice.
inline ScalarField random_smooth_field(Rng& rng, const Lattice& lat, int modes = 3) {
  std::uniform_int_distribution<int> k(-2, 2);
  std::vector<std::tuple<cplx, int, int>> terms;
  for (int j = 0; j < modes; ++j) terms.emplace_back(random_complex(rng), k(rng), k(rng));
  const double two_pi = 2.0 * std::numbers::pi;
  return ScalarField::sample(lat, [&](double t, double x) {
    cplx s = 0.0;
    for (const auto& [a, kt, kx] : terms)
      s += a * std::exp(I_unit * two_pi * (kt * t / lat.length_t() + kx * x / lat.length_x()));
    return s;
  });
}

inline VectorField random_smooth_vector(Rng& rng, const Lattice& lat, int n) {
  VectorField v(lat, n);
  for (int a = 0; a < n; ++a) v[a] = random_smooth_field(rng, lat);
  return v;
}

/// Random first-order matrix operator: per entry, a constant, a field
/// multiplier and a field-weighted difference along axis 0 or 1.
inline matrixop::MatrixOperator random_operator(Rng& rng, const Lattice& lat, int n) {
  using matrixop::OperatorEntry;
  std::bernoulli_distribution keep(0.6);
  std::uniform_int_distribution<int> axis(0, 1);
  matrixop::MatrixOperator op(lat, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      OperatorEntry e;
      if (keep(rng)) e += OperatorEntry::scalar(random_complex(rng));
      if (keep(rng)) e += OperatorEntry::multiply(random_smooth_field(rng, lat, 2));
      if (keep(rng))
        e += compose(OperatorEntry::multiply(random_smooth_field(rng, lat, 2)),
                     OperatorEntry::derivative(lat, axis(rng), random_complex(rng)));
      op(a, b) = e;
    }
  return op;
}

inline double max_abs(const VectorField& v) { return v.max_abs(); }

inline double relative(const VectorField& a, const VectorField& b) {
  return (a - b).max_abs() / std::max(b.max_abs(), 1e-300);
}

inline std::string sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(2) << v;
  return os.str();
}

inline Criterion timed(int id, std::string title, double limit, const std::function<std::pair<bool, std::string>()>& body) {
  Criterion c;
  c.id = id;
  c.title = std::move(title);
  c.time_limit = limit;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    auto [ok, detail] = body();
    c.passed = ok;
    c.detail = std::move(detail);
  } catch (const std::exception& e) {
    c.passed = false;
    c.detail = std::string("exception: ") + e.what();
  }
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (c.seconds >= limit) {
    c.passed = false;
    c.detail += "; runtime limit exceeded";
  }
  return c;
}

/// log2 of consecutive ratios.
inline std::vector<double> orders(const std::vector<double>& errs) {
  std::vector<double> out;
  for (std::size_t i = 1; i < errs.size(); ++i) out.push_back(std::log2(errs[i - 1] / errs[i]));
  return out;
}

inline bool orders_within(const std::vector<double>& ords, double lo, double hi) {
  return std::all_of(ords.begin(), ords.end(), [&](double o) { return o >= lo && o <= hi; });
}

inline std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline Criterion clifford_suite() {
  return detail::timed(1, "clifford algebra", 1.0, [] {
    const auto g = clifford::build_gamma_set();
    const int eta[4] = {1, -1, -1, -1};
    int bad = 0;
    for (int mu = 0; mu < 4; ++mu)
      for (int nu = 0; nu < 4; ++nu) {
        const CMatrix expect = CMatrix::Identity(4, 4) * static_cast<double>(mu == nu ? 2 * eta[mu] : 0);
        if (clifford::anticommutator(g, mu, nu) != expect) ++bad;
      }
    const auto g5 = clifford::build_gamma5_set();
    int bad5 = 0;
    for (int mu = 0; mu < 4; ++mu)
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
          double expect = 0.0;
          if (i == mu && j == 4) expect = 1.0;
          if (i == 4 && j == mu) expect = eta[mu];
          if (g5[mu](i, j) != expect) ++bad5;
        }
    return std::pair{bad == 0 && bad5 == 0, "anticommutator mismatches " + std::to_string(bad) + "/16, 5x5 entry mismatches " +
                                                 std::to_string(bad5) + "/100"};
  });
}

inline Criterion matrixor_suite() {
  return detail::timed(2, "matrix operators", 5.0, [] {
    detail::Rng rng(20240611);
    const Lattice lat(8, 16, 0.1, 0.2);
    double assoc = 0.0, func = 0.0;
    for (int i = 0; i < 50; ++i) {
      const auto a = detail::random_operator(rng, lat, 4);
      const auto b = detail::random_operator(rng, lat, 4);
      const auto c = detail::random_operator(rng, lat, 4);
      const auto psi = detail::random_smooth_vector(rng, lat, 4);
      assoc = std::max(assoc, detail::relative(odot(odot(a, b), c).apply(psi), odot(a, odot(b, c)).apply(psi)));
      const auto frame = transport::make_frame_preset("random-smooth(" + std::to_string(i + 1) + ")", lat, 4);
      const auto& f = frame.basis();
      func = std::max(func, detail::relative(matrixop::matrix_of(odot(a, b), f).apply(psi),
                                             odot(matrixop::matrix_of(a, f), matrixop::matrix_of(b, f)).apply(psi)));
    }
    const double tol = 1e-10;
    return std::pair{assoc <= tol && func <= tol,
                     "associativity " + detail::sci(assoc) + ", functoriality " + detail::sci(func) + " (tol " +
                         detail::sci(tol) + ", 50 instances)"};
  });
}

inline Criterion transport_suite() {
  return detail::timed(3, "transport laws and convergence", 10.0, [] {
    detail::Rng rng(77);
    double law = 0.0;
    {
      const Lattice lat(16, 16, 0.2, 0.2);
      const auto tr = transport::make_transport(transport::make_frame_preset("random-smooth(3)", lat, 4));
      std::uniform_int_distribution<int> pick(0, 15);
      for (int i = 0; i < 100; ++i) {
        const Site x1{pick(rng), pick(rng)}, x2{pick(rng), pick(rng)}, x3{pick(rng), pick(rng)};
        const CMatrix l31 = tr(x3, x1);
        law = std::max(law, (tr(x3, x2) * tr(x2, x1) - l31).norm() / l31.norm());
        if (tr(x1, x1) != CMatrix::Identity(4, 4)) law = std::max(law, 1.0);
      }
      std::vector<CMatrix> fs;
      for (std::size_t s = 0; s < lat.sites(); ++s) fs.push_back(tr.frame().basis().matrix()[s]);
      law = std::max(law, transport::generic_transport_check(transport::Factorization::from(fs), 100, 5).max());
    }
    std::vector<double> r714, r710;
    for (int n : {16, 32, 64, 128}) {
      const double h = 3.2 / n;
      const Lattice lat(n, n, h, h);
      const auto frame = transport::make_frame_preset("random-smooth(3)", lat, 4);
      const auto coeffs = transport::coefficients(frame);
      // dL(y, x)/dy + Gamma(y) L(y, x) and dL(y, x)/dx - L(y, x) Gamma(x), reference point at the origin
      const CMatrix l0 = frame.l(0, 0), l0_inv = frame.l_inv(0, 0);
      MatrixField ly(lat, 4), lx(lat, 4);
      for (std::size_t i = 0; i < lat.sites(); ++i) {
        ly[i] = frame.basis().inverse()[i] * l0;
        lx[i] = l0_inv * frame.basis().matrix()[i];
      }
      double e = 0.0;
      for (int mu = 0; mu < 2; ++mu) {
        const MatrixField dy = centered_difference(ly, mu), dx = centered_difference(lx, mu);
        for (std::size_t i = 0; i < lat.sites(); ++i) {
          e = std::max(e, (dy[i] + coeffs[mu][i] * ly[i]).cwiseAbs().maxCoeff());
          e = std::max(e, (dx[i] - lx[i] * coeffs[mu][i]).cwiseAbs().maxCoeff());
        }
      }
      r714.push_back(e);
      CVector v(4);
      v << 1.0, cplx(0.0, 0.5), -0.3, 0.2;
      const auto sec = transport::transported_section(frame, v, Site{0, 0});
      double d = 0.0;
      for (int mu = 0; mu < 2; ++mu) d = std::max(d, transport::derivation_along(sec, coeffs, mu).max_abs());
      r710.push_back(d);
    }
    const auto o714 = detail::orders(r714), o710 = detail::orders(r710);
    const bool ok = law <= 1e-12 && detail::orders_within(o714, 1.7, 2.3) && detail::orders_within(o710, 1.7, 2.3);
    return std::pair{ok, "laws " + detail::sci(law) + " (tol 1.00e-12); derivative-relation orders " + detail::join(o714) +
                             "; section-derivation orders " + detail::join(o710) + " (want 2.0 +- 0.3)"};
  });
}

inline Criterion picture_equivalence_suite() {
  return detail::timed(4, "bundle vs conventional Dirac evolution", 30.0, [] {
    const Lattice lat(51, 16, 0.05, 0.2);
    const auto gamma = clifford::build_gamma_set();
    const double m = 1.0;
    detail::Rng rng(4);
    double worst = 0.0;
    for (const char* pspec : {"free", "smooth(0.5)", "wave(0.5)"}) {
      const auto pot = scenario::make_potential(pspec, lat, 1.0, 1.0);
      for (const char* fspec : {"identity", "phase(0.7)", "rotation(0.5)", "boost(0.3)", "random-smooth(11)"}) {
        const auto frame = transport::make_frame_preset(fspec, lat, 4);
        CVector psi0 = detail::random_vector(rng, 4 * lat.nx);
        psi0 /= slice_norm(psi0, lat.dx);
        const CVector conv = waveeq::evolve_dirac(gamma, psi0, pot, m, 0, 50);
        const CVector bun = waveeq::from_bundle(
            frame, waveeq::evolve_dirac_bundle(gamma, waveeq::to_bundle(frame, psi0, 0), frame, pot, m, 0, 50), 50);
        worst = std::max(worst, (bun - conv).cwiseAbs().maxCoeff());
      }
    }
    return std::pair{worst <= 1e-12, "max deviation " + detail::sci(worst) + " over 5 frames x 3 potentials (tol 1.00e-12)"};
  });
}

inline Criterion green_suite() {
  return detail::timed(5, "Green kernel / evolution correspondence", 30.0, [] {
    detail::Rng rng(5);
    // Schroedinger: i hbar dx block(t', t) against the matrix exponential
    const Lattice slat(24, 16, 0.05, 0.2);
    const double hbar = 1.0;
    std::vector<double> v;
    for (int x = 0; x < slat.nx; ++x) v.push_back(0.8 * std::cos(2.0 * std::numbers::pi * x / slat.nx));
    const CMatrix h = green::schrodinger_hamiltonian(slat, 1.0, hbar, v);
    const auto gs = green::schrodinger_green(h, slat, hbar);
    double schr = 0.0;
    for (int tp = 0; tp < slat.nt; ++tp) {
      const CMatrix oracle = (h * (-I_unit * slat.time(tp) / hbar)).exp();
      schr = std::max(schr, ((I_unit * hbar * slat.dx) * gs.block(tp, 0) - oracle).cwiseAbs().maxCoeff());
    }
    // Dirac: reconstruction against direct evolution on 20 random states
    const Lattice dlat(20, 16, 0.05, 0.2);
    const auto gamma = clifford::build_gamma_set();
    const auto pot = scenario::make_potential("wave(0.5)", dlat, 1.0, 1.0);
    const auto gd = green::dirac_green(gamma, pot, 1.0);
    double dirac = 0.0;
    for (int i = 0; i < 20; ++i) {
      CVector psi = detail::random_vector(rng, 4 * dlat.nx);
      psi /= slice_norm(psi, dlat.dx);
      const int t = i % 5;
      const CVector src = gd.weight(t) * psi;
      const auto col = gd.column(t);
      CVector direct = psi;
      for (int tp = t; tp < dlat.nt; ++tp) {
        if (tp > t) direct = waveeq::evolve_dirac(gamma, direct, pot, 1.0, tp - 1, tp);
        dirac = std::max(dirac, (col[static_cast<std::size_t>(tp - t)] * src - direct).cwiseAbs().maxCoeff());
      }
    }
    // retardation
    double retard = 0.0;
    for (int t = 0; t < dlat.nt; ++t)
      for (int tp = 0; tp < t; ++tp) retard = std::max(retard, gd.block(tp, t).cwiseAbs().maxCoeff());
    for (int t = 0; t < slat.nt; ++t)
      for (int tp = 0; tp < t; ++tp) retard = std::max(retard, gs.block(tp, t).cwiseAbs().maxCoeff());
    const bool ok = schr <= 1e-10 && dirac <= 1e-12 && retard == 0.0;
    return std::pair{ok, "schrodinger " + detail::sci(schr) + " (tol 1.00e-10), dirac " + detail::sci(dirac) +
                             " (tol 1.00e-12), max retarded block entry " + detail::sci(retard) + " (want 0)"};
  });
}

/// Relative Frobenius distance between the converged Born kernel and the
/// directly built interacting kernel on nt = nx = 12 with smooth(0.5), e = 0.5.
/// Measured 9.9e-3; pinned at twice that.
inline constexpr double born_envelope = 0.02;

inline Criterion born_suite() {
  return detail::timed(6, "Born series", 60.0, [] {
    const Lattice lat(12, 12, 0.05, 0.2);
    const auto gamma = clifford::build_gamma_set();
    const double m = 1.0;
    const PotentialField free_pot(lat, 0.0, 1.0);
    const auto g0 = green::dirac_green(gamma, free_pot, m);

    // e = 0: every iterate is g0, bit for bit
    const auto zero = green::born_iterate(g0, gamma, scenario::make_potential("smooth(0.5)", lat, 0.0, 1.0), 5);
    const CMatrix full0 = green::materialize(g0);
    const bool fixed = green::materialize(zero.kernel) == full0;

    const auto pot = scenario::make_potential("smooth(0.5)", lat, 0.5, 1.0);
    const auto five = green::born_iterate(g0, gamma, pot, 5);
    bool mono = five.residuals.size() == 6;
    for (std::size_t i = 1; i < five.residuals.size(); ++i) mono = mono && five.residuals[i] < five.residuals[i - 1];

    const auto conv = green::born_solve(g0, gamma, pot, 1e-10);
    const CMatrix direct = green::materialize(green::dirac_green(gamma, pot, m));
    const double dev = (green::materialize(conv.kernel) - direct).norm() / direct.norm();
    const bool ok = fixed && mono && !conv.divergence_warning && conv.residuals.back() < 1e-10 && dev <= born_envelope;
    return std::pair{ok, std::string("e=0 fixed point ") + (fixed ? "exact" : "NOT exact") + "; residuals " +
                             detail::sci(five.residuals.front()) + " -> " + detail::sci(five.residuals.back()) +
                             (mono ? " monotone" : " NOT monotone") + "; converged in " + std::to_string(conv.iterations) +
                             " iterations, deviation from direct kernel " + detail::sci(dev) + " (envelope " +
                             detail::sci(born_envelope) + ")"};
  });
}

inline Criterion klein_gordon_suite() {
  return detail::timed(7, "Klein-Gordon", 30.0, [] {
    detail::Rng rng(7);
    const double m = 1.0;
    // residual equivalence on lattice solutions and on smooth non-solutions
    const Lattice lat(16, 16, 0.05, 0.2);
    const PotentialField free_pot(lat, 0.0, 1.0);
    auto interior = [&](const ScalarField& f) {
      double worst = 0.0;
      for (int t = 2; t < lat.nt - 2; ++t)
        for (int x = 0; x < lat.nx; ++x) worst = std::max(worst, std::abs(f(t, x)));
      return worst;
    };
    double sol_scalar = 0.0, sol_five = 0.0, ratio_lo = 1e300, ratio_hi = 0.0, non_min = 1e300;
    std::uniform_int_distribution<int> mode(-4, 4);
    std::bernoulli_distribution sign(0.5);
    for (int i = 0; i < 20; ++i) {
      ScalarField phi(lat);
      for (int j = 0; j < 3; ++j) phi += detail::random_complex(rng) * waveeq::kg_plane_wave(lat, mode(rng), m, 1.0, sign(rng));
      sol_scalar = std::max(sol_scalar, interior(waveeq::kg_residual(phi, free_pot, m)));
      sol_five = std::max(sol_five, waveeq::kg5_residual(waveeq::kg_reduce_5(phi, free_pot, m), free_pot, m).max_abs(2, lat.nt - 2));
    }
    for (int i = 0; i < 20; ++i) {
      const ScalarField phi = detail::random_smooth_field(rng, lat);
      const double s = interior(waveeq::kg_residual(phi, free_pot, m));
      const double f = waveeq::kg5_residual(waveeq::kg_reduce_5(phi, free_pot, m), free_pot, m).max_abs(2, lat.nt - 2);
      non_min = std::min(non_min, s);
      ratio_lo = std::min(ratio_lo, f / s);
      ratio_hi = std::max(ratio_hi, f / s);
    }
    const bool equiv = sol_scalar <= 1e-9 && sol_five <= 1e-9 && non_min > 1e-3 && ratio_lo >= 0.5 && ratio_hi <= 2.0;

    // Green reconstruction against two-component evolution at fixed time 0.8
    std::vector<double> errs;
    for (int nx : {16, 32, 64, 128}) {
      const double dx = 3.2 / nx, dt = 0.25 * dx;
      const int steps = static_cast<int>(std::lround(0.8 / dt));
      const Lattice l(steps + 1, nx, dt, dx);
      const auto pot = scenario::make_potential("constant(0.5)", l, 1.0, 1.0);
      const auto md = waveeq::lattice_mode(l, 1, m, 1.0);
      CVector phi0(nx);
      for (int x = 0; x < nx; ++x) phi0(x) = std::exp(I_unit * md.k * l.position(x));
      const CVector chi0 = phi0 * (-I_unit * md.omega);
      const waveeq::KleinGordonTwoComponent sys(pot, m);
      const CVector s1 = sys.evolve(waveeq::pack_two_component(phi0, chi0), 0, 1);
      const CVector sT = sys.evolve(s1, 1, steps);
      const auto g = green::kg_scalar_green(pot, m);
      const CVector rec = green::kg_reconstruct(g, waveeq::two_component_phi(s1), waveeq::two_component_chi(s1), pot, 1, steps);
      errs.push_back((rec - waveeq::two_component_phi(sT)).cwiseAbs().maxCoeff());
    }
    const auto ords = detail::orders(errs);
    const bool rec_ok = detail::orders_within(ords, 1.7, 2.3);

    // charge conservation, dt = 1e-3, 100 steps
    const Lattice ql(101, 32, 1e-3, 0.2);
    const auto qpot = scenario::make_potential("smooth(0.5)", ql, 1.0, 1.0);
    const CVector env = scenario::gaussian_profile(ql, 3.2, 0.6, 1.0);
    CVector state = waveeq::pack_two_component(env, env * (-I_unit * std::sqrt(2.0)));
    const waveeq::KleinGordonTwoComponent qs(qpot, m);
    const double q0 = waveeq::kg_charge(state, qpot, 0);
    double drift = 0.0;
    for (int n = 0; n < 100; ++n) {
      state = qs.step_matrix(n) * state;
      drift = std::max(drift, std::abs(waveeq::kg_charge(state, qpot, n + 1) - q0) / std::abs(q0));
    }
    const bool q_ok = drift <= 1e-6;
    return std::pair{equiv && rec_ok && q_ok,
                     "solutions: scalar " + detail::sci(sol_scalar) + ", 5-comp " + detail::sci(sol_five) +
                         " (tol 1.00e-09); non-solutions: ratio in [" + detail::sci(ratio_lo) + ", " + detail::sci(ratio_hi) +
                         "]; reconstruction errors " + detail::sci(errs.front()) + " -> " + detail::sci(errs.back()) +
                         ", orders " + detail::join(ords) + "; charge drift " + detail::sci(drift) + " (tol 1.00e-06)"};
  });
}

inline Criterion unitarity_suite() {
  return detail::timed(8, "unitarity and conservation", 20.0, [] {
    detail::Rng rng(8);
    const Lattice lat(1001, 16, 0.05, 0.2);
    const auto gamma = clifford::build_gamma_set();
    const auto pot = scenario::make_potential("smooth(0.5)", lat, 1.0, 1.0);
    const auto prop = waveeq::dirac_propagator(gamma, pot, 1.0);
    CVector psi = detail::random_vector(rng, 4 * lat.nx);
    psi /= slice_norm(psi, lat.dx);
    double drift = 0.0;
    const CMatrix step = prop.step_matrix(0);
    for (int n = 0; n < 1000; ++n) {
      psi = step * psi;
      drift = std::max(drift, std::abs(slice_norm(psi, lat.dx) - 1.0));
    }
    // kernel norm under unitary frames
    const Lattice klat(12, 16, 0.05, 0.2);
    const auto kpot = scenario::make_potential("wave(0.5)", klat, 1.0, 1.0);
    const auto g = green::dirac_green(gamma, kpot, 1.0);
    double knorm = 0.0;
    for (const char* f : {"phase(0.7)", "rotation(0.5)"}) {
      const auto frame = transport::make_frame_preset(f, klat, 4);
      const auto gm = green::green_morphism(g, frame);
      for (int t = 0; t < klat.nt; t += 3) {
        const auto a = g.column(t), b = gm.column(t);
        for (std::size_t i = 0; i < a.size(); ++i) {
          const double na = a[i].operatorNorm(), nb = b[i].operatorNorm();
          knorm = std::max(knorm, std::abs(na - nb) / na);
        }
      }
    }
    return std::pair{drift <= 1e-12 && knorm <= 1e-12, "norm drift over 1000 steps " + detail::sci(drift) +
                                                            ", kernel norm change " + detail::sci(knorm) +
                                                            " (tol 1.00e-12)"};
  });
}

inline Criterion determinism_suite(const std::filesystem::path& scratch = {}) {
  return detail::timed(9, "deterministic run artifacts", 10.0, [&] {
    namespace fs = std::filesystem;
    const fs::path base = scratch.empty() ? fs::temp_directory_path() / ("relbundle-selftest-" + std::to_string(std::random_device{}()))
                                          : scratch;
    scenario::Scenario s = scenario::parse_scenario(scenario::json::parse(R"cfg({
      "name": "determinism",
      "equation": "dirac",
      "lattice": {"nt": 32, "nx": 16, "dt": 0.05, "dx": 0.2},
      "constants": {"m": 1.0, "e": 1.0},
      "potential": "wave(0.5)",
      "frame": "random-smooth(5)",
      "initial_state": "gaussian(1.6, 0.4, 2.0)",
      "methods": ["direct", "kernel", "bundle"]
    })cfg"));
    auto read = [](const fs::path& p) {
      std::ifstream is(p, std::ios::binary);
      return std::string(std::istreambuf_iterator<char>(is), {});
    };
    bool same = true;
    std::string first_obs, first_sum;
    for (int rep = 0; rep < 2; ++rep) {
      s.output_dir = (base / ("rep" + std::to_string(rep))).string();
      runner::run_batch({s});
      const std::string obs = read(fs::path(s.output_dir) / "observables.csv");
      const std::string sum = read(fs::path(s.output_dir) / "summary.csv");
      if (rep == 0) {
        first_obs = obs;
        first_sum = sum;
      } else {
        same = obs == first_obs && sum == first_sum && !obs.empty();
      }
    }
    std::error_code ec;
    if (scratch.empty()) fs::remove_all(base, ec);
    return std::pair{same, same ? std::string("observables.csv and summary.csv byte-identical across two runs")
                                : std::string("CSV outputs differ between identical runs")};
  });
}

inline std::vector<Criterion> run_all() {
  return {clifford_suite(),    matrixor_suite(),    transport_suite(), picture_equivalence_suite(), green_suite(),
          born_suite(),        klein_gordon_suite(), unitarity_suite(), determinism_suite()};
}

inline void print(std::ostream& os, const Criterion& c) {
  os << (c.passed ? "PASS" : "FAIL") << "  criterion " << c.id << "  " << c.title << ": " << c.detail << "  ["
     << std::fixed << std::setprecision(2) << c.seconds << " s, limit " << c.time_limit << " s]" << std::defaultfloat
     << "\n";
}

}  // namespace relbundle::selftest

#endif  // RELBUNDLE_SELFTEST_HPP
