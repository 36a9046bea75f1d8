#ifndef RELBUNDLE_RUNNER_HPP
#define RELBUNDLE_RUNNER_HPP

// Scenario execution, report artifacts and cross-report comparison.
//
// Artifacts per scenario directory:
//   observables.csv  method,slice,time,observable,value   (schema 1)
//   summary.csv      quantity,value                        (schema 1)
//   report.json      resolved config, summary, invariants, warnings, timings

#include "relbundle/scenario.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <future>
#include <map>

namespace relbundle::runner {

using scenario::json;
using scenario::Equation;
using scenario::MethodKind;
using scenario::Scenario;

inline constexpr int csv_schema = 1;

struct InvariantCheck {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  [[nodiscard]] bool ok() const { return value <= tolerance; }
};

struct ObservableRow {
  std::string method;
  int slice = 0;
  double time = 0.0;
  std::string observable;
  double value = 0.0;
};

struct RunReport {
  Scenario scenario;
  std::vector<ObservableRow> rows;
  std::vector<std::pair<std::string, double>> summary;  // insertion order is the CSV order
  std::vector<InvariantCheck> invariants;
  std::vector<std::string> warnings;
  std::vector<std::pair<std::string, double>> timings;

  [[nodiscard]] bool all_ok() const {
    return std::all_of(invariants.begin(), invariants.end(), [](const InvariantCheck& c) { return c.ok(); });
  }
  [[nodiscard]] std::optional<double> summary_value(const std::string& key) const {
    for (const auto& [k, v] : summary)
      if (k == key) return v;
    return std::nullopt;
  }
};

/// %.17g, which round-trips doubles.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

class PhaseTimer {
 public:
  explicit PhaseTimer(std::vector<std::pair<std::string, double>>& out) : out_(out) {}
  template <class F>
  decltype(auto) operator()(const std::string& phase, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    struct Record {
      std::vector<std::pair<std::string, double>>& out;
      std::string phase;
      std::chrono::steady_clock::time_point t0;
      ~Record() { out.emplace_back(phase, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()); }
    } rec{out_, phase, t0};
    return f();
  }

 private:
  std::vector<std::pair<std::string, double>>& out_;
};

/// Per-slice states of one method; slot t holds the state at slice t.
using History = std::vector<CVector>;

inline void add_series(RunReport& r, const Lattice& lat, const std::string& method, const std::string& obs,
                       const std::vector<double>& values) {
  for (int t = 0; t < static_cast<int>(values.size()); ++t)
    r.rows.push_back({method, t, lat.time(t), obs, values[static_cast<std::size_t>(t)]});
}

inline std::vector<double> norms(const History& h, double dx) {
  std::vector<double> out;
  for (const auto& v : h) out.push_back(slice_norm(v, dx));
  return out;
}

inline std::vector<double> deviations(const History& a, const History& ref) {
  std::vector<double> out;
  for (std::size_t t = 0; t < a.size(); ++t) out.push_back((a[t] - ref[t]).cwiseAbs().maxCoeff());
  return out;
}

inline double max_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

inline double max_relative_drift(const std::vector<double>& v) {
  double worst = 0.0;
  const double ref = std::max(std::abs(v.front()), std::numeric_limits<double>::min());
  for (double x : v) worst = std::max(worst, std::abs(x - v.front()) / ref);
  return worst;
}

inline void require_method_supported(const Scenario& s, const scenario::Method& m) {
  const bool dirac = s.equation == Equation::dirac;
  if ((m.kind == MethodKind::born || m.kind == MethodKind::bundle) && !dirac)
    throw ConfigError("method " + m.label() + " is only available for the dirac equation");
}

inline constexpr double exact_tolerance = 1e-10;

// --- Dirac ---------------------------------------------------------------

inline void run_dirac(const Scenario& s, RunReport& r, PhaseTimer& timed) {
  const Lattice lat = s.lattice();
  const auto gamma = clifford::build_gamma_set();
  const PotentialField pot = scenario::make_potential(s.potential, lat, s.constants.e, s.constants.hbar);
  const double m = s.constants.m;
  const CVector psi0 = scenario::make_initial_state(s, pot, gamma).first;
  std::optional<transport::FrameField> frame;
  for (const auto& meth : s.methods)
    if (meth.kind == MethodKind::bundle) frame = transport::make_frame_preset(s.frame, lat, 4);

  History direct = timed("direct", [&] {
    waveeq::EvolutionDiagnostics diag;
    const auto prop = waveeq::dirac_propagator(gamma, pot, m);
    (void)prop.evolve(psi0, 0, 0, &diag);
    if (diag.accuracy_warning)
      r.warnings.push_back("||H|| dt / hbar = " + fmt(diag.max_h_dt) + " exceeds 1; time step is coarse");
    History h{psi0};
    for (int n = 0; n + 1 < lat.nt; ++n) h.push_back(prop.step_matrix(n) * h.back());
    return h;
  });
  const auto n_direct = norms(direct, lat.dx);
  add_series(r, lat, "direct", "norm", n_direct);
  r.summary.emplace_back("norm_drift_direct", max_relative_drift(n_direct));
  r.invariants.push_back({"norm_drift_direct", max_relative_drift(n_direct), exact_tolerance});

  timed("residual", [&] {
    waveeq::SpinorField field(lat, 4);
    for (int t = 0; t < lat.nt; ++t) field.set_slice(t, direct[static_cast<std::size_t>(t)]);
    const auto res = waveeq::dirac_residual(gamma, field, pot, m);
    r.summary.emplace_back("residual_direct", lat.nt > 4 ? res.max_abs(2, lat.nt - 2) : 0.0);
    return 0;
  });

  for (const auto& meth : s.methods) {
    const std::string label = meth.label();
    if (meth.kind == MethodKind::direct) continue;
    History h = timed(label, [&]() -> History {
      if (meth.kind == MethodKind::bundle) {
        History out{psi0};
        CVector sec = waveeq::to_bundle(*frame, psi0, 0);
        for (int n = 0; n + 1 < lat.nt; ++n) {
          sec = waveeq::evolve_dirac_bundle(gamma, sec, *frame, pot, m, n, n + 1);
          out.push_back(waveeq::from_bundle(*frame, sec, n + 1));
        }
        return out;
      }
      std::optional<green::GreenKernel> kernel;
      if (meth.kind == MethodKind::kernel) {
        kernel = green::dirac_green(gamma, pot, m);
      } else {
        PotentialField free_pot(lat, s.constants.e, s.constants.hbar);
        const auto born = green::born_iterate(green::dirac_green(gamma, free_pot, m), gamma, pot, meth.born_iterations);
        if (born.divergence_warning) r.warnings.push_back(label + ": update norm grew between iterations");
        if (!born.residuals.empty()) r.summary.emplace_back("born_residual_" + std::to_string(meth.born_iterations), born.residuals.back());
        kernel = born.kernel;
      }
      const CVector src = kernel->weight(0) * psi0;
      History out;
      for (const auto& b : kernel->column(0)) out.push_back(b * src);
      return out;
    });
    const auto dev = deviations(h, direct);
    add_series(r, lat, label, "norm", norms(h, lat.dx));
    add_series(r, lat, label, "deviation", dev);
    r.summary.emplace_back("max_deviation_" + label, max_of(dev));
    if (meth.kind != MethodKind::born) r.invariants.push_back({"max_deviation_" + label, max_of(dev), exact_tolerance});
  }
}

// --- Schroedinger ----------------------------------------------------------

inline void run_schrodinger(const Scenario& s, RunReport& r, PhaseTimer& timed) {
  const Lattice lat = s.lattice();
  const auto gamma = clifford::build_gamma_set();
  const PotentialField pot = scenario::make_potential(s.potential, lat, s.constants.e, s.constants.hbar);
  if (!pot.is_static()) throw ConfigError("schrodinger scenarios need a time-independent potential");
  std::vector<double> v(static_cast<std::size_t>(lat.nx));
  for (int x = 0; x < lat.nx; ++x) v[static_cast<std::size_t>(x)] = pot.e * pot.A[0](0, x).real();
  const CMatrix h = green::schrodinger_hamiltonian(lat, s.constants.m, s.constants.hbar, v);
  const CVector psi0 = scenario::make_initial_state(s, pot, gamma).first;

  History direct = timed("direct", [&] {
    History out;
    for (int t = 0; t < lat.nt; ++t) out.push_back(waveeq::exact_exponential(h, lat.time(t), s.constants.hbar) * psi0);
    return out;
  });
  const auto n_direct = norms(direct, lat.dx);
  add_series(r, lat, "direct", "norm", n_direct);
  r.summary.emplace_back("norm_drift_direct", max_relative_drift(n_direct));
  r.invariants.push_back({"norm_drift_direct", max_relative_drift(n_direct), exact_tolerance});

  for (const auto& meth : s.methods) {
    if (meth.kind != MethodKind::kernel) continue;
    History k = timed("kernel", [&] {
      const auto g = green::schrodinger_green(h, lat, s.constants.hbar);
      const CVector src = g.weight(0) * psi0;
      History out;
      for (const auto& b : g.column(0)) out.push_back(b * src);
      return out;
    });
    const auto dev = deviations(k, direct);
    add_series(r, lat, "kernel", "norm", norms(k, lat.dx));
    add_series(r, lat, "kernel", "deviation", dev);
    r.summary.emplace_back("max_deviation_kernel", max_of(dev));
    r.invariants.push_back({"max_deviation_kernel", max_of(dev), exact_tolerance});
  }
}

// --- Klein-Gordon -----------------------------------------------------------

inline std::vector<double> charges(const History& two_component, const PotentialField& pot) {
  std::vector<double> out;
  for (std::size_t t = 0; t < two_component.size(); ++t)
    out.push_back(waveeq::kg_charge(two_component[t], pot, static_cast<int>(t)));
  return out;
}

/// Two-component slices (phi, d_0 phi) of a scalar history; d_0 phi is centered
/// inside and one-sided second order at the ends.
inline History with_time_derivative(const ScalarField& phi) {
  const Lattice& lat = phi.lattice();
  const double h = lat.step(0);
  History out;
  for (int t = 0; t < lat.nt; ++t) {
    CVector d(lat.nx);
    for (int x = 0; x < lat.nx; ++x) {
      if (lat.nt < 3) d(x) = (phi(1, x) - phi(0, x)) / h;
      else if (t == 0) d(x) = (-3.0 * phi(0, x) + 4.0 * phi(1, x) - phi(2, x)) / (2.0 * h);
      else if (t == lat.nt - 1) d(x) = (3.0 * phi(t, x) - 4.0 * phi(t - 1, x) + phi(t - 2, x)) / (2.0 * h);
      else d(x) = (phi(t + 1, x) - phi(t - 1, x)) / (2.0 * h);
    }
    out.push_back(waveeq::pack_two_component(waveeq::slice_of(phi, t), d));
  }
  return out;
}

inline void run_klein_gordon(const Scenario& s, RunReport& r, PhaseTimer& timed) {
  const Lattice lat = s.lattice();
  const auto gamma = clifford::build_gamma_set();
  const PotentialField pot = scenario::make_potential(s.potential, lat, s.constants.e, s.constants.hbar);
  const double m = s.constants.m;
  const auto init = scenario::make_initial_state(s, pot, gamma);
  const bool two = s.equation == Equation::kg_two_component;
  const int interior_lo = 2, interior_hi = lat.nt - 2;

  // Residuals of the exact lattice plane wave, when the run has one.
  if (scenario::parse_preset(s.initial_state).name == "plane-wave" && pot.is_zero()) {
    const auto p = scenario::parse_preset(s.initial_state);
    const ScalarField wave =
        waveeq::kg_plane_wave(lat, static_cast<int>(p.args[0]), m, s.constants.hbar, p.args.size() < 2 || p.args[1] >= 0);
    ScalarField res = waveeq::kg_residual(wave, pot, m);
    double scalar_res = 0.0;
    for (int t = interior_lo; t < interior_hi; ++t)
      for (int x = 0; x < lat.nx; ++x) scalar_res = std::max(scalar_res, std::abs(res(t, x)));
    r.summary.emplace_back("solution_residual_scalar", scalar_res);
    r.invariants.push_back({"solution_residual_scalar", scalar_res, 1e-9});
    if (m > 0.0) {
      const auto res5 = waveeq::kg5_residual(waveeq::kg_reduce_5(wave, pot, m), pot, m);
      const double five = res5.max_abs(interior_lo, interior_hi);
      r.summary.emplace_back("solution_residual_5comp", five);
      r.invariants.push_back({"solution_residual_5comp", five, 1e-9});
    }
  }

  History direct = timed("direct", [&] {
    if (two) {
      const waveeq::KleinGordonTwoComponent sys(pot, m);
      History out{waveeq::pack_two_component(init.first, init.second)};
      for (int n = 0; n + 1 < lat.nt; ++n) out.push_back(sys.step_matrix(n) * out.back());
      return out;
    }
    const ScalarField phi = waveeq::evolve_kg_leapfrog(init.first, init.second, pot, m);
    ScalarField res = waveeq::kg_residual(phi, pot, m);
    double worst = 0.0;
    for (int t = interior_lo; t < interior_hi; ++t)
      for (int x = 0; x < lat.nx; ++x) worst = std::max(worst, std::abs(res(t, x)));
    r.summary.emplace_back("residual_direct", worst);
    if (s.equation == Equation::kg_five_component && m > 0.0) {
      const auto res5 = waveeq::kg5_residual(waveeq::kg_reduce_5(phi, pot, m), pot, m);
      r.summary.emplace_back("residual_direct_5comp", res5.max_abs(interior_lo, interior_hi));
    }
    return with_time_derivative(phi);
  });
  const auto q = charges(direct, pot);
  add_series(r, lat, "direct", "charge", q);
  r.summary.emplace_back("charge_drift_direct", max_relative_drift(q));
  if (two) r.invariants.push_back({"charge_drift_direct", max_relative_drift(q), 1e-8});

  for (const auto& meth : s.methods) {
    if (meth.kind != MethodKind::kernel) continue;
    History k = timed("kernel", [&] {
      History out;
      if (two) {
        const auto g = green::kg_green_tilde(pot, m);
        const CVector src = g.weight(0) * direct.front();
        for (const auto& b : g.column(0)) out.push_back(b * src);
        return out;
      }
      // reconstruct every later slice from the data at slice 1
      if (lat.nt < 3) throw ConfigError("kernel reconstruction needs nt >= 3");
      const auto g = green::kg_scalar_green(pot, m);
      const CVector phi1 = waveeq::two_component_phi(direct[1]);
      const CVector chi1 = waveeq::two_component_chi(direct[1]);
      out.push_back(direct[0]);
      out.push_back(direct[1]);
      const auto c_lo = g.column(0), c_mid = g.column(1), c_hi = g.column(2);
      const double h = lat.step(0);
      CVector src = chi1;
      for (int x = 0; x < lat.nx; ++x) src(x) += 2.0 * I_unit * pot.kappa() * pot.A[0](1, x).real() * phi1(x);
      ScalarField phi(lat);
      for (int x = 0; x < lat.nx; ++x) {
        phi(0, x) = waveeq::two_component_phi(direct[0])(x);
        phi(1, x) = phi1(x);
      }
      for (int tp = 2; tp < lat.nt; ++tp) {
        const CMatrix gs = c_mid[static_cast<std::size_t>(tp - 1)];
        const CMatrix dgs = (c_hi[static_cast<std::size_t>(tp - 2)] - c_lo[static_cast<std::size_t>(tp)]) / (2.0 * h);
        const CVector v = (gs * src - dgs * phi1) * lat.dx;
        for (int x = 0; x < lat.nx; ++x) phi(tp, x) = v(x);
      }
      return with_time_derivative(phi);
    });
    std::vector<double> dev;
    for (std::size_t t = 0; t < k.size(); ++t)
      dev.push_back((waveeq::two_component_phi(k[t]) - waveeq::two_component_phi(direct[t])).cwiseAbs().maxCoeff());
    add_series(r, lat, "kernel", "charge", charges(k, pot));
    add_series(r, lat, "kernel", "deviation", dev);
    r.summary.emplace_back("max_deviation_kernel", max_of(dev));
    if (two) r.invariants.push_back({"max_deviation_kernel", max_of(dev), exact_tolerance});
  }
}

}  // namespace detail

/// Executes every method of the scenario. No files are written here.
inline RunReport run(const Scenario& s) {
  RunReport r;
  r.scenario = s;
  for (const auto& m : s.methods) detail::require_method_supported(s, m);
  // resolve presets up front so that bad names fail before any work
  {
    const Lattice lat = s.lattice();
    const auto pot = scenario::make_potential(s.potential, lat, s.constants.e, s.constants.hbar);
    (void)scenario::make_initial_state(s, pot, clifford::build_gamma_set());
    if (s.equation == Equation::dirac) (void)transport::make_frame_preset(s.frame, lat, 4);
  }
  detail::PhaseTimer timed(r.timings);
  switch (s.equation) {
    case Equation::dirac: detail::run_dirac(s, r, timed); break;
    case Equation::schrodinger: detail::run_schrodinger(s, r, timed); break;
    default: detail::run_klein_gordon(s, r, timed); break;
  }
  return r;
}

inline std::string observables_csv(const RunReport& r) {
  std::string out = "method,slice,time,observable,value\n";
  for (const auto& row : r.rows)
    out += row.method + "," + std::to_string(row.slice) + "," + fmt(row.time) + "," + row.observable + "," +
           fmt(row.value) + "\n";
  return out;
}

inline std::string summary_csv(const RunReport& r) {
  std::string out = "quantity,value\n";
  for (const auto& [k, v] : r.summary) out += k + "," + fmt(v) + "\n";
  return out;
}

inline json report_json(const RunReport& r) {
  json inv = json::array();
  for (const auto& c : r.invariants) inv.push_back({{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"ok", c.ok()}});
  json summary = json::object();
  for (const auto& [k, v] : r.summary) summary[k] = v;
  json timings = json::object();
  for (const auto& [k, v] : r.timings) timings[k] = v;
  return json{{"csv_schema", csv_schema},
              {"config", scenario::to_json(r.scenario)},
              {"summary", summary},
              {"invariants", inv},
              {"invariants_ok", r.all_ok()},
              {"warnings", r.warnings},
              {"timings_s", timings},
              {"artifacts", {"observables.csv", "summary.csv", "report.json"}}};
}

inline std::filesystem::path output_directory(const Scenario& s, const std::filesystem::path& base = {}) {
  const std::filesystem::path dir = s.output_dir.empty() ? std::filesystem::path("runs") / s.name : std::filesystem::path(s.output_dir);
  return base.empty() || dir.is_absolute() ? dir : base / dir;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw Error("cannot write " + p.string());
  os << text;
  if (!os) throw Error("cannot write " + p.string());
}

inline void write_artifacts(const RunReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "observables.csv", observables_csv(r));
  write_text(dir / "summary.csv", summary_csv(r));
  write_text(dir / "report.json", report_json(r).dump(2) + "\n");
}

/// Runs scenarios concurrently, one worker each, and writes each into its
/// own directory. Exceptions propagate after every worker finished.
inline std::vector<RunReport> run_batch(const std::vector<Scenario>& scenarios, const std::filesystem::path& base = {}) {
  std::vector<std::future<RunReport>> jobs;
  for (const auto& s : scenarios)
    jobs.push_back(std::async(std::launch::async, [&s, &base] {
      RunReport r = run(s);
      write_artifacts(r, output_directory(s, base));
      return r;
    }));
  std::vector<RunReport> out;
  std::exception_ptr first;
  for (auto& j : jobs) {
    try {
      out.push_back(j.get());
    } catch (...) {
      if (!first) first = std::current_exception();
    }
  }
  if (first) std::rethrow_exception(first);
  return out;
}

// ---------------------------------------------------------------------------
// Comparison
// ---------------------------------------------------------------------------

inline json load_report(const std::string& path) {
  std::filesystem::path p(path);
  if (std::filesystem::is_directory(p)) p /= "report.json";
  std::ifstream is(p);
  if (!is) throw ConfigError("cannot read report " + p.string());
  try {
    return json::parse(is);
  } catch (const json::parse_error&) {
    throw ConfigError("report is not valid JSON: " + p.string());
  }
}

/// CSV of every shared summary quantity across reports: the deviation from
/// the first report and log2(previous / current), the observed order when
/// consecutive reports halve the grid.
inline std::string compare_reports(const std::vector<json>& reports) {
  if (reports.empty()) throw ConfigError("compare needs at least one report");
  const auto family = [](const json& r) {
    const json& c = r.at("config");
    return c.at("equation").get<std::string>() + "|" + c.at("potential").get<std::string>() + "|" +
           c.at("initial_state").get<std::string>();
  };
  for (const auto& r : reports)
    if (!r.contains("config") || !r.contains("summary")) throw ConfigError("not a run report");
  const std::string fam = family(reports.front());
  for (const auto& r : reports)
    if (family(r) != fam) throw ConfigError("reports belong to different scenario families");

  std::string out = "quantity,report,dx,dt,value,deviation_from_first,observed_order\n";
  for (const auto& [key, first_val] : reports.front().at("summary").items()) {
    bool shared = true;
    for (const auto& r : reports) shared = shared && r.at("summary").contains(key);
    if (!shared) continue;
    const double v0 = first_val.get<double>();
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const json& c = reports[i].at("config").at("lattice");
      const double v = reports[i].at("summary").at(key).get<double>();
      std::string order;
      if (i > 0) {
        const double prev = reports[i - 1].at("summary").at(key).get<double>();
        if (prev > 0.0 && v > 0.0) order = fmt(std::log2(prev / v));
      }
      out += key + "," + std::to_string(i) + "," + fmt(c.at("dx").get<double>()) + "," + fmt(c.at("dt").get<double>()) +
             "," + fmt(v) + "," + fmt(std::abs(v - v0)) + "," + order + "\n";
    }
  }
  return out;
}

}  // namespace relbundle::runner

#endif  // RELBUNDLE_RUNNER_HPP
