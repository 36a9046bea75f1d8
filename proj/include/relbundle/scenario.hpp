#ifndef RELBUNDLE_SCENARIO_HPP
#define RELBUNDLE_SCENARIO_HPP

// Scenario configuration: JSON parsing, defaults and preset resolution.
// The key schema is documented in docs/scenario_schema.md.

#include "relbundle/green.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace relbundle::scenario {

using json = nlohmann::json;

enum class Equation { dirac, kg_scalar, kg_two_component, kg_five_component, schrodinger };

inline Equation parse_equation(const std::string& s) {
  if (s == "dirac") return Equation::dirac;
  if (s == "kg-scalar") return Equation::kg_scalar;
  if (s == "kg-2comp") return Equation::kg_two_component;
  if (s == "kg-5comp") return Equation::kg_five_component;
  if (s == "schrodinger") return Equation::schrodinger;
  throw ConfigError("unknown equation: " + s);
}

inline std::string to_string(Equation e) {
  switch (e) {
    case Equation::dirac: return "dirac";
    case Equation::kg_scalar: return "kg-scalar";
    case Equation::kg_two_component: return "kg-2comp";
    case Equation::kg_five_component: return "kg-5comp";
    case Equation::schrodinger: return "schrodinger";
  }
  return "?";
}

/// "name" or "name(a, b, ...)" with numeric arguments.
struct Preset {
  std::string name;
  std::vector<double> args;
};

inline Preset parse_preset(const std::string& spec) {
  Preset p;
  const auto open = spec.find('(');
  if (open == std::string::npos) {
    p.name = spec;
  } else {
    if (spec.back() != ')') throw ConfigError("unknown preset: " + spec);
    p.name = spec.substr(0, open);
    std::stringstream ss(spec.substr(open + 1, spec.size() - open - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        p.args.push_back(std::stod(item, &used));
        if (item.find_first_not_of(" \t", used) != std::string::npos) throw ConfigError("unknown preset: " + spec);
      } catch (const std::logic_error&) {
        throw ConfigError("unknown preset: " + spec);
      }
    }
  }
  if (p.name.empty() || p.name.find_first_of(" \t") != std::string::npos) throw ConfigError("unknown preset: " + spec);
  return p;
}

inline void require_args(const Preset& p, std::size_t lo, std::size_t hi, const std::string& spec) {
  if (p.args.size() < lo || p.args.size() > hi) throw ConfigError("unknown preset: " + spec);
}

enum class MethodKind { direct, kernel, born, bundle };

struct Method {
  MethodKind kind = MethodKind::direct;
  int born_iterations = 0;
  [[nodiscard]] std::string label() const {
    switch (kind) {
      case MethodKind::direct: return "direct";
      case MethodKind::kernel: return "kernel";
      case MethodKind::born: return "born(" + std::to_string(born_iterations) + ")";
      case MethodKind::bundle: return "bundle";
    }
    return "?";
  }
};

inline Method parse_method(const std::string& spec) {
  const Preset p = parse_preset(spec);
  Method m;
  if (p.name == "direct" && p.args.empty()) m.kind = MethodKind::direct;
  else if (p.name == "kernel" && p.args.empty()) m.kind = MethodKind::kernel;
  else if (p.name == "bundle" && p.args.empty()) m.kind = MethodKind::bundle;
  else if (p.name == "born" && p.args.size() == 1 && p.args[0] >= 0 && p.args[0] == std::floor(p.args[0])) {
    m.kind = MethodKind::born;
    m.born_iterations = static_cast<int>(p.args[0]);
  } else {
    throw ConfigError("unknown method: " + spec);
  }
  return m;
}

struct Constants {
  double hbar = 1.0;
  double c = 1.0;
  double m = 1.0;
  double e = 0.0;
};

struct Scenario {
  std::string name = "scenario";
  Equation equation = Equation::dirac;
  int nt = 64, nx = 32;
  double dt = 0.05, dx = 0.2;
  Constants constants;
  std::string potential = "free";
  std::string frame = "identity";
  std::string initial_state = "plane-wave(1)";
  std::vector<Method> methods{Method{}};
  std::uint64_t seed = 1;
  std::string output_dir;  ///< empty: runs/<name>

  [[nodiscard]] Lattice lattice() const { return Lattice(nt, nx, dt, dx, constants.c); }
};

namespace detail {
template <class T>
T value_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("bad value for '") + key + "'");
  }
}

inline void reject_unknown_keys(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* n : known) ok = ok || k == n;
    if (!ok) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}
}  // namespace detail

/// Parses one scenario object; missing keys take the documented defaults.
inline Scenario parse_scenario(const json& j) {
  if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
  detail::reject_unknown_keys(j,
                              {"name", "equation", "lattice", "constants", "potential", "frame", "initial_state",
                               "methods", "seed", "output_dir"},
                              "scenario");
  Scenario s;
  s.name = detail::value_or<std::string>(j, "name", s.name);
  if (s.name.empty() || s.name.find_first_of("/\\") != std::string::npos) throw ConfigError("invalid scenario name");
  s.equation = parse_equation(detail::value_or<std::string>(j, "equation", "dirac"));
  if (s.equation == Equation::dirac) {
    // Born scenarios default to the small lattice
    if (j.contains("methods"))
      for (const auto& m : j.at("methods"))
        if (m.is_string() && m.get<std::string>().rfind("born", 0) == 0) s.nt = s.nx = 12;
  }
  if (j.contains("lattice")) {
    const json& l = j.at("lattice");
    detail::reject_unknown_keys(l, {"nt", "nx", "dt", "dx"}, "lattice");
    s.nt = detail::value_or<int>(l, "nt", s.nt);
    s.nx = detail::value_or<int>(l, "nx", s.nx);
    s.dt = detail::value_or<double>(l, "dt", s.dt);
    s.dx = detail::value_or<double>(l, "dx", s.dx);
  }
  if (j.contains("constants")) {
    const json& c = j.at("constants");
    detail::reject_unknown_keys(c, {"hbar", "c", "m", "e"}, "constants");
    s.constants.hbar = detail::value_or<double>(c, "hbar", s.constants.hbar);
    s.constants.c = detail::value_or<double>(c, "c", s.constants.c);
    s.constants.m = detail::value_or<double>(c, "m", s.constants.m);
    s.constants.e = detail::value_or<double>(c, "e", s.constants.e);
  }
  if (!(s.constants.hbar > 0.0)) throw ConfigError("hbar must be positive");
  if (!(s.constants.m >= 0.0)) throw ConfigError("mass must be non-negative");
  s.potential = detail::value_or<std::string>(j, "potential", s.potential);
  s.frame = detail::value_or<std::string>(j, "frame", s.frame);
  s.initial_state = detail::value_or<std::string>(j, "initial_state", s.initial_state);
  if (j.contains("methods")) {
    const json& ms = j.at("methods");
    if (!ms.is_array() || ms.empty()) throw ConfigError("methods must be a non-empty list");
    s.methods.clear();
    for (const auto& m : ms) {
      if (!m.is_string()) throw ConfigError("methods must be strings");
      s.methods.push_back(parse_method(m.get<std::string>()));
    }
  }
  s.seed = detail::value_or<std::uint64_t>(j, "seed", s.seed);
  s.output_dir = detail::value_or<std::string>(j, "output_dir", "");
  (void)s.lattice();  // validates the steps and sizes
  return s;
}

/// A config file holds one scenario object or {"scenarios": [...]}.
inline std::vector<Scenario> load_scenarios(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config " + path);
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  std::vector<Scenario> out;
  if (j.is_object() && j.contains("scenarios")) {
    if (!j.at("scenarios").is_array() || j.at("scenarios").empty()) throw ConfigError("scenarios must be a non-empty list");
    for (const auto& s : j.at("scenarios")) out.push_back(parse_scenario(s));
  } else {
    out.push_back(parse_scenario(j));
  }
  return out;
}

/// Fully resolved configuration; every default is spelled out.
inline json to_json(const Scenario& s) {
  json methods = json::array();
  for (const auto& m : s.methods) methods.push_back(m.label());
  return json{{"name", s.name},
              {"equation", to_string(s.equation)},
              {"lattice", {{"nt", s.nt}, {"nx", s.nx}, {"dt", s.dt}, {"dx", s.dx}}},
              {"constants", {{"hbar", s.constants.hbar}, {"c", s.constants.c}, {"m", s.constants.m}, {"e", s.constants.e}}},
              {"potential", s.potential},
              {"frame", s.frame},
              {"initial_state", s.initial_state},
              {"methods", methods},
              {"seed", s.seed},
              {"output_dir", s.output_dir.empty() ? "runs/" + s.name : s.output_dir}};
}

// ---------------------------------------------------------------------------
// Preset resolution
// ---------------------------------------------------------------------------

/// Potential presets: free, constant(a0), smooth(a), wave(a).
inline PotentialField make_potential(const std::string& spec, const Lattice& lat, double e, double hbar) {
  const Preset p = parse_preset(spec);
  PotentialField pot(lat, e, hbar);
  const double two_pi = 2.0 * std::numbers::pi;
  if (p.name == "free") {
    require_args(p, 0, 0, spec);
  } else if (p.name == "constant") {
    require_args(p, 1, 1, spec);
    pot.A[0] = ScalarField(lat, p.args[0]);
  } else if (p.name == "smooth") {
    require_args(p, 1, 1, spec);
    const double a = p.args[0];
    pot.A[0] = ScalarField::sample(lat, [&](double, double x) { return a * std::cos(two_pi * x / lat.length_x()); });
    pot.A[1] = ScalarField::sample(lat, [&](double, double x) { return 0.5 * a * std::sin(two_pi * x / lat.length_x()); });
  } else if (p.name == "wave") {
    require_args(p, 1, 1, spec);
    const double a = p.args[0];
    auto phase = [&](double t, double x) { return two_pi * (x / lat.length_x() - t / lat.length_t()); };
    pot.A[0] = ScalarField::sample(lat, [&](double t, double x) { return a * std::sin(phase(t, x)); });
    pot.A[1] = ScalarField::sample(lat, [&](double t, double x) { return 0.5 * a * std::cos(phase(t, x)); });
  } else {
    throw ConfigError("unknown preset: " + spec);
  }
  return pot;
}

/// Periodic distance x - x0 in [-L/2, L/2).
inline double periodic_offset(double x, double x0, double length) {
  double d = std::fmod(x - x0, length);
  if (d < -0.5 * length) d += length;
  if (d >= 0.5 * length) d -= length;
  return d;
}

inline CVector gaussian_profile(const Lattice& lat, double x0, double sigma, double k) {
  if (!(sigma > 0.0)) throw ConfigError("gaussian width must be positive");
  CVector v(lat.nx);
  for (int x = 0; x < lat.nx; ++x) {
    const double d = periodic_offset(lat.position(x), x0, lat.length_x());
    v(x) = std::exp(-0.5 * d * d / (sigma * sigma)) * std::exp(I_unit * k * lat.position(x));
  }
  return v / slice_norm(v, lat.dx);
}

/// Initial slice data. For the Klein-Gordon family `second` holds d_0 phi.
struct InitialState {
  CVector first;
  CVector second;
};

inline InitialState make_initial_state(const Scenario& s, const PotentialField& pot, const clifford::GammaSet& gamma) {
  const std::string& spec = s.initial_state;
  const Preset p = parse_preset(spec);
  const Lattice& lat = pot.lattice();
  const double m = s.constants.m, hbar = s.constants.hbar;
  const bool kg = s.equation == Equation::kg_scalar || s.equation == Equation::kg_two_component ||
                  s.equation == Equation::kg_five_component;
  InitialState out;
  if (p.name == "plane-wave") {
    require_args(p, 1, 2, spec);
    const int mode = static_cast<int>(p.args[0]);
    if (mode != p.args[0]) throw ConfigError("plane-wave mode must be an integer");
    const bool positive = p.args.size() < 2 || p.args[1] >= 0.0;
    if (s.equation == Equation::dirac) {
      const auto md = waveeq::lattice_mode(lat, mode, m, hbar, positive);
      const Eigen::Vector4cd u = waveeq::plane_wave_spinor(gamma, lat, md, m, hbar);
      out.first.resize(4 * lat.nx);
      for (int x = 0; x < lat.nx; ++x) out.first.segment<4>(4 * x) = u * std::exp(I_unit * md.k * lat.position(x));
    } else if (kg) {
      const auto md = waveeq::lattice_mode(lat, mode, m, hbar, positive);
      out.first.resize(lat.nx);
      for (int x = 0; x < lat.nx; ++x) out.first(x) = std::exp(I_unit * md.k * lat.position(x));
      out.second = out.first * (-I_unit * md.omega / lat.c);
    } else {
      const double k = 2.0 * std::numbers::pi * mode / lat.length_x();
      out.first.resize(lat.nx);
      for (int x = 0; x < lat.nx; ++x) out.first(x) = std::exp(I_unit * k * lat.position(x)) / std::sqrt(lat.length_x());
    }
    return out;
  }
  if (p.name == "gaussian") {
    require_args(p, 3, 3, spec);
    const CVector env = gaussian_profile(lat, p.args[0], p.args[1], p.args[2]);
    if (s.equation == Equation::dirac) {
      out.first = CVector::Zero(4 * lat.nx);
      for (int x = 0; x < lat.nx; ++x) out.first(4 * x) = env(x);
    } else if (kg) {
      const double mc = m * lat.c / hbar;
      const double omega = lat.c * std::sqrt(p.args[2] * p.args[2] + mc * mc);
      out.first = env;
      out.second = env * (-I_unit * omega / lat.c);
    } else {
      out.first = env;
    }
    return out;
  }
  if (p.name == "eigenstate") {
    require_args(p, 1, 1, spec);
    if (kg) throw ConfigError("eigenstate preset needs a slice Hamiltonian (dirac or schrodinger)");
    std::vector<double> v(static_cast<std::size_t>(lat.nx));
    for (int x = 0; x < lat.nx; ++x) v[static_cast<std::size_t>(x)] = pot.e * pot.A[0](0, x).real();
    const CMatrix h = s.equation == Equation::dirac ? waveeq::dirac_hamiltonian(gamma, pot, m, 0.0)
                                                    : green::schrodinger_hamiltonian(lat, m, hbar, v);
    const auto basis = green::SpectralBasis::from(h, lat.dx);
    const int a = static_cast<int>(p.args[0]);
    if (a != p.args[0] || a < 0 || a >= basis.states.cols()) throw ConfigError("eigenstate index out of range");
    out.first = basis.states.col(a);
    return out;
  }
  throw ConfigError("unknown preset: " + spec);
}

}  // namespace relbundle::scenario

#endif  // RELBUNDLE_SCENARIO_HPP
