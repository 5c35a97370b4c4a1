#include "alab/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "alab/errors.hpp"
#include "alab/hashing.hpp"
#include "alab/io.hpp"

namespace alab::config {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return x;
}

int to_int(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long x = 0;
  try {
    x = std::stol(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::string spaced = v;
  for (char& ch : spaced)
    if (ch == ',') ch = ' ';
  std::istringstream ss(spaced);
  std::string item;
  while (ss >> item) out.push_back(to_double(key, item));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

std::string list(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + io::num(xs[i]);
  return s;
}

template <class F>
auto wrap(const std::string& key, F&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> m = {
      {"kernel.family", [](RunConfig& c, auto& k, auto& v) { c.kernel.family = wrap(k, [&] { return collision::parse_family(v); }); }},
      {"kernel.gamma", [](RunConfig& c, auto& k, auto& v) { c.kernel.gamma = to_double(k, v); }},
      {"kernel.angular_kernel", [](RunConfig& c, auto& k, auto& v) { c.kernel.angular_kernel = wrap(k, [&] { return collision::parse_angular_kernel(v); }); }},
      {"kernel.angular_nodes", [](RunConfig& c, auto& k, auto& v) { c.kernel.angular_nodes = to_int(k, v); }},
      {"kernel.impact_nodes", [](RunConfig& c, auto& k, auto& v) { c.kernel.impact_nodes = to_int(k, v); }},
      {"kernel.interpolation", [](RunConfig& c, auto& k, auto& v) { c.kernel.interpolation = wrap(k, [&] { return collision::parse_interpolation(v); }); }},
      {"kernel.c_b", [](RunConfig& c, auto& k, auto& v) { c.kernel.c_b = to_double(k, v); }},
      {"grid.v_max", [](RunConfig& c, auto& k, auto& v) { c.grid.v_max = to_double(k, v); }},
      {"grid.counts", [](RunConfig& c, auto& k, auto& v) {
         const auto xs = to_list(k, v);
         if (xs.size() == 1) {
           c.grid.counts.fill(static_cast<int>(xs[0]));
         } else if (xs.size() == 3) {
           for (int i = 0; i < 3; ++i) c.grid.counts[i] = static_cast<int>(xs[i]);
         } else {
           throw ConfigError(k + ": expected one or three counts");
         }
       }},
      {"grid.rule", [](RunConfig& c, auto& k, auto& v) { c.grid.rule = wrap(k, [&] { return velocity::parse_rule(v); }); }},
      {"grid.tol_moment", [](RunConfig& c, auto& k, auto& v) { c.grid.tol_moment = to_double(k, v); }},
      {"grid.spatial_dim", [](RunConfig& c, auto& k, auto& v) { c.grid.space.dim = to_int(k, v); }},
      {"grid.nx", [](RunConfig& c, auto& k, auto& v) { c.grid.space.n = to_int(k, v); }},
      {"solver.epsilon", [](RunConfig& c, auto& k, auto& v) { c.solver.epsilon = to_double(k, v); }},
      {"solver.epsilons", [](RunConfig& c, auto& k, auto& v) { c.solver.epsilons = to_list(k, v); }},
      {"solver.dt", [](RunConfig& c, auto& k, auto& v) { c.solver.dt = to_double(k, v); }},
      {"solver.t_end", [](RunConfig& c, auto& k, auto& v) { c.solver.t_end = to_double(k, v); }},
      {"solver.mode", [](RunConfig& c, auto& k, auto& v) { c.solver.mode = wrap(k, [&] { return kinetic::parse_mode(v); }); }},
      {"solver.splitting", [](RunConfig& c, auto& k, auto& v) { c.solver.splitting = wrap(k, [&] { return kinetic::parse_splitting(v); }); }},
      {"solver.amplitude", [](RunConfig& c, auto& k, auto& v) { c.solver.amplitude = to_double(k, v); }},
      {"solver.wave_number", [](RunConfig& c, auto& k, auto& v) { c.solver.wave_number = to_int(k, v); }},
      {"solver.direction", [](RunConfig& c, auto& k, auto& v) { c.solver.direction = to_int(k, v); }},
      {"diagnostics.N", [](RunConfig& c, auto& k, auto& v) { c.diagnostics.N = to_int(k, v); }},
      {"diagnostics.l", [](RunConfig& c, auto& k, auto& v) { c.diagnostics.l = to_double(k, v); }},
      {"diagnostics.probes", [](RunConfig& c, auto& k, auto& v) { c.diagnostics.probes = to_list(k, v); }},
      {"diagnostics.tol_sym", [](RunConfig& c, auto& k, auto& v) { c.diagnostics.tol_sym = to_double(k, v); }},
      {"diagnostics.tol_null", [](RunConfig& c, auto& k, auto& v) { c.diagnostics.tol_null = to_double(k, v); }},
      {"diagnostics.tol_psd", [](RunConfig& c, auto& k, auto& v) { c.diagnostics.tol_psd = to_double(k, v); }},
      {"diagnostics.tol_step", [](RunConfig& c, auto& k, auto& v) { c.diagnostics.tol_step = to_double(k, v); }},
      {"diagnostics.tol_conserve", [](RunConfig& c, auto& k, auto& v) { c.diagnostics.tol_conserve = to_double(k, v); }},
      {"diagnostics.tol_conserve_rate", [](RunConfig& c, auto& k, auto& v) { c.diagnostics.tol_conserve_rate = to_double(k, v); }},
      {"diagnostics.tol_energy", [](RunConfig& c, auto& k, auto& v) { c.diagnostics.tol_energy = to_double(k, v); }},
      {"diagnostics.tol_energy_bound", [](RunConfig& c, auto& k, auto& v) { c.diagnostics.tol_energy_bound = to_double(k, v); }},
      {"io.out_dir", [](RunConfig& c, auto&, auto& v) { c.io.out_dir = v; }},
      {"io.cadence", [](RunConfig& c, auto& k, auto& v) { c.io.cadence = to_int(k, v); }},
      {"io.cache", [](RunConfig& c, auto&, auto& v) { c.io.cache = v; }},
      {"io.dump_full", [](RunConfig& c, auto& k, auto& v) { c.io.dump_full = to_bool(k, v); }},
      {"io.jobs", [](RunConfig& c, auto& k, auto& v) { c.io.jobs = to_int(k, v); }},
      {"io.max_entries", [](RunConfig& c, auto& k, auto& v) {
         const double x = to_double(k, v);
         if (!(x >= 1.0)) throw ConfigError(k + ": must be positive");
         c.io.max_entries = static_cast<std::size_t>(x);
       }},
  };
  return m;
}

}  // namespace

void RunConfig::validate() const {
  if (!(grid.v_max > 0.0)) throw ConfigError("grid.v_max must be positive");
  for (int c : grid.counts)
    if (c < 4 || c % 2) throw ConfigError("grid.counts must be even and >= 4");
  if (!(grid.tol_moment > 0.0)) throw ConfigError("grid.tol_moment must be positive");
  grid.space.validate();
  if (!(solver.epsilon > 0.0 && solver.epsilon <= 0.25))
    throw ConfigError("solver.epsilon must lie in (0, 1/4]");
  for (double e : solver.epsilons)
    if (!(e > 0.0 && e <= 0.25)) throw ConfigError("solver.epsilons must lie in (0, 1/4]");
  if (!(solver.dt > 0.0)) throw ConfigError("solver.dt must be positive");
  if (!(solver.t_end >= 0.0)) throw ConfigError("solver.t_end must be nonnegative");
  if (solver.direction != 1 && solver.direction != -1)
    throw ConfigError("solver.direction must be 1 or -1");
  if (solver.wave_number < 1 || 2 * solver.wave_number >= grid.space.n)
    throw ConfigError("solver.wave_number must be resolved by grid.nx");
  if (diagnostics.N < 0) throw ConfigError("diagnostics.N must be nonnegative");
  for (double t : {diagnostics.tol_sym, diagnostics.tol_null, diagnostics.tol_psd,
                   diagnostics.tol_step, diagnostics.tol_conserve, diagnostics.tol_conserve_rate,
                   diagnostics.tol_energy, diagnostics.tol_energy_bound})
    if (!(t > 0.0)) throw ConfigError("tolerances must be positive");
  if (io.cadence < 1) throw ConfigError("io.cadence must be >= 1");
  if (io.jobs < 1) throw ConfigError("io.jobs must be >= 1");
}

std::string RunConfig::serialize() const {
  std::ostringstream os;
  os << "kernel.family = " << collision::to_string(kernel.family) << '\n'
     << "kernel.gamma = " << io::num(kernel.gamma) << '\n'
     << "kernel.angular_kernel = " << collision::to_string(kernel.angular_kernel) << '\n'
     << "kernel.angular_nodes = " << kernel.angular_nodes << '\n'
     << "kernel.impact_nodes = " << kernel.impact_nodes << '\n'
     << "kernel.interpolation = " << collision::to_string(kernel.interpolation) << '\n'
     << "kernel.c_b = " << io::num(kernel.c_b) << '\n'
     << "grid.v_max = " << io::num(grid.v_max) << '\n'
     << "grid.counts = " << grid.counts[0] << ", " << grid.counts[1] << ", " << grid.counts[2] << '\n'
     << "grid.rule = " << velocity::to_string(grid.rule) << '\n'
     << "grid.tol_moment = " << io::num(grid.tol_moment) << '\n'
     << "grid.spatial_dim = " << grid.space.dim << '\n'
     << "grid.nx = " << grid.space.n << '\n'
     << "solver.epsilon = " << io::num(solver.epsilon) << '\n'
     << "solver.epsilons = " << list(solver.epsilons) << '\n'
     << "solver.dt = " << io::num(solver.dt) << '\n'
     << "solver.t_end = " << io::num(solver.t_end) << '\n'
     << "solver.mode = " << kinetic::to_string(solver.mode) << '\n'
     << "solver.splitting = " << kinetic::to_string(solver.splitting) << '\n'
     << "solver.amplitude = " << io::num(solver.amplitude) << '\n'
     << "solver.wave_number = " << solver.wave_number << '\n'
     << "solver.direction = " << solver.direction << '\n'
     << "diagnostics.N = " << diagnostics.N << '\n'
     << "diagnostics.l = " << io::num(diagnostics.l) << '\n'
     << "diagnostics.probes = " << list(diagnostics.probes) << '\n'
     << "diagnostics.tol_sym = " << io::num(diagnostics.tol_sym) << '\n'
     << "diagnostics.tol_null = " << io::num(diagnostics.tol_null) << '\n'
     << "diagnostics.tol_psd = " << io::num(diagnostics.tol_psd) << '\n'
     << "diagnostics.tol_step = " << io::num(diagnostics.tol_step) << '\n'
     << "diagnostics.tol_conserve = " << io::num(diagnostics.tol_conserve) << '\n'
     << "diagnostics.tol_conserve_rate = " << io::num(diagnostics.tol_conserve_rate) << '\n'
     << "diagnostics.tol_energy = " << io::num(diagnostics.tol_energy) << '\n'
     << "diagnostics.tol_energy_bound = " << io::num(diagnostics.tol_energy_bound) << '\n'
     << "io.out_dir = " << io.out_dir << '\n'
     << "io.cadence = " << io.cadence << '\n'
     << "io.cache = " << io.cache << '\n'
     << "io.dump_full = " << (io.dump_full ? "true" : "false") << '\n'
     << "io.jobs = " << io.jobs << '\n'
     << "io.max_entries = " << io.max_entries << '\n';
  return os.str();
}

std::uint64_t RunConfig::hash() const {
  Fnv1a h;
  h.text(serialize());
  return h.value();
}

kinetic::SolverConfig RunConfig::solver_config(double epsilon) const {
  kinetic::SolverConfig s;
  s.epsilon = epsilon;
  s.dt = solver.dt;
  s.t_end = solver.t_end;
  s.mode = solver.mode;
  s.splitting = solver.splitting;
  s.cadence = io.cadence;
  s.tol_conserve = diagnostics.tol_conserve;
  return s;
}

RunConfig parse(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end())
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    try {
      it->second(c, key, value);
    } catch (const ConfigError& e) {
      std::string msg = e.what();
      const std::string prefix = "ConfigError: ";
      if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
      throw ConfigError("line " + std::to_string(lineno) + ": " + msg);
    }
  }
  return c;
}

RunConfig load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace alab::config
