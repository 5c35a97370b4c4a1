#include "alab/commands.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "alab/acoustic_solver.hpp"
#include "alab/diagnostics.hpp"
#include "alab/errors.hpp"
#include "alab/hashing.hpp"
#include "alab/hydrodynamics.hpp"
#include "alab/io.hpp"
#include "alab/kinetic_solver.hpp"

namespace alab::cli {

namespace fs = std::filesystem;
using config::RunConfig;

namespace {

std::string out_dir(const RunConfig& cfg, const CommandOptions& opts) {
  const std::string d = opts.out_dir.empty() ? cfg.io.out_dir : opts.out_dir;
  fs::create_directories(d);
  return d;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw FormatError("cannot write " + path);
  return f;
}

GridPtr make_grid(const RunConfig& cfg) {
  velocity::GridOptions go;
  go.tol_moment = cfg.grid.tol_moment;
  return velocity::build_grid(cfg.grid.v_max, cfg.grid.counts, cfg.grid.rule, go);
}

collision::AssembledL acquire_operator(const RunConfig& cfg, const GridPtr& grid,
                                       std::ostream& log) {
  collision::AssemblyOptions ao;
  ao.tol_null = cfg.diagnostics.tol_null;
  ao.max_entries = cfg.io.max_entries;
  ao.cache_path = cache_path(cfg, grid->hash());
  const auto t0 = std::chrono::steady_clock::now();
  collision::AssembledL op = collision::assemble_L(grid, cfg.kernel, ao);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (op.from_cache) {
    log << "assembly skipped (cache hit: " << ao.cache_path << ")\n";
  } else {
    log << "assembled L (" << grid->size() << " x " << grid->size() << ") in " << std::fixed
        << std::setprecision(1) << secs << " s" << std::defaultfloat << std::setprecision(6)
        << '\n';
  }
  return op;
}

std::string provenance(const RunConfig& cfg) { return "# config " + hex_hash(cfg.hash()) + "\n"; }

void write_manifest(const std::string& path, const RunConfig& cfg, const GridPtr& grid,
                    const collision::AssembledL* op, const std::string& command,
                    const nlohmann::json& extra) {
  nlohmann::json j;
  j["command"] = command;
  j["config_hash"] = hex_hash(cfg.hash());
  j["velocity_grid_hash"] = hex_hash(grid->hash());
  j["kernel_hash"] = hex_hash(cfg.kernel.hash());
  j["kernel"] = cfg.kernel.tag();
  if (op) j["operator_hash"] = hex_hash(op->hash());
  j["spatial_grid"] = {{"dim", cfg.grid.space.dim}, {"n", cfg.grid.space.n}};
  const auto& d = cfg.diagnostics;
  j["tolerances"] = {{"tol_moment", cfg.grid.tol_moment}, {"tol_sym", d.tol_sym},
                     {"tol_null", d.tol_null},           {"tol_psd", d.tol_psd},
                     {"tol_step", d.tol_step},           {"tol_conserve", d.tol_conserve},
                     {"tol_conserve_rate", d.tol_conserve_rate},
                     {"tol_energy", d.tol_energy},       {"tol_energy_bound", d.tol_energy_bound}};
  j["results"] = extra;
  j["config"] = cfg.serialize();
  std::ofstream f = open_out(path);
  f << std::setw(2) << j << '\n';
}

struct CheckLine {
  bool pass = false;
  std::string detail;
};

void report(std::ostream& out, const std::string& name, const CheckLine& c, int& failures) {
  out << (c.pass ? "PASS " : "FAIL ") << name << "  " << c.detail << '\n';
  if (!c.pass) ++failures;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(4) << x;
  return os.str();
}

}  // namespace

std::string cache_path(const RunConfig& cfg, std::uint64_t grid_hash) {
  std::string p = cfg.io.cache;
  if (const char* env = std::getenv("ACOUSTIC_LAB_CACHE"); env && *env) p = env;
  if (p.empty()) return p;
  if (fs::is_directory(p) || p.back() == '/') {
    fs::create_directories(p);
    return (fs::path(p) / ("L_" + hex_hash(grid_hash) + "_" + hex_hash(cfg.kernel.hash()) + ".bin"))
        .string();
  }
  return p;
}

int cmd_assemble(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
  cfg.validate();
  cfg.kernel.validate();
  const GridPtr grid = make_grid(cfg);
  const collision::AssembledL op = acquire_operator(cfg, grid, out);
  const collision::StructureReport sr = collision::structure_report(op, true);
  int failures = 0;
  out << "kernel " << cfg.kernel.tag() << "  n_v " << grid->size() << "  config "
      << hex_hash(cfg.hash()) << '\n';
  report(out, "symmetry", {sr.symmetry_defect <= cfg.diagnostics.tol_sym,
                           "defect " + fmt(sr.symmetry_defect)}, failures);
  report(out, "nullspace", {sr.null_residual <= cfg.diagnostics.tol_null,
                            "residual " + fmt(sr.null_residual)}, failures);
  report(out, "psd", {sr.min_eigenvalue >= -cfg.diagnostics.tol_psd,
                      "min eigenvalue " + fmt(sr.min_eigenvalue)}, failures);
  double delta = 0.0;
  try {
    delta = collision::coercivity_delta(op).delta;
    report(out, "coercivity", {true, "delta " + fmt(delta)}, failures);
  } catch (const NonpositiveGap& e) {
    report(out, "coercivity", {false, e.what()}, failures);
  }
  const std::string dir = out_dir(cfg, opts);
  write_manifest(dir + "/manifest.json", cfg, grid, &op, "assemble",
                 {{"symmetry_defect", sr.symmetry_defect},
                  {"null_residual", sr.null_residual},
                  {"min_eigenvalue", sr.min_eigenvalue},
                  {"delta", delta},
                  {"from_cache", op.from_cache}});
  return failures ? 1 : 0;
}

int cmd_simulate(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
  cfg.validate();
  cfg.kernel.validate();
  const GridPtr grid = make_grid(cfg);
  const collision::AssembledL op = acquire_operator(cfg, grid, out);
  std::unique_ptr<collision::GammaOperator> gamma;
  if (cfg.solver.mode == kinetic::Mode::nonlinear) {
    gamma = std::make_unique<collision::GammaOperator>(grid, cfg.kernel);
    out << "nonlinear mode: Gamma evaluated at " << cfg.grid.space.points()
        << " spatial points per step (quadrature cost O(n_v^2 x angles) each)\n";
  }
  const kinetic::SolverConfig sc = cfg.solver_config(cfg.solver.epsilon);
  const HydroState h0 = acoustic::sound_wave(cfg.grid.space, cfg.solver.amplitude,
                                             cfg.solver.wave_number, cfg.solver.direction);
  const PerturbationField f0 = kinetic::well_prepared_data(h0, grid, sc.epsilon);

  const std::string dir = out_dir(cfg, opts);
  kinetic::RunOptions ro;
  ro.keep_snapshots = true;
  ro.observer = [&](const kinetic::StepSample& s, const PerturbationField& f) {
    std::ostringstream name;
    name << dir << "/hydro_" << std::setw(6) << std::setfill('0') << s.step << ".csv";
    std::ofstream hf = open_out(name.str());
    hf << provenance(cfg);
    hydro::write_hydro_csv(hf, hydro::project_P(f).fields);
    if (cfg.io.dump_full) {
      std::ostringstream bn;
      bn << dir << "/f_" << std::setw(6) << std::setfill('0') << s.step << ".bin";
      std::ofstream bf(bn.str(), std::ios::binary);
      kinetic::write_field_dump(bf, f, s.t);
    }
  };
  const kinetic::RunResult run = kinetic::run_simulation(sc, f0, op, gamma.get(), ro);

  diagnostics::MonitorConfig mc;
  mc.N = cfg.diagnostics.N;
  mc.l = cfg.diagnostics.l;
  mc.tol_energy = cfg.diagnostics.tol_energy;
  mc.tol_energy_bound = cfg.diagnostics.tol_energy_bound;
  const auto weight = diagnostics::DissipationWeight::from_operator(op);
  const diagnostics::MonitorResult mon = diagnostics::energy_monitor(run, cfg.kernel, weight, mc);
  {
    std::ofstream ef = open_out(dir + "/energy.csv");
    ef << provenance(cfg);
    diagnostics::write_energy_csv(ef, mon.series);
  }

  int failures = 0;
  double worst_growth = 0.0, worst_drift_rate = 0.0;
  for (std::size_t i = 1; i < run.samples.size(); ++i) {
    worst_growth = std::max(worst_growth, run.samples[i].l2 - run.samples[i - 1].l2);
    const double t = run.samples[i].t;
    worst_drift_rate = std::max(worst_drift_rate, run.samples[i].drift.cwiseAbs().maxCoeff() / t);
  }
  out << "samples " << run.samples.size() << "  config " << hex_hash(cfg.hash()) << '\n';
  report(out, "invariant_drift", {worst_drift_rate <= cfg.diagnostics.tol_conserve_rate,
                                  "max drift per unit time " + fmt(worst_drift_rate)}, failures);
  if (cfg.solver.mode == kinetic::Mode::linearized) {
    report(out, "l2_monotone", {worst_growth <= cfg.diagnostics.tol_step,
                                "max l2 increase " + fmt(worst_growth)}, failures);
  } else {
    report(out, "energy_bound", {mon.bounded, "sup E / E(0) " + fmt(mon.sup_ratio)}, failures);
    if (run.positivity_violations)
      out << "warning: positivity screening flagged " << run.positivity_violations
          << " samples\n";
  }
  write_manifest(dir + "/manifest.json", cfg, grid, &op, "simulate",
                 {{"samples", run.samples.size()},
                  {"max_l2_increase", worst_growth},
                  {"max_drift_rate", worst_drift_rate},
                  {"sup_energy_ratio", mon.sup_ratio},
                  {"positivity_violations", run.positivity_violations}});
  return failures ? 1 : 0;
}

int cmd_sweep(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
  cfg.validate();
  cfg.kernel.validate();
  const GridPtr grid = make_grid(cfg);
  const collision::AssembledL op = acquire_operator(cfg, grid, out);
  std::unique_ptr<collision::GammaOperator> gamma;
  if (cfg.solver.mode == kinetic::Mode::nonlinear)
    gamma = std::make_unique<collision::GammaOperator>(grid, cfg.kernel);
  const HydroState h0 = acoustic::sound_wave(cfg.grid.space, cfg.solver.amplitude,
                                             cfg.solver.wave_number, cfg.solver.direction);
  diagnostics::SweepOptions so;
  so.jobs = opts.jobs > 0 ? opts.jobs : cfg.io.jobs;
  const diagnostics::SweepResult r =
      diagnostics::convergence_sweep(cfg.solver.epsilons, cfg.solver_config(cfg.solver.epsilons[0]),
                                     h0, cfg.diagnostics.probes, op, gamma.get(), so);
  const std::string dir = out_dir(cfg, opts);
  {
    std::ofstream sf = open_out(dir + "/sweep.csv");
    sf << provenance(cfg);
    diagnostics::write_sweep_csv(sf, r);
  }
  for (const auto& w : r.warnings) out << "warning: " << w << '\n';
  int failures = 0;
  out << "fitted_order " << io::num(r.fitted_order) << "  config " << hex_hash(cfg.hash())
      << '\n';
  if (r.epsilons.size() > 1 && cfg.solver.amplitude != 0.0) {
    report(out, "error_monotone", {r.monotone(), "probe errors decrease as epsilon halves"},
           failures);
    report(out, "micro_monotone", {r.micro_monotone(), "sup |(I-P) f| decreases"}, failures);
  }
  write_manifest(dir + "/manifest.json", cfg, grid, &op, "sweep",
                 {{"fitted_order", std::isnan(r.fitted_order) ? nlohmann::json(nullptr)
                                                              : nlohmann::json(r.fitted_order)},
                  {"monotone", r.monotone()}});
  return failures ? 1 : 0;
}

int cmd_acoustic(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
  cfg.validate();
  const HydroState h0 = acoustic::sound_wave(cfg.grid.space, cfg.solver.amplitude,
                                             cfg.solver.wave_number, cfg.solver.direction);
  const acoustic::AcousticState a0 = acoustic::from_hydro(h0);
  const acoustic::AcousticState a1 = acoustic::propagate(a0, cfg.solver.t_end);
  const std::string dir = out_dir(cfg, opts);
  {
    std::ofstream cf = open_out(dir + "/acoustic_coeffs.csv");
    cf << provenance(cfg);
    acoustic::write_coefficients_csv(cf, a1);
  }
  {
    std::ofstream hf = open_out(dir + "/acoustic_hydro.csv");
    hf << provenance(cfg);
    hydro::write_hydro_csv(hf, acoustic::to_hydro(a1));
  }
  int failures = 0;
  for (int s = 0; s <= 2; ++s) {
    const double e0 = acoustic::acoustic_energy(a0, s);
    const double e1 = acoustic::acoustic_energy(a1, s);
    const double drift = e0 > 0.0 ? std::abs(e1 - e0) / e0 : std::abs(e1);
    report(out, "energy_H" + std::to_string(s), {drift <= 1e-10, "relative drift " + fmt(drift)},
           failures);
  }
  return failures ? 1 : 0;
}

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names = {"grid_moments", "l_nullspace",
                                                 "gamma_orthogonality", "p_idempotence",
                                                 "acoustic_energy"};
  return names;
}

int cmd_check(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
  if (opts.list) {
    for (const auto& n : check_names()) out << n << '\n';
    return 0;
  }
  cfg.validate();
  cfg.kernel.validate();
  int failures = 0;
  GridPtr grid;
  try {
    grid = make_grid(cfg);
    const auto r = grid->residuals();
    report(out, "grid_moments", {true, "mass " + fmt(r.mass) + " momentum " + fmt(r.momentum) +
                                           " energy " + fmt(r.energy)}, failures);
  } catch (const MomentResidualTooLarge& e) {
    report(out, "grid_moments", {false, e.what()}, failures);
    out << "skipping checks that need a valid velocity grid\n";
    return 1;
  }

  try {
    const collision::AssembledL op = acquire_operator(cfg, grid, out);
    const double res = collision::structure_report(op, false).null_residual;
    report(out, "l_nullspace", {res <= cfg.diagnostics.tol_null, "residual " + fmt(res)},
           failures);
  } catch (const NullspaceDefect& e) {
    report(out, "l_nullspace", {false, e.what()}, failures);
  }

  const velocity::InvariantBasis basis(grid);
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> gauss;
  const auto n = static_cast<Eigen::Index>(grid->size());
  auto random_block = [&](Eigen::Index m) {
    Eigen::MatrixXd r(n, m);
    for (Eigen::Index j = 0; j < m; ++j)
      for (Eigen::Index k = 0; k < n; ++k)
        r(k, j) = gauss(rng) * velocity::sqrt_maxwellian(grid->node(static_cast<std::size_t>(k)));
    return r;
  };

  if (cfg.kernel.family == collision::Family::boltzmann) {
    const collision::GammaOperator gamma(grid, cfg.kernel);
    const Eigen::MatrixXd f = random_block(2), g = random_block(2);
    const Eigen::MatrixXd G = gamma(f, g);
    const double scale = std::sqrt(velocity::weighted_inner(*grid, G.col(0), G.col(0)));
    const double worst = basis.moments(G).cwiseAbs().maxCoeff() / scale;
    report(out, "gamma_orthogonality", {worst <= cfg.diagnostics.tol_null,
                                        "relative moment " + fmt(worst)}, failures);
  } else {
    report(out, "gamma_orthogonality", {true, "skipped (no Gamma for the landau family)"},
           failures);
  }

  {
    const Eigen::MatrixXd f = random_block(4);
    const Eigen::MatrixXd pf = basis.project(f);
    const double defect = (basis.project(pf) - pf).cwiseAbs().maxCoeff();
    report(out, "p_idempotence", {defect <= cfg.diagnostics.tol_null, "defect " + fmt(defect)},
           failures);
  }

  {
    acoustic::AcousticState a = acoustic::from_hydro(
        acoustic::sound_wave(cfg.grid.space, 1.0, cfg.solver.wave_number, cfg.solver.direction));
    a.coeffs.row(0) += Eigen::RowVectorXcd::Constant(a.coeffs.cols(), {0.25, -0.5});
    a.coeffs.col(0).setZero();
    double worst = 0.0;
    for (double t : {0.1, 1.0, 10.0})
      for (int s = 0; s <= 2; ++s) {
        const double e0 = acoustic::acoustic_energy(a, s);
        const double e1 = acoustic::acoustic_energy(acoustic::propagate(a, t), s);
        worst = std::max(worst, std::abs(e1 - e0) / e0);
      }
    report(out, "acoustic_energy", {worst <= 1e-10, "relative drift " + fmt(worst)}, failures);
  }
  out << (failures ? "FAILED " : "OK ") << failures << " failing checks  config "
      << hex_hash(cfg.hash()) << '\n';
  return failures ? 1 : 0;
}

}  // namespace alab::cli
