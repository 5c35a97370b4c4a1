#include "alab/kinetic_solver.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "alab/errors.hpp"
#include "alab/hydrodynamics.hpp"
#include "alab/io.hpp"

namespace alab::kinetic {

std::string to_string(Mode m) { return m == Mode::linearized ? "linearized" : "nonlinear"; }
std::string to_string(Splitting s) { return s == Splitting::lie ? "lie" : "strang"; }

Mode parse_mode(const std::string& s) {
  if (s == "linearized" || s == "linear") return Mode::linearized;
  if (s == "nonlinear") return Mode::nonlinear;
  throw ConfigError("unknown solver mode '" + s + "'");
}

Splitting parse_splitting(const std::string& s) {
  if (s == "lie") return Splitting::lie;
  if (s == "strang") return Splitting::strang;
  throw ConfigError("unknown splitting '" + s + "'");
}

void SolverConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon <= 0.25)) throw ConfigError("epsilon must lie in (0, 1/4]");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(t_end >= 0.0)) throw ConfigError("t_end must be nonnegative");
  if (cadence < 1) throw ConfigError("cadence must be >= 1");
  if (!(tol_conserve > 0.0)) throw ConfigError("tol_conserve must be positive");
  const double ratio = t_end / dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
    throw ConfigError("t_end must be an integer multiple of dt");
}

std::size_t SolverConfig::steps() const { return static_cast<std::size_t>(std::llround(t_end / dt)); }

struct ImexStepper::Impl {
  SolverConfig cfg;
  const collision::AssembledL* op = nullptr;
  const collision::GammaOperator* gamma = nullptr;
  SpatialGrid space;
  std::unique_ptr<spectral::RealFft> fft;
  std::vector<spectral::Mode> modes;
  Eigen::VectorXd sw;       // sqrt of the quadrature weights
  bool uniform = true;
  Eigen::MatrixXd factor;   // Cholesky factor (lower) of I + c S
  Eigen::MatrixXd sym;      // S, kept for the Crank-Nicolson right-hand side
  double c = 0.0;
  std::map<double, Eigen::MatrixXcd> phases;

  const Eigen::MatrixXcd& phase(double t) {
    auto it = phases.find(t);
    if (it != phases.end()) return it->second;
    const auto& grid = *op->grid;
    const auto nv = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXcd ph(nv, static_cast<Eigen::Index>(modes.size()));
    for (std::size_t j = 0; j < modes.size(); ++j) {
      std::array<double, 3> k = modes[j].k;
      for (int d = 0; d < 3; ++d)
        if (2 * modes[j].index[d] == space.n) k[d] = 0.0;
      for (Eigen::Index r = 0; r < nv; ++r) {
        const auto& v = grid.node(static_cast<std::size_t>(r));
        const double kv = k[0] * v[0] + k[1] * v[1] + k[2] * v[2];
        ph(r, static_cast<Eigen::Index>(j)) = std::polar(1.0, -kv * t);
      }
    }
    return phases.emplace(t, std::move(ph)).first->second;
  }
};

ImexStepper::ImexStepper(const SolverConfig& cfg, const collision::AssembledL& opL,
                         const collision::GammaOperator* gamma, const SpatialGrid& space)
    : impl_(std::make_unique<Impl>()) {
  cfg.validate();
  if (cfg.mode == Mode::nonlinear && gamma == nullptr)
    throw ConfigError("nonlinear mode needs a Gamma operator");
  if (gamma) velocity::require_same_grid(*gamma->grid(), *opL.grid);
  Impl& m = *impl_;
  m.cfg = cfg;
  m.op = &opL;
  m.gamma = gamma;
  m.space = space;
  const auto& grid = *opL.grid;
  const auto n = static_cast<Eigen::Index>(grid.size());
  m.fft = std::make_unique<spectral::RealFft>(space, static_cast<int>(n));
  m.modes = spectral::modes(space);
  m.uniform = grid.uniform_weights();
  m.sw.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) m.sw[k] = std::sqrt(grid.weight(static_cast<std::size_t>(k)));

  m.c = cfg.splitting == Splitting::lie ? cfg.dt / cfg.epsilon : 0.5 * cfg.dt / cfg.epsilon;
  m.sym = opL.symmetric_form();
  m.sym = 0.5 * (m.sym + m.sym.transpose()).eval();
  m.factor = m.c * m.sym;
  m.factor.diagonal().array() += 1.0;
  const lapack_int info = LAPACKE_dpotrf(LAPACK_COL_MAJOR, 'L', static_cast<lapack_int>(n),
                                         m.factor.data(), static_cast<lapack_int>(n));
  if (info != 0) {
    std::ostringstream os;
    os << "Cholesky factorization of I + c L failed (info " << info << ")";
    throw SolveFailure(os.str());
  }
  if (cfg.splitting == Splitting::lie) m.sym.resize(0, 0);
}

ImexStepper::~ImexStepper() = default;

Eigen::MatrixXd ImexStepper::transport(const Eigen::Ref<const Eigen::MatrixXd>& f,
                                       double t) const {
  Impl& m = *impl_;
  Eigen::MatrixXcd c = m.fft->forward(f);
  c.array() *= m.phase(t).array();
  return m.fft->inverse(c);
}

Eigen::MatrixXd ImexStepper::collision_solve(const Eigen::Ref<const Eigen::MatrixXd>& b) const {
  const Impl& m = *impl_;
  Eigen::MatrixXd x = b;
  if (!m.uniform) x = m.sw.asDiagonal() * x;
  const auto n = static_cast<lapack_int>(x.rows());
  const lapack_int info =
      LAPACKE_dpotrs(LAPACK_COL_MAJOR, 'L', n, static_cast<lapack_int>(x.cols()), m.factor.data(),
                     n, x.data(), n);
  if (info != 0) throw SolveFailure("triangular solve failed");
  if (!m.uniform) x = m.sw.cwiseInverse().asDiagonal() * x;
  return x;
}

PerturbationField ImexStepper::step(const PerturbationField& f) {
  Impl& m = *impl_;
  velocity::require_same_grid(*f.vgrid, *m.op->grid);
  require_same_space(f.space, m.space);
  const double dt = m.cfg.dt;
  auto add_gamma = [&](const Eigen::MatrixXd& g, Eigen::MatrixXd& rhs) {
    if (m.cfg.mode == Mode::nonlinear) rhs.noalias() += dt * m.gamma->quadratic(g);
  };

  PerturbationField out = f;
  if (m.cfg.mode == Mode::nonlinear) last_pos_min_ = positivity_min(f);
  if (m.cfg.splitting == Splitting::lie) {
    const Eigen::MatrixXd g = transport(f.values, dt);
    Eigen::MatrixXd rhs = g;
    add_gamma(g, rhs);
    out.values = collision_solve(rhs);
  } else {
    const Eigen::MatrixXd g = transport(f.values, 0.5 * dt);
    Eigen::MatrixXd rhs;
    if (m.uniform) {
      rhs = g - m.c * (m.sym * g);
    } else {
      const Eigen::MatrixXd y = m.sw.asDiagonal() * g;
      rhs = m.sw.cwiseInverse().asDiagonal() * (y - m.c * (m.sym * y));
    }
    add_gamma(g, rhs);
    out.values = transport(collision_solve(rhs), 0.5 * dt);
  }
  return out;
}

PerturbationField imex_step(const PerturbationField& f, const SolverConfig& cfg,
                            const collision::AssembledL& opL,
                            const collision::GammaOperator* gamma) {
  SolverConfig c = cfg;
  c.t_end = 0.0;
  ImexStepper stepper(c, opL, gamma, f.space);
  return stepper.step(f);
}

double positivity_min(const PerturbationField& f) {
  const auto& grid = *f.vgrid;
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double mu = velocity::maxwellian(grid.node(k));
    const double s = std::sqrt(mu);
    const double fmin = f.values.row(static_cast<Eigen::Index>(k)).minCoeff();
    lo = std::min(lo, mu + f.epsilon * s * fmin);
  }
  return lo;
}

double weighted_l2_norm(const PerturbationField& f, const Eigen::VectorXd& nu) {
  const auto& grid = *f.vgrid;
  double s = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double w = grid.weight(k) * (nu.size() ? nu[static_cast<Eigen::Index>(k)] : 1.0);
    s += w * f.values.row(static_cast<Eigen::Index>(k)).squaredNorm();
  }
  return std::sqrt(s / static_cast<double>(f.values.cols()));
}

double l2_norm(const PerturbationField& f) { return weighted_l2_norm(f, Eigen::VectorXd()); }

namespace {

StepSample make_sample(std::size_t step, double t, const PerturbationField& f,
                       const velocity::InvariantBasis& basis, const Eigen::VectorXd& nu,
                       const Eigen::Matrix<double, 5, 1>& inv0) {
  StepSample s;
  s.step = step;
  s.t = t;
  s.l2 = l2_norm(f);
  s.micro_nu = weighted_l2_norm(f.like(basis.complement(f.values)), nu);
  s.drift = hydro::global_conservation_residual(f) - inv0;
  s.positivity_min = positivity_min(f);
  return s;
}

}  // namespace

RunResult run_simulation(const SolverConfig& cfg, const PerturbationField& f0,
                         const collision::AssembledL& opL, const collision::GammaOperator* gamma,
                         const RunOptions& opts) {
  cfg.validate();
  velocity::require_same_grid(*f0.vgrid, *opL.grid);
  if (std::abs(f0.epsilon - cfg.epsilon) > 0.0)
    throw ConfigError("field epsilon differs from the solver epsilon");
  const Eigen::Matrix<double, 5, 1> inv0 = hydro::global_conservation_residual(f0);
  if (inv0.cwiseAbs().maxCoeff() > cfg.tol_conserve) {
    std::ostringstream os;
    os << "initial invariants " << inv0.transpose() << " exceed tol_conserve " << cfg.tol_conserve;
    throw InadmissibleInitialData(os.str());
  }
  if (cfg.mode == Mode::nonlinear && positivity_min(f0) < 0.0)
    throw InadmissibleInitialData("mu + eps sqrt(mu) f0 is negative at some node");

  const velocity::InvariantBasis basis(f0.vgrid);
  RunResult result;
  auto record = [&](std::size_t step, double t, const PerturbationField& f) {
    StepSample s = make_sample(step, t, f, basis, opL.nu, inv0);
    if (cfg.mode == Mode::nonlinear && s.positivity_min < -cfg.tol_pos) {
      if (result.positivity_violations == 0)
        std::clog << "PositivityWarning: mu + eps sqrt(mu) f = " << s.positivity_min
                  << " at t = " << t << '\n';
      ++result.positivity_violations;
    }
    if (opts.keep_snapshots) result.snapshots.push_back(f);
    if (opts.observer) opts.observer(s, f);
    result.samples.push_back(std::move(s));
  };

  record(0, 0.0, f0);
  const std::size_t nsteps = cfg.steps();
  if (nsteps == 0) return result;
  ImexStepper stepper(cfg, opL, gamma, f0.space);
  PerturbationField f = f0;
  for (std::size_t n = 1; n <= nsteps; ++n) {
    f = stepper.step(f);
    if (!f.values.allFinite()) {
      std::ostringstream os;
      os << "non-finite values after step " << n;
      throw SolveFailure(os.str());
    }
    if (n % static_cast<std::size_t>(cfg.cadence) == 0 || n == nsteps)
      record(n, static_cast<double>(n) * cfg.dt, f);
  }
  return result;
}

PerturbationField well_prepared_data(const HydroState& hydro, const GridPtr& grid,
                                     double epsilon) {
  const Eigen::VectorXd mean = hydro.fields.rowwise().mean();
  const double scale = std::max(1.0, hydro.fields.cwiseAbs().maxCoeff());
  if (mean.cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw InadmissibleInitialData("hydrodynamic fields must have zero spatial mean");
  return hydro::reconstruct(hydro, grid, epsilon);
}

namespace {
constexpr char kDumpMagic[8] = {'A', 'L', 'A', 'B', 'F', 'F', 'L', 'D'};
constexpr std::uint32_t kDumpVersion = 1;
}  // namespace

void write_field_dump(std::ostream& out, const PerturbationField& f, double t) {
  out.write(kDumpMagic, sizeof kDumpMagic);
  io::write_le(out, kDumpVersion);
  io::write_le(out, static_cast<std::uint64_t>(f.values.rows()));
  io::write_le(out, static_cast<std::uint64_t>(f.values.cols()));
  io::write_le(out, static_cast<std::uint32_t>(f.space.dim));
  io::write_le(out, static_cast<std::uint32_t>(f.space.n));
  io::write_le(out, f.epsilon);
  io::write_le(out, t);
  io::write_le(out, f.vgrid->hash());
  io::write_f64s(out, f.values.data(), static_cast<std::size_t>(f.values.size()));
  if (!out) throw FormatError("short write on field dump");
}

PerturbationField read_field_dump(std::istream& in, const GridPtr& grid, double* t) {
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kDumpMagic, sizeof magic) != 0)
    throw FormatError("not a field dump");
  if (io::read_le<std::uint32_t>(in) != kDumpVersion) throw FormatError("unsupported dump version");
  const auto rows = io::read_le<std::uint64_t>(in);
  const auto cols = io::read_le<std::uint64_t>(in);
  SpatialGrid space;
  space.dim = static_cast<int>(io::read_le<std::uint32_t>(in));
  space.n = static_cast<int>(io::read_le<std::uint32_t>(in));
  const double eps = io::read_le<double>(in);
  const double time = io::read_le<double>(in);
  const auto ghash = io::read_le<std::uint64_t>(in);
  if (!in) throw FormatError("truncated dump header");
  space.validate();
  if (ghash != grid->hash() || rows != grid->size() || cols != space.points())
    throw GridMismatch("field dump was written on a different grid");
  PerturbationField f(grid, space, eps);
  io::read_f64s(in, f.values.data(), static_cast<std::size_t>(f.values.size()));
  if (!in) throw FormatError("truncated dump payload");
  if (t) *t = time;
  return f;
}

}  // namespace alab::kinetic
