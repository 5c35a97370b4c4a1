#include "alab/diagnostics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "alab/acoustic_solver.hpp"
#include "alab/errors.hpp"
#include "alab/hydrodynamics.hpp"
#include "alab/io.hpp"

namespace alab::diagnostics {

using collision::Family;
using collision::KernelSpec;

WeightLaw weight_law(const KernelSpec& kernel) {
  if (kernel.family == Family::landau) return WeightLaw::landau;
  return kernel.gamma < 0.0 ? WeightLaw::soft : WeightLaw::hard;
}

std::string to_string(WeightLaw law) {
  switch (law) {
    case WeightLaw::hard: return "hard";
    case WeightLaw::soft: return "soft";
    case WeightLaw::landau: return "landau";
  }
  return "?";
}

double weight_exponent(const KernelSpec& kernel, double l, int beta_order) {
  switch (weight_law(kernel)) {
    case WeightLaw::hard: return l;
    case WeightLaw::soft: return (l - beta_order) * std::abs(kernel.gamma);
    case WeightLaw::landau: return l - beta_order;
  }
  return l;
}

DissipationWeight DissipationWeight::from_operator(const collision::AssembledL& op) {
  DissipationWeight w;
  w.family = op.kernel.family;
  w.nu = op.nu;
  if (w.family == Family::landau) w.sigma_form = op.sigma_form;
  return w;
}

DissipationWeight DissipationWeight::from_kernel(const velocity::VelocityGrid& grid,
                                                 const KernelSpec& kernel) {
  kernel.validate();
  DissipationWeight w;
  w.family = kernel.family;
  if (kernel.family == Family::landau) {
    collision::LandauForm lf = collision::landau_form(grid);
    w.nu = std::move(lf.weight);
    w.sigma_form = std::move(lf.form);
  } else {
    w.nu = collision::grid_collision_frequency(grid, kernel.gamma);
  }
  return w;
}

namespace {

// sum over alpha in N^dim with |alpha| <= M of prod_i x_i^alpha_i.
double spatial_factor(const std::array<double, 3>& k, int dim, int M) {
  if (M < 0) return 0.0;
  // poly[m] = sum over multi-indices of total order exactly m.
  std::vector<double> poly(static_cast<std::size_t>(M) + 1, 0.0);
  poly[0] = 1.0;
  for (int d = 0; d < dim; ++d) {
    const double x = k[d] * k[d];
    std::vector<double> next(poly.size(), 0.0);
    for (int m = 0; m <= M; ++m) {
      double p = 1.0;
      for (int a = 0; a + m <= M; ++a) {
        next[static_cast<std::size_t>(m + a)] += poly[static_cast<std::size_t>(m)] * p;
        p *= x;
      }
    }
    poly = std::move(next);
  }
  double s = 0.0;
  for (double p : poly) s += p;
  return s;
}

void check_order(const velocity::VelocityGrid& grid, int N) {
  if (N < 0) throw UnsupportedN("N must be nonnegative");
  for (int c : grid.counts())
    if (2 * N + 1 > c) {
      std::ostringstream os;
      os << "velocity derivatives of order " << N << " need at least " << 2 * N + 1
         << " nodes per axis, grid has " << c;
      throw UnsupportedN(os.str());
    }
}

std::vector<std::array<int, 3>> betas(int N) {
  std::vector<std::array<int, 3>> out;
  for (int order = 0; order <= N; ++order)
    for (int b0 = order; b0 >= 0; --b0)
      for (int b1 = order - b0; b1 >= 0; --b1) out.push_back({b0, b1, order - b0 - b1});
  return out;
}

Eigen::MatrixXcd velocity_derivative(const velocity::VelocityGrid& grid, Eigen::MatrixXcd F,
                                     const std::array<int, 3>& beta) {
  for (int axis = 0; axis < 3; ++axis)
    for (int r = 0; r < beta[axis]; ++r)
      for (Eigen::Index j = 0; j < F.cols(); ++j)
        F.col(j) = velocity::derivative(grid, Eigen::VectorXcd(F.col(j)), axis);
  return F;
}

struct Spectrum {
  std::vector<spectral::Mode> modes;
  Eigen::MatrixXcd coeffs;
  double inv_np2 = 0.0;
};

Spectrum spectrum(const PerturbationField& f, const Eigen::MatrixXd& values) {
  Spectrum s;
  s.modes = spectral::modes(f.space);
  const spectral::RealFft fft(f.space, static_cast<int>(values.rows()));
  s.coeffs = fft.forward(values);
  const double np = static_cast<double>(f.space.points());
  s.inv_np2 = 1.0 / (np * np);
  return s;
}

// sum_j mult_j S_M(k_j) |F_j|^2 with a per-node weight (plain or nu) or the
// sigma form.
template <class ColumnNorm>
double spectral_sum(const Spectrum& s, int dim, int M, const Eigen::MatrixXcd& F,
                    ColumnNorm&& norm) {
  if (M < 0) return 0.0;
  double total = 0.0;
  for (std::size_t j = 0; j < s.modes.size(); ++j) {
    const double fac = spatial_factor(s.modes[j].k, dim, M);
    total += s.modes[j].multiplicity * fac * norm(F.col(static_cast<Eigen::Index>(j)));
  }
  return total * s.inv_np2;
}

Eigen::VectorXd node_weights(const velocity::VelocityGrid& grid, double power) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(grid.size()));
  const velocity::WeightFn wf{2.0 * power};
  for (std::size_t k = 0; k < grid.size(); ++k) w[k] = grid.weight(k) * wf(grid.node(k));
  return w;
}

auto diagonal_norm(const Eigen::VectorXd& w) {
  return [&w](const Eigen::Ref<const Eigen::VectorXcd>& c) {
    return w.dot(c.cwiseAbs2());
  };
}

}  // namespace

EnergyTerms energy_terms(const PerturbationField& f, int N, double l, const KernelSpec& kernel) {
  const auto& grid = *f.vgrid;
  check_order(grid, N);
  const int dim = f.space.dim;
  const Spectrum s = spectrum(f, f.values);
  EnergyTerms out;
  const Eigen::VectorXd plain = node_weights(grid, 0.0);
  out.alpha_sum = spectral_sum(s, dim, N + 1, s.coeffs, diagonal_norm(plain));
  for (const auto& beta : betas(N)) {
    const int order = beta[0] + beta[1] + beta[2];
    BetaTerm t;
    t.beta = beta;
    t.exponent = weight_exponent(kernel, l, order);
    const Eigen::VectorXd w = node_weights(grid, t.exponent);
    const Eigen::MatrixXcd D = velocity_derivative(grid, s.coeffs, beta);
    t.value = spectral_sum(s, dim, N - order, D, diagonal_norm(w));
    out.weighted_sum += t.value;
    out.weighted.push_back(t);
  }
  return out;
}

DissipationTerms dissipation_terms(const PerturbationField& f, double epsilon, int N, double l,
                                   const KernelSpec& kernel, const DissipationWeight& weight) {
  const auto& grid = *f.vgrid;
  check_order(grid, N);
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  const auto nv = static_cast<Eigen::Index>(grid.size());
  if (weight.nu.size() != nv) throw GridMismatch("dissipation weight does not match the grid");
  const int dim = f.space.dim;
  const velocity::InvariantBasis basis(f.vgrid);
  const Spectrum s = spectrum(f, f.values);
  const Eigen::MatrixXcd pf = basis.project(s.coeffs);
  const Eigen::MatrixXcd micro = s.coeffs - pf;

  DissipationTerms out;
  out.epsilon = epsilon;
  const Eigen::VectorXd plain = node_weights(grid, 0.0);
  out.macro = spectral_sum(s, dim, N + 1, pf, diagonal_norm(plain));

  const bool landau = weight.family == Family::landau;
  Eigen::VectorXd wnu(nv);
  for (Eigen::Index k = 0; k < nv; ++k) wnu[k] = grid.weight(static_cast<std::size_t>(k)) * weight.nu[k];
  auto micro_norm = [&](const Eigen::Ref<const Eigen::VectorXcd>& c) {
    if (!landau) return wnu.dot(c.cwiseAbs2());
    const Eigen::VectorXd re = c.real(), im = c.imag();
    return re.dot(weight.sigma_form * re) + im.dot(weight.sigma_form * im);
  };
  out.micro = spectral_sum(s, dim, N + 1, micro, micro_norm);
  for (const auto& beta : betas(N)) {
    const int order = beta[0] + beta[1] + beta[2];
    BetaTerm t;
    t.beta = beta;
    t.exponent = weight_exponent(kernel, l, order);
    Eigen::MatrixXcd D = velocity_derivative(grid, micro, beta);
    const velocity::WeightFn wf{t.exponent};
    for (Eigen::Index k = 0; k < nv; ++k) D.row(k) *= wf(grid.node(static_cast<std::size_t>(k)));
    t.value = spectral_sum(s, dim, N - order, D, micro_norm);
    out.weighted_micro += t.value;
    out.weighted.push_back(t);
  }
  return out;
}

double instant_energy(const PerturbationField& f, int N, double l, const KernelSpec& kernel) {
  return energy_terms(f, N, l, kernel).total();
}

double dissipation_rate(const PerturbationField& f, double epsilon, int N, double l,
                        const KernelSpec& kernel, const DissipationWeight& weight) {
  return dissipation_terms(f, epsilon, N, l, kernel, weight).total();
}

double dissipation_rate(const PerturbationField& f, double epsilon, int N, double l,
                        const KernelSpec& kernel) {
  return dissipation_rate(f, epsilon, N, l, kernel,
                          DissipationWeight::from_kernel(*f.vgrid, kernel));
}

MonitorResult energy_monitor(const kinetic::RunResult& run, const KernelSpec& kernel,
                             const DissipationWeight& weight, const MonitorConfig& cfg) {
  if (run.snapshots.size() != run.samples.size())
    throw ConfigError("energy_monitor needs a run recorded with keep_snapshots");
  MonitorResult out;
  const std::size_t n = run.samples.size();
  out.series.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = run.samples[i];
    const auto& f = run.snapshots[i];
    EnergyReport& r = out.series[i];
    r.t = s.t;
    r.E = instant_energy(f, cfg.N, cfg.l, kernel);
    r.D = dissipation_rate(f, f.epsilon, cfg.N, cfg.l, kernel, weight);
    r.l2 = s.l2;
    r.micro_nu = s.micro_nu;
    r.drift = s.drift;
    r.positivity_min = s.positivity_min;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double dEdt = 0.0;
    if (n > 1) {
      const std::size_t a = i == 0 ? 0 : i - 1;
      const std::size_t b = i + 1 == n ? n - 1 : i + 1;
      dEdt = (out.series[b].E - out.series[a].E) / (out.series[b].t - out.series[a].t);
    }
    out.series[i].dEdt_plus_D = dEdt + out.series[i].D;
  }
  const double e0 = n ? out.series[0].E : 0.0;
  double sup = 0.0;
  for (const auto& r : out.series) {
    sup = std::max(sup, r.E);
    if (r.dEdt_plus_D > cfg.tol_energy * e0) ++out.sign_violations;
  }
  out.sup_ratio = e0 > 0.0 ? sup / e0 : 0.0;
  out.bounded = e0 > 0.0 ? out.sup_ratio <= 1.0 + cfg.tol_energy_bound : sup == 0.0;
  return out;
}

bool SweepResult::monotone() const {
  for (std::size_t e = 1; e < errors.size(); ++e)
    for (std::size_t p = 0; p < probes.size(); ++p)
      if (!(errors[e][p].total < errors[e - 1][p].total)) return false;
  return true;
}

bool SweepResult::micro_monotone() const {
  auto sup = [&](std::size_t e) {
    double m = 0.0;
    for (const auto& pe : errors[e]) m = std::max(m, pe.micro);
    return m;
  };
  for (std::size_t e = 1; e < errors.size(); ++e)
    if (!(sup(e) < sup(e - 1))) return false;
  return true;
}

double fitted_order(const std::vector<double>& eps, const std::vector<double>& err) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < eps.size() && i < err.size(); ++i)
    if (eps[i] > 0.0 && err[i] > 0.0) {
      x.push_back(std::log(eps[i]));
      y.push_back(std::log(err[i]));
    }
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / den;
}

namespace {

double torus_rms(const Eigen::Ref<const Eigen::MatrixXd>& rows) {
  return std::sqrt(rows.squaredNorm() / static_cast<double>(rows.cols()));
}

}  // namespace

SweepResult convergence_sweep(const std::vector<double>& epsilons,
                              const kinetic::SolverConfig& base_cfg, const HydroState& f0_hydro,
                              const std::vector<double>& t_probe,
                              const collision::AssembledL& opL,
                              const collision::GammaOperator* gamma, const SweepOptions& opts) {
  if (epsilons.empty()) throw ConfigError("epsilon list is empty");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0 && epsilons[i] <= 0.25))
      throw ConfigError("sweep epsilons must lie in (0, 1/4]");
    if (i && !(epsilons[i] < epsilons[i - 1]))
      throw ConfigError("sweep epsilons must be strictly decreasing");
  }
  if (t_probe.empty()) throw ConfigError("probe time list is empty");
  std::vector<std::size_t> probe_steps;
  for (double t : t_probe) {
    const double r = t / base_cfg.dt;
    if (!(t > 0.0) || std::abs(r - std::round(r)) > 1e-9 * std::max(1.0, r))
      throw ConfigError("probe times must be positive multiples of dt");
    probe_steps.push_back(static_cast<std::size_t>(std::llround(r)));
  }
  for (std::size_t i = 1; i < probe_steps.size(); ++i)
    if (probe_steps[i] <= probe_steps[i - 1]) throw ConfigError("probe times must increase");

  SweepResult out;
  out.epsilons = epsilons;
  out.probes = t_probe;
  out.errors.assign(epsilons.size(), std::vector<ProbeError>(t_probe.size()));

  // Exact acoustic reference at every probe time, shared by all runs.
  const acoustic::AcousticState a0 = acoustic::from_hydro(f0_hydro);
  std::vector<HydroState> reference;
  for (double t : t_probe) reference.push_back(acoustic::to_hydro(acoustic::propagate(a0, t)));
  const velocity::InvariantBasis basis(opL.grid);

  auto run_one = [&](std::size_t e) {
    kinetic::SolverConfig cfg = base_cfg;
    cfg.epsilon = epsilons[e];
    cfg.t_end = t_probe.back();
    cfg.cadence = 1;
    const PerturbationField f0 = kinetic::well_prepared_data(f0_hydro, opL.grid, cfg.epsilon);
    kinetic::RunOptions ro;
    ro.keep_snapshots = false;
    ro.observer = [&](const kinetic::StepSample& s, const PerturbationField& f) {
      const auto it = std::find(probe_steps.begin(), probe_steps.end(), s.step);
      if (it == probe_steps.end()) return;
      const std::size_t p = static_cast<std::size_t>(it - probe_steps.begin());
      const Eigen::MatrixXd fields = basis.coefficients(f.values);
      const Eigen::MatrixXd diff = fields - reference[p].fields;
      ProbeError& pe = out.errors[e][p];
      pe.rho = torus_rms(diff.row(0));
      pe.u = torus_rms(diff.middleRows(1, 3));
      pe.theta = torus_rms(diff.row(4));
      pe.total = torus_rms(diff);
      const Eigen::MatrixXd m = basis.complement(f.values);
      double acc = 0.0;
      for (Eigen::Index k = 0; k < m.rows(); ++k)
        acc += opL.grid->weight(static_cast<std::size_t>(k)) * m.row(k).squaredNorm();
      pe.micro = std::sqrt(acc / static_cast<double>(m.cols()));
    };
    kinetic::run_simulation(cfg, f0, opL, gamma, ro);
  };

  const int jobs = std::max(1, std::min<int>(opts.jobs, static_cast<int>(epsilons.size())));
  if (jobs == 1) {
    for (std::size_t e = 0; e < epsilons.size(); ++e) run_one(e);
  } else {
    std::mutex err_mutex;
    std::exception_ptr first_error;
    std::atomic<std::size_t> next{0};
    {
      std::vector<std::jthread> pool;
      for (int j = 0; j < jobs; ++j)
        pool.emplace_back([&] {
          for (std::size_t e = next++; e < epsilons.size(); e = next++) {
            try {
              run_one(e);
            } catch (...) {
              std::lock_guard<std::mutex> lock(err_mutex);
              if (!first_error) first_error = std::current_exception();
            }
          }
        });
    }
    if (first_error) std::rethrow_exception(first_error);
  }

  std::vector<double> agg(epsilons.size(), 0.0);
  for (std::size_t e = 0; e < epsilons.size(); ++e) {
    double s = 0.0;
    for (const auto& pe : out.errors[e]) s += pe.total * pe.total;
    agg[e] = std::sqrt(s);
  }
  out.fitted_order = fitted_order(epsilons, agg);
  if (epsilons.size() < 2) out.warnings.push_back("single epsilon: no fitted order");
  else if (std::isnan(out.fitted_order)) out.warnings.push_back("errors vanish: no fitted order");
  return out;
}

void write_energy_csv(std::ostream& out, const std::vector<EnergyReport>& series) {
  out << "t,E,D,dEdt_plus_D,l2,micro_nu,drift_mass,drift_mom1,drift_mom2,drift_mom3,"
         "drift_energy,pos_min\n";
  for (const auto& r : series) {
    out << io::num(r.t) << ',' << io::num(r.E) << ',' << io::num(r.D) << ','
        << io::num(r.dEdt_plus_D) << ',' << io::num(r.l2) << ',' << io::num(r.micro_nu);
    for (int i = 0; i < 5; ++i) out << ',' << io::num(r.drift[i]);
    out << ',' << io::num(r.positivity_min) << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const SweepResult& r) {
  out << "epsilon,t_probe,err_rho,err_u,err_theta,err_total\n";
  for (std::size_t e = 0; e < r.epsilons.size(); ++e)
    for (std::size_t p = 0; p < r.probes.size(); ++p) {
      const auto& pe = r.errors[e][p];
      out << io::num(r.epsilons[e]) << ',' << io::num(r.probes[p]) << ',' << io::num(pe.rho) << ','
          << io::num(pe.u) << ',' << io::num(pe.theta) << ',' << io::num(pe.total) << '\n';
    }
  out << "# fitted_order," << io::num(r.fitted_order) << '\n';
}

}  // namespace alab::diagnostics
