#pragma once

#include <Eigen/Dense>

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "alab/collision_ops.hpp"
#include "alab/field.hpp"
#include "alab/kinetic_solver.hpp"

namespace alab::diagnostics {

enum class WeightLaw { hard, soft, landau };

WeightLaw weight_law(const collision::KernelSpec& kernel);
std::string to_string(WeightLaw law);

/// Exponent of w(v) on the |beta|-th velocity-derivative terms:
/// hard l, soft (l - |beta|)|gamma|, Landau l - |beta|.
double weight_exponent(const collision::KernelSpec& kernel, double l, int beta_order);

/// The norm used on microscopic terms of the dissipation rate: nu-weighted
/// for Boltzmann kernels, the sigma quadratic form for Landau.
struct DissipationWeight {
  collision::Family family = collision::Family::boltzmann;
  Eigen::VectorXd nu;
  Eigen::MatrixXd sigma_form;

  static DissipationWeight from_operator(const collision::AssembledL& op);
  /// Computes nu (or the sigma form) directly; no operator assembly.
  static DissipationWeight from_kernel(const velocity::VelocityGrid& grid,
                                       const collision::KernelSpec& kernel);
};

struct BetaTerm {
  std::array<int, 3> beta{};
  double exponent = 0.0;
  double value = 0.0;
};

/// Explicit-norm pieces of the instant energy and dissipation rate.
struct EnergyTerms {
  double alpha_sum = 0.0;           // sum_{|a| <= N+1} |d_a f|^2
  double weighted_sum = 0.0;        // sum_{|a|+|b| <= N} |w^p d^b_a f|^2
  std::vector<BetaTerm> weighted;   // weighted_sum split by beta
  double total() const { return alpha_sum + weighted_sum; }
};

struct DissipationTerms {
  double macro = 0.0;           // sum_{|a| <= N+1} |d_a P f|^2 (before the eps factor)
  double micro = 0.0;           // sum_{|a| <= N+1} |d_a (I-P) f|_nu^2 (before 1/eps)
  double weighted_micro = 0.0;  // sum_{|a|+|b| <= N} |w^p d^b_a (I-P) f|_nu^2 (before 1/eps)
  std::vector<BetaTerm> weighted;
  double epsilon = 0.0;
  double total() const { return epsilon * macro + (micro + weighted_micro) / epsilon; }
};

EnergyTerms energy_terms(const PerturbationField& f, int N, double l,
                         const collision::KernelSpec& kernel);
DissipationTerms dissipation_terms(const PerturbationField& f, double epsilon, int N, double l,
                                   const collision::KernelSpec& kernel,
                                   const DissipationWeight& weight);

/// Middle member of the instant-energy equivalence. Throws UnsupportedN when
/// the velocity difference stencils of order N do not fit the grid.
double instant_energy(const PerturbationField& f, int N, double l,
                      const collision::KernelSpec& kernel);
double dissipation_rate(const PerturbationField& f, double epsilon, int N, double l,
                        const collision::KernelSpec& kernel, const DissipationWeight& weight);
/// Builds the weight from the kernel on every call.
double dissipation_rate(const PerturbationField& f, double epsilon, int N, double l,
                        const collision::KernelSpec& kernel);

struct EnergyReport {
  double t = 0.0;
  double E = 0.0;
  double D = 0.0;
  double dEdt_plus_D = 0.0;
  double l2 = 0.0;
  double micro_nu = 0.0;
  Eigen::Matrix<double, 5, 1> drift = Eigen::Matrix<double, 5, 1>::Zero();
  double positivity_min = 0.0;
};

struct MonitorConfig {
  int N = 2;
  double l = 1.0;
  double tol_energy = 1e-6;        // allowed dE/dt + D, relative to E(0)
  double tol_energy_bound = 0.05;  // sup E <= (1 + tol) E(0)
};

struct MonitorResult {
  std::vector<EnergyReport> series;
  std::size_t sign_violations = 0;  // samples with dE/dt + D > tol_energy E(0)
  double sup_ratio = 0.0;           // sup_t E / E(0), 0 when E(0) = 0
  bool bounded = true;
};

/// E and D at each recorded snapshot; dE/dt by central differences with
/// one-sided ends.
MonitorResult energy_monitor(const kinetic::RunResult& run, const collision::KernelSpec& kernel,
                             const DissipationWeight& weight, const MonitorConfig& cfg);

struct ProbeError {
  double rho = 0.0;
  double u = 0.0;
  double theta = 0.0;
  double total = 0.0;
  double micro = 0.0;  // |(I - P) f_eps(t)|
};

struct SweepResult {
  std::vector<double> epsilons;
  std::vector<double> probes;
  std::vector<std::vector<ProbeError>> errors;  // [epsilon][probe]
  double fitted_order = 0.0;                    // NaN when fewer than two usable points
  std::vector<std::string> warnings;
  bool monotone() const;        // every probe error strictly decreases as eps decreases
  bool micro_monotone() const;  // sup over probes of micro decreases as eps decreases
};

struct SweepOptions {
  int jobs = 1;
};

/// One kinetic run per epsilon from well-prepared data of f0_hydro, compared
/// with the exact acoustic solution at the probe times. Probe times must be
/// multiples of base_cfg.dt. base_cfg.t_end is replaced by the last probe.
SweepResult convergence_sweep(const std::vector<double>& epsilons,
                              const kinetic::SolverConfig& base_cfg, const HydroState& f0_hydro,
                              const std::vector<double>& t_probe,
                              const collision::AssembledL& opL,
                              const collision::GammaOperator* gamma = nullptr,
                              const SweepOptions& opts = {});

/// Least-squares slope of log(err) against log(eps); NaN for fewer than
/// two positive errors.
double fitted_order(const std::vector<double>& eps, const std::vector<double>& err);

void write_energy_csv(std::ostream& out, const std::vector<EnergyReport>& series);
void write_sweep_csv(std::ostream& out, const SweepResult& r);

}  // namespace alab::diagnostics
