#pragma once

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "alab/collision_ops.hpp"
#include "alab/field.hpp"

namespace alab::kinetic {

enum class Mode { linearized, nonlinear };
enum class Splitting { lie, strang };

std::string to_string(Mode m);
std::string to_string(Splitting s);
Mode parse_mode(const std::string& s);
Splitting parse_splitting(const std::string& s);

struct SolverConfig {
  double epsilon = 0.1;
  double dt = 0.01;
  double t_end = 1.0;
  Mode mode = Mode::linearized;
  Splitting splitting = Splitting::lie;
  int cadence = 1;             // record every `cadence` steps
  double tol_conserve = 1e-8;  // admissibility of the initial data
  double tol_pos = 0.0;        // screening threshold for mu + eps sqrt(mu) f

  /// Throws ConfigError.
  void validate() const;
  std::size_t steps() const;
};

/// One time step of
///   d_t f + v.grad_x f + L f / eps = Gamma(f, f)
/// Lie: f <- (I + dt L / eps)^{-1} [T(dt) f + dt Gamma(T f, T f)].
/// Strang: half transport, Crank-Nicolson collision with explicit Gamma,
/// half transport.
/// T is the exact transport exp(-dt v.grad_x) applied per Fourier mode.
/// The collision matrix is factored once at construction.
class ImexStepper {
 public:
  ImexStepper(const SolverConfig& cfg, const collision::AssembledL& opL,
              const collision::GammaOperator* gamma, const SpatialGrid& space);
  ~ImexStepper();
  ImexStepper(const ImexStepper&) = delete;
  ImexStepper& operator=(const ImexStepper&) = delete;

  PerturbationField step(const PerturbationField& f);
  /// Exact transport over time t.
  Eigen::MatrixXd transport(const Eigen::Ref<const Eigen::MatrixXd>& f, double t) const;
  /// Solve (I + c L) x = b with the factored matrix (c = dt/eps for Lie,
  /// dt/(2 eps) for Strang).
  Eigen::MatrixXd collision_solve(const Eigen::Ref<const Eigen::MatrixXd>& b) const;

  /// Smallest value of mu + eps sqrt(mu) f seen in the last step input.
  double last_positivity_min() const { return last_pos_min_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  double last_pos_min_ = 0.0;
};

/// Convenience wrapper; factors the collision matrix on every call.
PerturbationField imex_step(const PerturbationField& f, const SolverConfig& cfg,
                            const collision::AssembledL& opL,
                            const collision::GammaOperator* gamma = nullptr);

/// min over nodes and points of mu + eps sqrt(mu) f.
double positivity_min(const PerturbationField& f);

/// sqrt of the torus mean of sum_k w_k f^2.
double l2_norm(const PerturbationField& f);
/// Same with the nodal weight nu.
double weighted_l2_norm(const PerturbationField& f, const Eigen::VectorXd& nu);

struct StepSample {
  std::size_t step = 0;
  double t = 0.0;
  double l2 = 0.0;
  double micro_nu = 0.0;                   // |(I - P) f|_nu
  Eigen::Matrix<double, 5, 1> drift;       // invariants minus their initial values
  double positivity_min = 0.0;
};

struct RunResult {
  std::vector<StepSample> samples;
  std::vector<PerturbationField> snapshots;  // only when keep_snapshots
  std::size_t positivity_violations = 0;
};

using Observer = std::function<void(const StepSample&, const PerturbationField&)>;

struct RunOptions {
  bool keep_snapshots = true;
  Observer observer;  // called at every recorded sample
};

/// Integrates from f0 to cfg.t_end. Throws InadmissibleInitialData when the
/// global invariants of f0 exceed cfg.tol_conserve or, in nonlinear mode,
/// when mu + eps sqrt(mu) f0 is negative somewhere.
RunResult run_simulation(const SolverConfig& cfg, const PerturbationField& f0,
                         const collision::AssembledL& opL,
                         const collision::GammaOperator* gamma = nullptr,
                         const RunOptions& opts = {});

/// f = {rho + v.u + (|v|^2/2 - 3/2) theta} sqrt(mu) from mean-zero fields.
PerturbationField well_prepared_data(const HydroState& hydro, const GridPtr& grid,
                                     double epsilon);

/// Binary dump: magic, version, n_v, points, dim, n, epsilon, t, then the
/// values with the velocity index fastest (64-bit little-endian floats).
void write_field_dump(std::ostream& out, const PerturbationField& f, double t);
PerturbationField read_field_dump(std::istream& in, const GridPtr& grid, double* t = nullptr);

}  // namespace alab::kinetic
