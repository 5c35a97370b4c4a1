#pragma once

#include <Eigen/Dense>

#include <array>
#include <iosfwd>
#include <limits>

#include "alab/collision_ops.hpp"
#include "alab/field.hpp"

namespace alab::hydro {

struct Projection {
  PerturbationField pf;
  HydroState fields;
};

/// P f at every spatial point, with the (rho, u, theta) coefficients.
Projection project_P(const PerturbationField& f);

/// Reconstruction {rho + v.u + (|v|^2/2 - 3/2) theta} sqrt(mu) of a state.
PerturbationField reconstruct(const HydroState& h, const GridPtr& grid, double epsilon);

/// Linear map from (rho, u, theta) to (a, b, c) with
/// P f = {a + b.v + c|v|^2} sqrt(mu), obtained by a Gram solve on the grid.
Eigen::Matrix<double, 5, 5> abc_map(const GridPtr& grid);
/// Rows a, b1, b2, b3, c.
Eigen::MatrixXd to_abc(const HydroState& h, const GridPtr& grid);

/// The 13 functions sqrt(mu), v_i sqrt(mu), v_i v_j sqrt(mu) (i <= j) and
/// v_i |v|^2 sqrt(mu) with their discrete Gram matrix.
class MomentBasis {
 public:
  explicit MomentBasis(GridPtr grid, double max_condition = 1e12);

  static constexpr int kSize = 13;
  /// Column labels, e.g. "v1v2".
  static const std::array<const char*, kSize>& labels();
  /// Position of v_i v_j (i <= j) among the columns.
  static int pair_index(int i, int j);

  const GridPtr& grid() const { return grid_; }
  const Eigen::MatrixXd& functions() const { return phi_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  double condition() const { return condition_; }
  /// W-orthonormal basis of the five collision invariants (N x 5).
  const Eigen::MatrixXd& invariants() const { return invariants_; }

  /// Coefficients c with f_par = functions() * c, column by column.
  Eigen::MatrixXd coefficients(const Eigen::Ref<const Eigen::MatrixXd>& f) const;

 private:
  GridPtr grid_;
  Eigen::MatrixXd phi_;
  Eigen::MatrixXd weighted_phi_;
  Eigen::MatrixXd gram_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double condition_ = 0.0;
  Eigen::MatrixXd invariants_;
};

/// f_par, the L^2_v projection onto the span of the 13 moment functions.
Eigen::MatrixXd project_13moment(const Eigen::Ref<const Eigen::MatrixXd>& f,
                                 const MomentBasis& basis);

/// Space-velocity integrals of f against sqrt(mu), v_i sqrt(mu) and
/// (|v|^2/2 - 3/2) sqrt(mu).
Eigen::Matrix<double, 5, 1> global_conservation_residual(const PerturbationField& f);

struct LocalResidual {
  Eigen::MatrixXd fields;  // rows: a-law, b1..b3-law, c-law; columns: points
  double a = 0.0;          // L^2 norms over the torus
  double b = 0.0;
  double c = 0.0;
};

/// The local conservation laws for (a, b, c) with d/dt replaced by the
/// backward difference (f_now - f_prev) / dt and grad_x by spectral
/// differentiation:
///   d_t a          - (1/2) <v.grad (I-P) f, |v|^2 sqrt(mu)>
///   d_t c + div b/3 + (1/6) <v.grad (I-P) f, |v|^2 sqrt(mu)>
///   d_t b + grad a + 5 grad c + <v.grad (I-P) f, v sqrt(mu)>
LocalResidual local_conservation_residual(const PerturbationField& f_now,
                                          const PerturbationField& f_prev, double dt);

struct MacroscopicCoefficients {
  /// 13 x points each. lhs holds the coefficients of
  /// {d_t + v.grad}{a + b.v + c|v|^2} sqrt(mu) in the moment basis.
  Eigen::MatrixXd lhs;
  /// Linear part: -{d_t + v.grad}(I-P) f - L (I-P) f / eps.
  Eigen::MatrixXd linear;
  /// Nonlinear part: Gamma(f, f); zero when gamma is null.
  Eigen::MatrixXd nonlinear;
  /// lhs - linear - nonlinear.
  Eigen::MatrixXd balance;
};

/// Dual-basis expansion of the macroscopic equations at the time of f_now.
MacroscopicCoefficients macroscopic_coefficients(const PerturbationField& f_now,
                                                 const PerturbationField& f_prev, double dt,
                                                 const MomentBasis& basis,
                                                 const collision::AssembledL& opL,
                                                 const collision::GammaOperator* gamma);

/// CSV with columns index, x, rho, u1, u2, u3, theta. index is the linear
/// point index and x its first coordinate.
void write_hydro_csv(std::ostream& out, const HydroState& h);

}  // namespace alab::hydro
