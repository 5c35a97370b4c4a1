#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace alab::velocity {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double norm2(const Vec3& a) { return dot(a, a); }

enum class QuadratureRule { uniform_midpoint, gauss_hermite };

std::string to_string(QuadratureRule rule);
QuadratureRule parse_rule(const std::string& tag);

struct GridOptions {
  double tol_moment = 1e-5;
};

/// Discrete moments of the Maxwellian on a grid, relative to the
/// continuum values (1, 0, 3).
struct MomentResiduals {
  double mass = 0.0;      // |sum w mu - 1|
  double momentum = 0.0;  // |sum w v mu|
  double energy = 0.0;    // |sum w |v|^2 mu - 3|
  double max() const;
};

/// Tensor-product velocity grid over [-V_max, V_max]^3 (midpoint rule) or
/// the Gauss-Hermite nodes of each axis. Immutable once built; pass around
/// as GridPtr.
class VelocityGrid {
 public:
  VelocityGrid(double v_max, std::array<int, 3> counts, QuadratureRule rule);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<Vec3>& nodes() const { return nodes_; }
  const Vec3& node(std::size_t k) const { return nodes_[k]; }
  std::span<const double> weights() const { return weights_; }
  double weight(std::size_t k) const { return weights_[k]; }
  double extent() const { return extent_; }
  double v_max() const { return v_max_; }
  std::array<int, 3> counts() const { return counts_; }
  QuadratureRule rule() const { return rule_; }

  const std::vector<double>& axis(int a) const { return axis_[a]; }
  const std::vector<double>& axis_weights(int a) const { return axis_w_[a]; }
  bool uniform_weights() const { return rule_ == QuadratureRule::uniform_midpoint; }

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * counts_[1] + j) * counts_[2] + k;
  }
  std::array<int, 3> multi_index(std::size_t n) const;
  /// Node index of -v_k.
  std::size_t mirror(std::size_t n) const;

  std::uint64_t hash() const { return hash_; }
  MomentResiduals residuals() const;
  /// Maxwellian mass outside the grid's cells (truncation defect).
  double truncated_mass_defect() const;

 private:
  double v_max_;
  double extent_ = 0.0;
  std::array<int, 3> counts_;
  QuadratureRule rule_;
  std::array<std::vector<double>, 3> axis_;
  std::array<std::vector<double>, 3> axis_w_;
  std::vector<Vec3> nodes_;
  std::vector<double> weights_;
  std::uint64_t hash_ = 0;
};

using GridPtr = std::shared_ptr<const VelocityGrid>;

/// Builds a grid and checks its Maxwellian moments against opts.tol_moment.
/// Counts must be even and >= 4 so that the node set is symmetric under
/// v -> -v.
GridPtr build_grid(double v_max, std::array<int, 3> counts,
                   QuadratureRule rule = QuadratureRule::uniform_midpoint,
                   GridOptions opts = {});

/// Global Maxwellian (2 pi)^{-3/2} exp(-|v|^2 / 2).
double maxwellian(const Vec3& v);
inline double sqrt_maxwellian(const Vec3& v) {
  return std::sqrt(maxwellian(v));
}

/// w(v)^power with w(v) = (1 + |v|^2)^{1/2}.
struct WeightFn {
  double power = 0.0;
  double operator()(const Vec3& v) const;
};

/// Per-node multiplicative weight, e.g. the collision frequency nu(v_k).
struct NodalWeight {
  Eigen::VectorXd values;
};

using InnerWeight = std::variant<std::monostate, WeightFn, NodalWeight>;

/// A function of velocity sampled at the nodes of `grid`.
struct VelocityFunction {
  GridPtr grid;
  Eigen::VectorXd values;
};

template <class F>
VelocityFunction sample(const GridPtr& grid, F&& fn) {
  VelocityFunction out{grid, Eigen::VectorXd(grid->size())};
  for (std::size_t k = 0; k < grid->size(); ++k) out.values[k] = fn(grid->node(k));
  return out;
}

/// sum_k w_k * weight(v_k) * f(v_k) g(v_k). Throws GridMismatch when f and g
/// live on different grids.
double weighted_inner(const VelocityFunction& f, const VelocityFunction& g,
                      const InnerWeight& weight = {});

/// Same sum for raw node vectors on a known grid.
double weighted_inner(const VelocityGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& f,
                      const Eigen::Ref<const Eigen::VectorXd>& g,
                      const InnerWeight& weight = {});

void require_same_grid(const VelocityGrid& a, const VelocityGrid& b);

/// d/dv_axis by centered differences in the interior and one-sided
/// differences on the first and last node of each line.
Eigen::VectorXd derivative(const VelocityGrid& grid,
                           const Eigen::Ref<const Eigen::VectorXd>& f, int axis);

/// Complex variant used on Fourier coefficients.
Eigen::VectorXcd derivative(const VelocityGrid& grid,
                            const Eigen::Ref<const Eigen::VectorXcd>& f, int axis);

/// The five collision invariants sqrt(mu), v_i sqrt(mu),
/// (|v|^2/2 - 3/2) sqrt(mu) sampled on a grid, with the discrete Gram matrix
/// of the weighted inner product. Provides the exact discrete L^2_v
/// orthogonal projection onto their span.
class InvariantBasis {
 public:
  explicit InvariantBasis(GridPtr grid);

  const GridPtr& grid() const { return grid_; }
  /// N x 5, columns in the order rho, u1, u2, u3, theta.
  const Eigen::MatrixXd& functions() const { return phi_; }
  const Eigen::Matrix<double, 5, 5>& gram() const { return gram_; }

  /// Coefficients (rho, u, theta) of the projection of each column of F.
  Eigen::MatrixXd coefficients(const Eigen::Ref<const Eigen::MatrixXd>& F) const;
  Eigen::MatrixXcd coefficients(const Eigen::Ref<const Eigen::MatrixXcd>& F) const;
  /// P F, column by column.
  Eigen::MatrixXd project(const Eigen::Ref<const Eigen::MatrixXd>& F) const;
  Eigen::MatrixXcd project(const Eigen::Ref<const Eigen::MatrixXcd>& F) const;
  /// (I - P) F.
  Eigen::MatrixXd complement(const Eigen::Ref<const Eigen::MatrixXd>& F) const;
  Eigen::MatrixXcd complement(const Eigen::Ref<const Eigen::MatrixXcd>& F) const;
  /// Raw moments <F, phi_i> of each column, 5 x m.
  Eigen::MatrixXd moments(const Eigen::Ref<const Eigen::MatrixXd>& F) const;

 private:
  GridPtr grid_;
  Eigen::MatrixXd phi_;
  Eigen::MatrixXd weighted_phi_;  // W * phi
  Eigen::Matrix<double, 5, 5> gram_;
  Eigen::LLT<Eigen::Matrix<double, 5, 5>> gram_llt_;
};

}  // namespace alab::velocity
