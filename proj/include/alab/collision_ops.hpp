#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "alab/velocity_space.hpp"

namespace alab::collision {

using velocity::GridPtr;
using velocity::Vec3;
using velocity::VelocityGrid;

enum class Family { boltzmann, landau };
enum class AngularKernel { abs_cos, cos_squared };
enum class Interpolation { linear, quadratic };

std::string to_string(Family f);
std::string to_string(AngularKernel k);
std::string to_string(Interpolation i);
Family parse_family(const std::string& s);
AngularKernel parse_angular_kernel(const std::string& s);
Interpolation parse_interpolation(const std::string& s);

struct KernelSpec {
  Family family = Family::boltzmann;
  double gamma = 1.0;
  AngularKernel angular_kernel = AngularKernel::abs_cos;
  int angular_nodes = 8;  // polar nodes over the full sphere
  int impact_nodes = 8;   // azimuthal nodes
  Interpolation interpolation = Interpolation::quadratic;
  double c_b = 1.0;       // declared bound B(theta) <= c_b |cos theta|

  /// Throws GammaOutOfRange or UnsupportedKernel.
  void validate() const;
  double angular(double cos_theta) const;
  std::uint64_t hash() const;
  std::string tag() const;
};

/// Flattened product rule over the sphere: Gauss-Legendre in cos(theta) on
/// one hemisphere (folded, since both the kernel and the post-collision
/// velocities are even in omega) times a uniform azimuth rule. Directions
/// are stored in the local frame (e1, e2, e3) with e3 along v - u.
struct AngularRule {
  std::vector<double> cos_theta;
  std::vector<double> s1;  // sin(theta) cos(phi)
  std::vector<double> s2;  // sin(theta) sin(phi)
  std::vector<double> weight;  // quadrature weight times B(theta)
  double b0 = 0.0;             // sum of weight, the discrete int B d omega
  std::size_t size() const { return weight.size(); }
};

AngularRule angular_rule(const KernelSpec& kernel);

/// nu(v) = int |v - u|^gamma mu(u) du by radial quadrature with the angular
/// integral done in closed form.
double collision_frequency(const Vec3& v, double gamma);

/// Landau diffusion matrix sigma_ij(v).
Eigen::Matrix3d landau_sigma(const Vec3& v);

/// Grid quadrature of nu at every node. The coincident node is replaced by
/// the cell average of |z|^gamma over that node's cell.
Eigen::VectorXd grid_collision_frequency(const VelocityGrid& grid, double gamma);

/// Landau sigma quadratic form sum_k w_k [sigma grad g . grad g + sigma_ij v_i v_j g^2]
/// as an N x N matrix (difference stencils as in velocity::derivative), and
/// the nodal weight sigma_ij(v) v_i v_j.
struct LandauForm {
  Eigen::MatrixXd form;
  Eigen::VectorXd weight;
};
LandauForm landau_form(const VelocityGrid& grid);

struct AssemblyOptions {
  std::size_t max_entries = std::size_t{1} << 26;  // n_v^2 cap
  double tol_null = 1e-6;
  bool conservative = true;  // project onto the invariant complement
  bool parallel = true;
  std::string cache_path;    // read if keyed correctly, written otherwise
};

/// Linearized operator L as a dense matrix on nodal values of g.
/// For non-uniform quadrature weights the matrix is self-adjoint in the
/// weighted inner product; `symmetric_form()` is W^{1/2} L W^{-1/2}.
struct AssembledL {
  Eigen::MatrixXd matrix;
  KernelSpec kernel;
  GridPtr grid;
  Eigen::VectorXd nu;    // dissipation weight at each node
  Eigen::VectorXd loss;  // diagonal loss part of the raw operator
  Eigen::MatrixXd sigma_form;  // Landau only: W-weighted sigma quadratic form (N x N)
  bool from_cache = false;

  Eigen::MatrixXd symmetric_form() const;
  Eigen::MatrixXd apply(const Eigen::Ref<const Eigen::MatrixXd>& g) const { return matrix * g; }
  std::uint64_t hash() const;
};

AssembledL assemble_L(const GridPtr& grid, const KernelSpec& kernel,
                      const AssemblyOptions& opts = {});

/// Raw strong-form Boltzmann matrix without the conservative correction.
Eigen::MatrixXd assemble_boltzmann_raw(const VelocityGrid& grid, const KernelSpec& kernel,
                                       bool parallel = true);

struct StructureReport {
  double symmetry_defect = 0.0;  // max |S - S^T|
  double null_residual = 0.0;    // max_i |L phi_i|_nu / |Lambda phi_i|_nu
  double min_eigenvalue = 0.0;
};

/// Symmetry and null-space residuals; the eigenvalue is filled in only when
/// `with_eigenvalue` is set (it costs a dense eigen-solve).
StructureReport structure_report(const AssembledL& op, bool with_eigenvalue);

/// Smallest eigenvalue of the symmetric form of L.
double min_eigenvalue(const AssembledL& op);

struct CoercivityReport {
  double delta = 0.0;
  std::size_t n_v = 0;
  std::string kernel;
};

/// Minimum of <Lf, f> / |(I - P) f|_nu^2 over the complement of the
/// invariants. Throws NonpositiveGap when the minimum is <= 0.
CoercivityReport coercivity_delta(const AssembledL& op);

struct GammaOptions {
  bool conservative = true;  // subtract the invariant projection
  bool parallel = true;
};

/// Symmetrized bilinear collision operator (Gamma(f,g) + Gamma(g,f)) / 2
/// evaluated column by column. f and g are N x m blocks of nodal values.
class GammaOperator {
 public:
  GammaOperator(GridPtr grid, KernelSpec kernel);

  Eigen::MatrixXd operator()(const Eigen::Ref<const Eigen::MatrixXd>& f,
                             const Eigen::Ref<const Eigen::MatrixXd>& g,
                             const GammaOptions& opts = {}) const;
  /// Gamma(f, f), sharing the interpolations of both arguments.
  Eigen::MatrixXd quadratic(const Eigen::Ref<const Eigen::MatrixXd>& f,
                            const GammaOptions& opts = {}) const;

  const GridPtr& grid() const { return grid_; }
  const KernelSpec& kernel() const { return kernel_; }

 private:
  Eigen::MatrixXd evaluate(const Eigen::Ref<const Eigen::MatrixXd>& f,
                           const Eigen::Ref<const Eigen::MatrixXd>* g,
                           const GammaOptions& opts) const;

  GridPtr grid_;
  KernelSpec kernel_;
  AngularRule rule_;
  velocity::InvariantBasis basis_;
  Eigen::MatrixXd loss_kernel_;  // K[v,u] = w_u mu(u) |v-u|^gamma b0
  Eigen::VectorXd sqrt_mu_;
};

Eigen::VectorXd gamma_bilinear(const velocity::VelocityFunction& f,
                               const velocity::VelocityFunction& g, const KernelSpec& kernel);

/// Binary cache of an assembled matrix keyed by (grid hash, kernel hash).
void save_cache(const std::string& path, const AssembledL& op);
/// Returns false when the file is missing or keyed differently.
bool load_cache(const std::string& path, const GridPtr& grid, const KernelSpec& kernel,
                AssembledL& out);

}  // namespace alab::collision
