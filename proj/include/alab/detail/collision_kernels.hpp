#pragma once

// Shared geometry for the Boltzmann kernels. Two implementations exist for
// each kernel: an OpenMP one used in production and a plain serial one
// kept as a reference for tests and benchmarks.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <vector>

#include "alab/collision_ops.hpp"

namespace alab::collision::detail {

struct Frame {
  Vec3 e1, e2, e3;
  double r = 0.0;
};

/// Orthonormal frame with e3 along a. e1 and e2 are even functions of a,
/// so the pairs (v, u) and (u, v) see the same set of post-collision
/// velocities.
inline Frame make_frame(const Vec3& a) {
  Frame f;
  f.r = std::sqrt(velocity::norm2(a));
  for (int i = 0; i < 3; ++i) f.e3[i] = a[i] / f.r;
  int m = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(a[i]) < std::abs(a[m])) m = i;
  Vec3 ref{0.0, 0.0, 0.0};
  ref[m] = 1.0;
  const double p = f.e3[m];
  double n2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    f.e1[i] = ref[i] - p * f.e3[i];
    n2 += f.e1[i] * f.e1[i];
  }
  const double inv = 1.0 / std::sqrt(n2);
  for (int i = 0; i < 3; ++i) f.e1[i] *= inv;
  double s = 1.0;
  for (int i = 0; i < 3; ++i)
    if (a[i] != 0.0) {
      s = a[i] > 0.0 ? 1.0 : -1.0;
      break;
    }
  f.e2 = {s * (f.e3[1] * f.e1[2] - f.e3[2] * f.e1[1]),
          s * (f.e3[2] * f.e1[0] - f.e3[0] * f.e1[2]),
          s * (f.e3[0] * f.e1[1] - f.e3[1] * f.e1[0])};
  return f;
}

/// Tensor-product Lagrange stencil (2 or 3 nodes per axis).
struct Stencil {
  int width = 3;
  std::size_t base = 0;
  std::array<std::array<double, 3>, 3> w{};
};

struct Geometry {
  const VelocityGrid* grid = nullptr;
  AngularRule rule;
  double gamma = 1.0;
  Interpolation interp = Interpolation::quadratic;
  std::vector<double> mu, sqrt_mu, inv_sqrt_mu, weight;
  std::array<bool, 3> uniform{};
  bool all_uniform = false;
  std::array<double, 3> x0{}, h{}, inv_h{};
  std::array<int, 3> last{};
  std::array<std::size_t, 3> stride{};

  Geometry(const VelocityGrid& g, const KernelSpec& kernel);

  std::size_t size() const { return mu.size(); }

  double kinetic(double r) const {
    if (gamma == 1.0) return r;
    if (gamma == 0.0) return 1.0;
    return std::pow(r, gamma);
  }

  Stencil stencil(const Vec3& p) const;

  /// Visit (node, weight) over a stencil.
  template <class F>
  void for_each(const Stencil& s, F&& fn) const {
    for (int a = 0; a < s.width; ++a) {
      const std::size_t ia = s.base + a * stride[0];
      for (int b = 0; b < s.width; ++b) {
        const std::size_t ib = ia + b * stride[1];
        const double wab = s.w[0][a] * s.w[1][b];
        for (int c = 0; c < s.width; ++c) fn(ib + c, wab * s.w[2][c]);
      }
    }
  }
};

/// Raw strong-form matrix, rows in parallel. M must be N x N.
void boltzmann_rows_omp(const Geometry& geo, Eigen::MatrixXd& M);
void boltzmann_rows_serial(const Geometry& geo, Eigen::MatrixXd& M);

/// Gain part of the symmetrized Gamma in Phi = f / sqrt(mu) variables.
/// phi_f, phi_g and out are row-major N x m (node-major, m contiguous).
/// phi_g == nullptr means g = f. out is overwritten with
///   sum_u w_u mu(u) sum_omega c [Phi_f(v') Phi_g(u') + Phi_g(v') Phi_f(u')] / 2
/// (the sqrt(mu(v)) prefactor is applied by the caller).
void gamma_gain_omp(const Geometry& geo, const double* phi_f, const double* phi_g, int m,
                    double* out);
void gamma_gain_serial(const Geometry& geo, const double* phi_f, const double* phi_g, int m,
                       double* out);

}  // namespace alab::collision::detail
