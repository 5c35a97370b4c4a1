#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/Dense>

#include "alab/collision_ops.hpp"
#include "alab/detail/collision_kernels.hpp"
#include "alab/velocity_space.hpp"

namespace alab::testing {

using velocity::Vec3;
using collision::KernelSpec;

// Three-point Lagrange interpolation of nodal data F at p, written out
// axis by axis straight from the node coordinates.
inline double lagrange(const velocity::VelocityGrid& g, const Eigen::VectorXd& F, const Vec3& p) {
  std::array<int, 3> lo{};
  std::array<std::array<double, 3>, 3> w{};
  for (int a = 0; a < 3; ++a) {
    const auto& x = g.axis(a);
    const int n = static_cast<int>(x.size());
    int best = 0;
    for (int i = 1; i < n; ++i)
      if (std::abs(x[i] - p[a]) < std::abs(x[best] - p[a])) best = i;
    best = std::clamp(best, 1, n - 2);
    lo[a] = best - 1;
    for (int j = 0; j < 3; ++j) {
      double l = 1.0;
      for (int m = 0; m < 3; ++m)
        if (m != j) l *= (p[a] - x[best - 1 + m]) / (x[best - 1 + j] - x[best - 1 + m]);
      w[a][j] = l;
    }
  }
  double s = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        s += w[0][i] * w[1][j] * w[2][k] * F[static_cast<Eigen::Index>(g.index(lo[0] + i, lo[1] + j, lo[2] + k))];
  return s;
}

struct Collision {
  Vec3 vp, up;
};

// v' = v - ((v-u).w) w, u' = u + ((v-u).w) w for the q-th quadrature direction.
inline Collision post(const Vec3& v, const Vec3& u, const collision::AngularRule& rule, std::size_t q) {
  const auto fr = collision::detail::make_frame({v[0] - u[0], v[1] - u[1], v[2] - u[2]});
  Vec3 om;
  for (int i = 0; i < 3; ++i)
    om[i] = rule.s1[q] * fr.e1[i] + rule.s2[q] * fr.e2[i] + rule.cos_theta[q] * fr.e3[i];
  double s = 0.0;
  for (int i = 0; i < 3; ++i) s += (v[i] - u[i]) * om[i];
  Collision c;
  for (int i = 0; i < 3; ++i) {
    c.vp[i] = v[i] - s * om[i];
    c.up[i] = u[i] + s * om[i];
  }
  return c;
}

// L g = -mu^{-1/2} [Q(mu, sqrt(mu) g) + Q(sqrt(mu) g, mu)] by nested loops.
inline Eigen::VectorXd brute_force_L(const velocity::VelocityGrid& g, const KernelSpec& kernel,
                              const Eigen::VectorXd& gv) {
  const auto rule = collision::angular_rule(kernel);
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::VectorXd phi(n), out = Eigen::VectorXd::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k) phi[k] = gv[k] / velocity::sqrt_maxwellian(g.node(k));
  for (Eigen::Index k = 0; k < n; ++k) {
    const Vec3& v = g.node(k);
    const double smv = velocity::sqrt_maxwellian(v);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == k) continue;
      const Vec3& u = g.node(j);
      const double mu_u = velocity::maxwellian(u);
      const double r = std::sqrt(velocity::norm2({v[0] - u[0], v[1] - u[1], v[2] - u[2]}));
      const double kin = std::pow(r, kernel.gamma);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Collision c = post(v, u, rule, q);
        const double gain = lagrange(g, phi, c.vp) + lagrange(g, phi, c.up);
        out[k] += g.weight(j) * kin * rule.weight[q] *
                  (mu_u * gv[k] + std::sqrt(mu_u) * smv * gv[j] - smv * mu_u * gain);
      }
    }
  }
  return out;
}

// Symmetrized Gamma(f, g) = mu^{-1/2} Q(sqrt(mu) f, sqrt(mu) g), nested loops,
// without the invariant projection.
inline Eigen::VectorXd brute_force_gamma(const velocity::VelocityGrid& g, const KernelSpec& kernel,
                                  const Eigen::VectorXd& f, const Eigen::VectorXd& h) {
  const auto rule = collision::angular_rule(kernel);
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::VectorXd pf(n), ph(n), out = Eigen::VectorXd::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double s = velocity::sqrt_maxwellian(g.node(k));
    pf[k] = f[k] / s;
    ph[k] = h[k] / s;
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    const Vec3& v = g.node(k);
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == k) continue;
      const Vec3& u = g.node(j);
      const double r = std::sqrt(velocity::norm2({v[0] - u[0], v[1] - u[1], v[2] - u[2]}));
      const double c0 = g.weight(j) * velocity::maxwellian(u) * std::pow(r, kernel.gamma);
      double gain = 0.0;
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Collision c = post(v, u, rule, q);
        gain += rule.weight[q] * 0.5 *
                (lagrange(g, pf, c.vp) * lagrange(g, ph, c.up) +
                 lagrange(g, ph, c.vp) * lagrange(g, pf, c.up));
      }
      const double loss = rule.b0 * 0.5 * (pf[k] * ph[j] + ph[k] * pf[j]);
      acc += c0 * (gain - loss);
    }
    out[k] = velocity::sqrt_maxwellian(v) * acc;
  }
  return out;
}

}  // namespace alab::testing
