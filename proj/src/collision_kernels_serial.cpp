#include <vector>

#include "alab/detail/collision_kernels.hpp"

namespace alab::collision::detail {

namespace {

struct PostVelocities {
  Vec3 vp, up;
};

PostVelocities collide(const Vec3& v, const Vec3& u, const Frame& fr, const AngularRule& rule,
                       std::size_t q) {
  const double s = fr.r * rule.cos_theta[q];
  PostVelocities p;
  for (int i = 0; i < 3; ++i) {
    const double om = rule.s1[q] * fr.e1[i] + rule.s2[q] * fr.e2[i] + rule.cos_theta[q] * fr.e3[i];
    p.vp[i] = v[i] - s * om;
    p.up[i] = u[i] + s * om;
  }
  return p;
}

}  // namespace

void boltzmann_rows_serial(const Geometry& geo, Eigen::MatrixXd& M) {
  const VelocityGrid& grid = *geo.grid;
  const std::size_t n = geo.size();
  const AngularRule& rule = geo.rule;
  M.setZero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3& v = grid.node(k);
    for (std::size_t u = 0; u < n; ++u) {
      if (u == k) continue;
      const Vec3& w = grid.node(u);
      const Frame fr = make_frame({v[0] - w[0], v[1] - w[1], v[2] - w[2]});
      const double kin = geo.kinetic(fr.r);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const double c = geo.weight[u] * kin * rule.weight[q];
        // loss: mu(u) g(v) + sqrt(mu(u) mu(v)) g(u)
        M(k, k) += c * geo.mu[u];
        M(k, u) += c * geo.sqrt_mu[u] * geo.sqrt_mu[k];
        // gain: sqrt(mu(v)) mu(u) [g/sqrt(mu)](v') and the same at u'
        const PostVelocities p = collide(v, w, fr, rule, q);
        for (const Vec3* x : {&p.vp, &p.up}) {
          geo.for_each(geo.stencil(*x), [&](std::size_t j, double lam) {
            M(k, j) -= c * geo.sqrt_mu[k] * geo.mu[u] * lam * geo.inv_sqrt_mu[j];
          });
        }
      }
    }
  }
}

void gamma_gain_serial(const Geometry& geo, const double* phi_f, const double* phi_g, int m,
                       double* out) {
  const VelocityGrid& grid = *geo.grid;
  const std::size_t n = geo.size();
  const AngularRule& rule = geo.rule;
  if (phi_g == nullptr) phi_g = phi_f;
  auto interp = [&](const Vec3& x, const double* phi, int col) {
    double s = 0.0;
    geo.for_each(geo.stencil(x), [&](std::size_t j, double lam) { s += lam * phi[j * m + col]; });
    return s;
  };
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3& v = grid.node(k);
    for (int col = 0; col < m; ++col) {
      double total = 0.0;
      for (std::size_t u = 0; u < n; ++u) {
        if (u == k) continue;
        const Vec3& w = grid.node(u);
        const Frame fr = make_frame({v[0] - w[0], v[1] - w[1], v[2] - w[2]});
        const double kin = geo.kinetic(fr.r);
        for (std::size_t q = 0; q < rule.size(); ++q) {
          const PostVelocities p = collide(v, w, fr, rule, q);
          const double t = interp(p.vp, phi_f, col) * interp(p.up, phi_g, col) +
                           interp(p.vp, phi_g, col) * interp(p.up, phi_f, col);
          total += geo.weight[u] * geo.mu[u] * kin * rule.weight[q] * 0.5 * t;
        }
      }
      out[k * m + col] = total;
    }
  }
}

}  // namespace alab::collision::detail
