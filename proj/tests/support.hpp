#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "alab/collision_ops.hpp"
#include "alab/field.hpp"
#include "alab/velocity_space.hpp"

namespace alab::testing {

/// Small grids miss tol_moment at V_max = 6, so the tests loosen it.
inline GridPtr small_grid(int n, double v_max = 6.0, double tol = 1e-1) {
  return velocity::build_grid(v_max, {n, n, n}, velocity::QuadratureRule::uniform_midpoint,
                              {tol});
}

/// Gaussian noise times sqrt(mu), so the columns live in L^2 with tails that
/// decay like the Maxwellian.
inline Eigen::MatrixXd random_block(const velocity::VelocityGrid& g, Eigen::Index cols,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(g.size()), cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (std::size_t k = 0; k < g.size(); ++k)
      out(static_cast<Eigen::Index>(k), j) = n01(rng) * velocity::sqrt_maxwellian(g.node(k));
  return out;
}

inline PerturbationField random_field(const GridPtr& g, const SpatialGrid& s, double eps,
                                      std::uint64_t seed) {
  PerturbationField f(g, s, eps);
  f.values = random_block(*g, static_cast<Eigen::Index>(s.points()), seed);
  return f;
}

inline std::string cache_file(const std::string& name) {
  std::filesystem::create_directories(ALAB_TEST_CACHE);
  return std::string(ALAB_TEST_CACHE) + "/" + name;
}

/// Hard-sphere L on the 12^3 grid, cached on disk across test binaries.
inline const collision::AssembledL& hard_sphere_12() {
  static const collision::AssembledL op = [] {
    collision::AssemblyOptions ao;
    ao.cache_path = cache_file("hs12.bin");
    return collision::assemble_L(velocity::build_grid(6.0, {12, 12, 12}),
                                 collision::KernelSpec{}, ao);
  }();
  return op;
}

inline double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
  return scale == 0.0 ? 0.0 : (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace alab::testing
