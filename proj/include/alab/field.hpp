#pragma once

#include <Eigen/Dense>

#include "alab/spectral.hpp"
#include "alab/velocity_space.hpp"

namespace alab {

using spectral::SpatialGrid;
using velocity::GridPtr;

/// f(x, v) on T^d x velocity grid. values(k, p) is the sample at velocity
/// node k and spatial point p, so each column is one velocity vector.
struct PerturbationField {
  GridPtr vgrid;
  SpatialGrid space;
  double epsilon = 0.1;
  Eigen::MatrixXd values;

  PerturbationField() = default;
  PerturbationField(GridPtr g, SpatialGrid s, double eps)
      : vgrid(std::move(g)), space(s), epsilon(eps),
        values(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(vgrid->size()),
                                     static_cast<Eigen::Index>(s.points()))) {}

  /// Same grids, values overwritten.
  PerturbationField like(Eigen::MatrixXd v) const {
    PerturbationField out;
    out.vgrid = vgrid;
    out.space = space;
    out.epsilon = epsilon;
    out.values = std::move(v);
    return out;
  }
};

/// (rho, u, theta) on the spatial torus; rows of `fields` are
/// rho, u1, u2, u3, theta and columns are spatial points.
struct HydroState {
  SpatialGrid space;
  Eigen::MatrixXd fields;

  HydroState() = default;
  explicit HydroState(SpatialGrid s)
      : space(s), fields(Eigen::MatrixXd::Zero(5, static_cast<Eigen::Index>(s.points()))) {}

  auto rho() { return fields.row(0); }
  auto rho() const { return fields.row(0); }
  auto theta() { return fields.row(4); }
  auto theta() const { return fields.row(4); }
  auto u(int i) { return fields.row(1 + i); }
  auto u(int i) const { return fields.row(1 + i); }
};

void require_same_space(const SpatialGrid& a, const SpatialGrid& b);
void require_same_field_grids(const PerturbationField& a, const PerturbationField& b);

}  // namespace alab
