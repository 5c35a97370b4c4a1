#pragma once

#include <Eigen/Dense>

#include <array>
#include <iosfwd>

#include "alab/field.hpp"

namespace alab::acoustic {

/// Sound speed sqrt(5/3) of the linear system
///   d_t rho + div u = 0, d_t u + grad(rho + theta) = 0, d_t theta + (2/3) div u = 0.
double sound_speed();

/// Fourier coefficients (half spectrum, unnormalized) of the acoustic
/// unknowns. In 3-D the rows are rho, u1, u2, u3, theta; in 1-D the
/// transverse velocities are dropped and the rows are rho, u1, theta.
struct AcousticState {
  SpatialGrid space;
  Eigen::MatrixXcd coeffs;

  int fields() const { return space.dim == 1 ? 3 : 5; }
  static AcousticState zero(const SpatialGrid& s);
};

AcousticState from_hydro(const HydroState& h);
HydroState to_hydro(const AcousticState& a);

/// d_t U = -i A(k) U for one wavevector, with A = V diag(omega) V^{-1}.
struct AcousticSymbol {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd frequencies;  // ascending
  Eigen::MatrixXd vectors;      // columns are eigenvectors
  Eigen::MatrixXd inverse;      // V^{-1}
};

/// dim = 1 uses k[0] only and the 3-field system.
AcousticSymbol symbol_eigen(const std::array<double, 3>& k, int dim = 3);

/// Exact propagation exp(-i t A(k)) mode by mode. Modes on a Nyquist plane
/// drop the wavevector component of that axis so the real field stays real.
AcousticState propagate(const AcousticState& s, double t);

/// ||rho||^2_{H^s} + ||u||^2_{H^s} + (3/2)||theta||^2_{H^s} on the unit torus,
/// with Fourier multiplier (1 + |k|^2)^s.
double acoustic_energy(const AcousticState& s, int sobolev);

/// Plane sound wave along x1 with wavenumber index m: rho = A cos(2 pi m x),
/// u1 = sign c A cos(...), theta = (2/3) A cos(...), which moves in
/// direction `sign`.
HydroState sound_wave(const SpatialGrid& space, double amplitude, int m = 1, int sign = 1);

/// Columns k_index, field, re, im.
void write_coefficients_csv(std::ostream& out, const AcousticState& s);
AcousticState read_coefficients_csv(std::istream& in, const SpatialGrid& space);

}  // namespace alab::acoustic
