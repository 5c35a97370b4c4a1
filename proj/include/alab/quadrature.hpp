#pragma once

#include <vector>

namespace alab::quadrature {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [a, b].
Rule gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// n-point Gauss-Hermite rule for the weight exp(-x^2/2) on the real line
/// (probabilists' convention); weights sum to sqrt(2 pi).
Rule gauss_hermite(int n);

/// Integral of |z|^gamma over the box [-hx, hx] x [-hy, hy] x [-hz, hz],
/// gamma > -3. Decomposes the box into six pyramids with apex at the origin
/// so the radial singularity integrates in closed form.
double box_power_integral(double hx, double hy, double hz, double gamma);

}  // namespace alab::quadrature
