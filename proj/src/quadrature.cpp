#include "alab/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace alab::quadrature {
namespace {

// Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix, weights the
// squared first eigenvector components times the total mass.
Rule golub_welsch(const Eigen::VectorXd& offdiag, double mass) {
  const int n = static_cast<int>(offdiag.size()) + 1;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    J(i, i + 1) = offdiag[i];
    J(i + 1, i) = offdiag[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    r.nodes[i] = es.eigenvalues()[i];
    r.weights[i] = mass * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
  }
  // Symmetrize: the rules used here are even, and exact +-x pairing keeps
  // odd moments at zero.
  for (int i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (r.nodes[n - 1 - i] - r.nodes[i]);
    const double w = 0.5 * (r.weights[n - 1 - i] + r.weights[i]);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

}  // namespace

Rule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  Eigen::VectorXd off(n - 1);
  for (int k = 1; k < n; ++k) off[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
  Rule r = golub_welsch(off, 2.0);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  for (int i = 0; i < n; ++i) {
    r.nodes[i] = mid + half * r.nodes[i];
    r.weights[i] *= half;
  }
  return r;
}

Rule gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: n must be >= 1");
  Eigen::VectorXd off(n - 1);
  for (int k = 1; k < n; ++k) off[k - 1] = std::sqrt(static_cast<double>(k));
  return golub_welsch(off, std::sqrt(2.0 * std::numbers::pi));
}

double box_power_integral(double hx, double hy, double hz, double gamma) {
  if (gamma <= -3.0) throw std::invalid_argument("box_power_integral: gamma <= -3");
  // Pyramid over the face x = hx: points t * (hx, y, z), t in [0, 1]. The
  // Jacobian is hx * t^2, so the pyramid contributes
  //   hx / (gamma + 3) * int_face |(hx, y, z)|^gamma dy dz.
  static const Rule g = gauss_legendre(24, -1.0, 1.0);
  auto face = [&](double h, double p, double q) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      for (std::size_t j = 0; j < g.nodes.size(); ++j) {
        const double y = p * g.nodes[i];
        const double z = q * g.nodes[j];
        s += g.weights[i] * g.weights[j] * std::pow(h * h + y * y + z * z, 0.5 * gamma);
      }
    }
    return s * p * q * h / (gamma + 3.0);
  };
  return 2.0 * (face(hx, hy, hz) + face(hy, hx, hz) + face(hz, hx, hy));
}

}  // namespace alab::quadrature
