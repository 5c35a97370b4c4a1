#include <lapacke.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "alab/collision_ops.hpp"
#include "alab/errors.hpp"

namespace alab::collision {

namespace {

// Smallest eigenvalue of the symmetric pencil (A, B), B positive definite.
// Only the lower triangles are referenced; both are overwritten.
double smallest_generalized(Eigen::MatrixXd& A, Eigen::MatrixXd& B) {
  const lapack_int n = static_cast<lapack_int>(A.rows());
  lapack_int found = 0;
  std::vector<double> w(static_cast<std::size_t>(n));
  std::vector<double> z(static_cast<std::size_t>(n));
  std::vector<lapack_int> ifail(static_cast<std::size_t>(n));
  const lapack_int info =
      LAPACKE_dsygvx(LAPACK_COL_MAJOR, 1, 'N', 'I', 'L', n, A.data(), n, B.data(), n, 0.0, 0.0,
                     1, 1, 0.0, &found, w.data(), z.data(), n, ifail.data());
  if (info != 0 || found < 1) {
    std::ostringstream os;
    os << "dsygvx failed (info = " << info << ")";
    throw SolveFailure(os.str());
  }
  return w[0];
}

}  // namespace

double min_eigenvalue(const AssembledL& op) {
  Eigen::MatrixXd S = op.symmetric_form();
  S = 0.5 * (S + S.transpose()).eval();
  const lapack_int n = static_cast<lapack_int>(S.rows());
  lapack_int found = 0;
  std::vector<double> w(static_cast<std::size_t>(n));
  std::vector<double> z(static_cast<std::size_t>(n));
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(n));
  const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'N', 'I', 'L', n, S.data(), n, 0.0,
                                         0.0, 1, 1, 0.0, &found, w.data(), z.data(), n,
                                         isuppz.data());
  if (info != 0 || found < 1) {
    std::ostringstream os;
    os << "dsyevr failed (info = " << info << ")";
    throw SolveFailure(os.str());
  }
  return w[0];
}

CoercivityReport coercivity_delta(const AssembledL& op) {
  const auto& grid = *op.grid;
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::VectorXd sw(n);
  for (Eigen::Index k = 0; k < n; ++k) sw[k] = std::sqrt(grid.weight(k));

  // In y = W^{1/2} g the inner product is Euclidean, so the complement of
  // the invariants is spanned by the trailing columns of Q from a QR of
  // W^{1/2} Phi.
  const velocity::InvariantBasis basis(op.grid);
  const Eigen::MatrixXd wphi = sw.asDiagonal() * basis.functions();
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(wphi);
  const auto Q = qr.householderQ();

  Eigen::MatrixXd A = op.symmetric_form();
  A = 0.5 * (A + A.transpose()).eval();
  Eigen::MatrixXd B;
  if (op.kernel.family == Family::landau) {
    B = sw.cwiseInverse().asDiagonal() * op.sigma_form * sw.cwiseInverse().asDiagonal();
  } else {
    B = op.nu.asDiagonal();
  }
  A.applyOnTheLeft(Q.adjoint());
  A.applyOnTheRight(Q);
  B.applyOnTheLeft(Q.adjoint());
  B.applyOnTheRight(Q);

  const Eigen::Index m = n - 5;
  Eigen::MatrixXd At = A.bottomRightCorner(m, m);
  Eigen::MatrixXd Bt = B.bottomRightCorner(m, m);
  A.resize(0, 0);
  B.resize(0, 0);

  CoercivityReport r;
  r.delta = smallest_generalized(At, Bt);
  r.n_v = grid.size();
  r.kernel = op.kernel.tag();
  if (!(r.delta > 0.0)) {
    std::ostringstream os;
    os << "measured delta = " << r.delta << " for " << r.kernel;
    throw NonpositiveGap(os.str());
  }
  return r;
}

}  // namespace alab::collision
