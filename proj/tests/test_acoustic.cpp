#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>

#include "alab/acoustic_solver.hpp"
#include "alab/errors.hpp"

using namespace alab;
using namespace alab::acoustic;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

AcousticState random_state(const SpatialGrid& s, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n01;
  HydroState h(s);
  for (Eigen::Index j = 0; j < h.fields.cols(); ++j)
    for (Eigen::Index i = 0; i < h.fields.rows(); ++i) h.fields(i, j) = n01(rng);
  if (s.dim == 1) {
    h.fields.row(2).setZero();
    h.fields.row(3).setZero();
  }
  return from_hydro(h);
}

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

// Symbol of the acoustic system written out by hand.
Eigen::MatrixXd hand_symbol(const std::array<double, 3>& k) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(5, 5);
  for (int i = 0; i < 3; ++i) {
    a(0, 1 + i) = k[i];
    a(1 + i, 0) = k[i];
    a(1 + i, 4) = k[i];
    a(4, 1 + i) = 2.0 / 3.0 * k[i];
  }
  return a;
}

std::size_t mode_column(const SpatialGrid& s, std::array<int, 3> index) {
  const auto m = spectral::modes(s);
  for (std::size_t j = 0; j < m.size(); ++j)
    if (m[j].index == index) return j;
  FAIL("mode not stored");
  return 0;
}

}  // namespace

TEST_CASE("sound speed") { CHECK(sound_speed() == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-15)); }

TEST_CASE("symbol at k = 0") {
  const auto sym = symbol_eigen({0.0, 0.0, 0.0});
  CHECK(sym.matrix.cwiseAbs().maxCoeff() == 0.0);
  CHECK(sym.frequencies.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("frequencies agree with an independent diagonalization") {
  const double c = std::sqrt(5.0 / 3.0);
  for (const std::array<double, 3> k :
       {std::array<double, 3>{kTwoPi, 0, 0}, {0, -2 * kTwoPi, kTwoPi}, {3 * kTwoPi, kTwoPi, -kTwoPi}}) {
    const double kn = std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
    const Eigen::MatrixXd a = hand_symbol(k);
    CHECK((symbol_eigen(k).matrix - a).cwiseAbs().maxCoeff() <= 1e-14);

    Eigen::EigenSolver<Eigen::MatrixXd> es(a);
    std::vector<double> lam;
    for (int i = 0; i < 5; ++i) {
      CHECK(std::abs(es.eigenvalues()[i].imag()) <= 1e-10);
      lam.push_back(es.eigenvalues()[i].real());
    }
    std::sort(lam.begin(), lam.end());
    const std::vector<double> expect{-c * kn, 0.0, 0.0, 0.0, c * kn};
    const auto sym = symbol_eigen(k);
    for (int i = 0; i < 5; ++i) {
      CHECK(std::abs(lam[i] - expect[i]) <= 1e-10 * kn);
      CHECK(std::abs(sym.frequencies[i] - expect[i]) <= 1e-10 * kn);
    }
    // Eigenvectors span R^5 and diagonalize A.
    CHECK((sym.vectors * sym.inverse - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((sym.vectors * sym.frequencies.asDiagonal() * sym.inverse - a).cwiseAbs().maxCoeff() <=
          1e-12 * kn);
  }
  const auto s1 = symbol_eigen({kTwoPi, 0, 0}, 1);
  CHECK(s1.frequencies.size() == 3);
  CHECK(std::abs(s1.frequencies[2] - c * kTwoPi) <= 1e-10);
  CHECK(std::abs(s1.frequencies[1]) <= 1e-10);
}

TEST_CASE("zero-frequency vectors at k = (1,0,0)") {
  const Eigen::MatrixXd a = hand_symbol({kTwoPi, 0, 0});
  Eigen::VectorXd t2(5), t3(5), entropy(5);
  t2 << 0, 0, 1, 0, 0;
  t3 << 0, 0, 0, 1, 0;
  entropy << 1, 0, 0, 0, -1;
  CHECK((a * t2).norm() <= 1e-12);
  CHECK((a * t3).norm() <= 1e-12);
  CHECK((a * entropy).norm() <= 1e-12);
  // The solver's zero-frequency eigenvectors span the same space.
  const auto sym = symbol_eigen({kTwoPi, 0, 0});
  for (int i = 1; i <= 3; ++i) CHECK((a * sym.vectors.col(i)).norm() <= 1e-12);
}

TEST_CASE("trivial propagation") {
  const SpatialGrid s{3, 6};
  const auto x = random_state(s, 1);
  CHECK(max_abs(propagate(x, 0.0).coeffs - x.coeffs) == 0.0);
  const auto z = AcousticState::zero(s);
  CHECK(max_abs(propagate(z, 3.0).coeffs) == 0.0);
  CHECK(acoustic_energy(z, 1) == 0.0);
  AcousticState twice = x;
  twice.coeffs *= 2.0;
  CHECK(acoustic_energy(twice, 2) == doctest::Approx(4.0 * acoustic_energy(x, 2)).epsilon(1e-14));
}

TEST_CASE("energy is conserved") {
  for (const SpatialGrid s : {SpatialGrid{1, 32}, SpatialGrid{3, 8}}) {
    const auto x = random_state(s, 7);
    for (const double t : {0.1, 1.0, 10.0})
      for (const int sob : {0, 1, 2}) {
        const double e0 = acoustic_energy(x, sob);
        const double e1 = acoustic_energy(propagate(x, t), sob);
        CHECK(std::abs(e1 - e0) <= 1e-10 * e0);
      }
  }
}

TEST_CASE("energy matches the physical-space integral at s = 0") {
  const SpatialGrid s{3, 6};
  const auto x = random_state(s, 21);
  const HydroState h = to_hydro(x);
  const double np = static_cast<double>(s.points());
  const double direct = (h.fields.topRows(4).squaredNorm() + 1.5 * h.theta().squaredNorm()) / np;
  CHECK(acoustic_energy(x, 0) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("reversibility and group property") {
  const SpatialGrid s{3, 8};
  const auto x = random_state(s, 3);
  const double scale = max_abs(x.coeffs);
  CHECK(max_abs(propagate(propagate(x, 2.7), -2.7).coeffs - x.coeffs) <= 1e-10 * scale);
  CHECK(max_abs(propagate(x, 1.3).coeffs - propagate(propagate(x, 0.4), 0.9).coeffs) <=
        1e-10 * scale);
}

TEST_CASE("vorticity is frozen") {
  const SpatialGrid s{3, 6};
  AcousticState x = AcousticState::zero(s);
  // Transverse velocity at k = (1,0,0) and k = (0,2,0).
  x.coeffs(2, static_cast<Eigen::Index>(mode_column(s, {1, 0, 0}))) = {0.3, -0.2};
  x.coeffs(3, static_cast<Eigen::Index>(mode_column(s, {1, 0, 0}))) = {1.0, 0.5};
  x.coeffs(1, static_cast<Eigen::Index>(mode_column(s, {0, 2, 0}))) = {-0.7, 0.1};
  CHECK(max_abs(propagate(x, 4.2).coeffs - x.coeffs) <= 1e-12);
}

TEST_CASE("a right-moving sound mode advances its phase by c|k|t") {
  const SpatialGrid s{3, 6};
  const double c = std::sqrt(5.0 / 3.0);
  const auto col = static_cast<Eigen::Index>(mode_column(s, {1, 0, 0}));
  AcousticState x = AcousticState::zero(s);
  // (rho, u1, theta) = (1, c, 2/3) is the eigenvector of frequency +c|k|.
  x.coeffs(0, col) = 1.0;
  x.coeffs(1, col) = c;
  x.coeffs(4, col) = 2.0 / 3.0;
  for (const double t : {0.1, 1.0, 7.5}) {
    const std::complex<double> phase = std::exp(std::complex<double>(0.0, -c * kTwoPi * t));
    CHECK(max_abs(propagate(x, t).coeffs - phase * x.coeffs) <= 1e-12);
  }

  // The physical plane wave moves with speed c.
  const SpatialGrid line{1, 32};
  const HydroState h0 = sound_wave(line, 0.5);
  const HydroState h1 = to_hydro(propagate(from_hydro(h0), 0.3));
  for (std::size_t p = 0; p < line.points(); ++p) {
    const double x1 = line.coordinate(p)[0];
    const double expect = 0.5 * std::cos(kTwoPi * (x1 - c * 0.3));
    CHECK(std::abs(h1.rho()[static_cast<Eigen::Index>(p)] - expect) <= 1e-12);
  }
}

TEST_CASE("hydro round trip and coefficient csv") {
  const SpatialGrid s{3, 4};
  const auto x = random_state(s, 5);
  CHECK(max_abs(from_hydro(to_hydro(x)).coeffs - x.coeffs) <= 1e-12);

  std::stringstream ss;
  write_coefficients_csv(ss, x);
  const auto back = read_coefficients_csv(ss, s);
  CHECK(max_abs(back.coeffs - x.coeffs) == 0.0);

  std::istringstream bad("nope\n");
  CHECK_THROWS_AS(read_coefficients_csv(bad, s), FormatError);
  std::istringstream range("k_index,field,re,im\n999,rho,1,0\n");
  CHECK_THROWS_AS(read_coefficients_csv(range, s), FormatError);
}
