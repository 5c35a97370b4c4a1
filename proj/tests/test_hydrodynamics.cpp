#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "alab/acoustic_solver.hpp"
#include "alab/errors.hpp"
#include "alab/hydrodynamics.hpp"
#include "alab/kinetic_solver.hpp"
#include "support.hpp"

using namespace alab;
using velocity::Vec3;

namespace {

const SpatialGrid kLine{1, 8};

GridPtr grid12() { return alab::testing::hard_sphere_12().grid; }

PerturbationField constant_in_x(const GridPtr& g, const SpatialGrid& s,
                                double (*fn)(const Vec3&)) {
  PerturbationField f(g, s, 0.1);
  for (std::size_t k = 0; k < g->size(); ++k)
    f.values.row(static_cast<Eigen::Index>(k)).setConstant(fn(g->node(k)));
  return f;
}

double sqrt_mu(const Vec3& v) { return velocity::sqrt_maxwellian(v); }
double energy_mode(const Vec3& v) { return (0.5 * velocity::norm2(v) - 1.5) * sqrt_mu(v); }
double shear(const Vec3& v) { return v[0] * v[1] * sqrt_mu(v); }

// Streaming term v . grad_x f of a 1-D field by spectral differentiation.
Eigen::MatrixXd stream(const PerturbationField& f) {
  const spectral::RealFft fft(f.space, static_cast<int>(f.vgrid->size()));
  const Eigen::MatrixXd d = spectral::derivative(fft, spectral::modes(f.space), f.values, 0);
  Eigen::MatrixXd out = d;
  for (std::size_t k = 0; k < f.vgrid->size(); ++k)
    out.row(static_cast<Eigen::Index>(k)) *= f.vgrid->node(k)[0];
  return out;
}

}  // namespace

TEST_CASE("projection examples") {
  const GridPtr g = grid12();
  {
    const auto f = constant_in_x(g, kLine, sqrt_mu);
    const auto pr = hydro::project_P(f);
    CHECK((pr.pf.values - f.values).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((pr.fields.rho().array() - 1.0).abs().maxCoeff() <= 1e-12);
    CHECK(pr.fields.fields.bottomRows(4).cwiseAbs().maxCoeff() <= 1e-12);
  }
  {
    const auto f = constant_in_x(g, kLine, energy_mode);
    const auto pr = hydro::project_P(f);
    CHECK((pr.pf.values - f.values).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((pr.fields.theta().array() - 1.0).abs().maxCoeff() <= 1e-12);
    CHECK(pr.fields.fields.topRows(4).cwiseAbs().maxCoeff() <= 1e-12);
  }
  {
    const auto f = constant_in_x(g, kLine, shear);
    const auto pr = hydro::project_P(f);
    CHECK(pr.pf.values.cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(pr.fields.fields.cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("projection is idempotent, orthogonal and round-trips through the fields") {
  const GridPtr g = grid12();
  const auto f = alab::testing::random_field(g, kLine, 0.1, 4);
  const auto pr = hydro::project_P(f);
  CHECK((hydro::project_P(pr.pf).pf.values - pr.pf.values).cwiseAbs().maxCoeff() <= 1e-6);
  const velocity::InvariantBasis basis(g);
  CHECK(basis.moments(f.values - pr.pf.values).cwiseAbs().maxCoeff() <= 1e-6);
  const auto back = hydro::reconstruct(pr.fields, g, 0.1);
  CHECK((back.values - pr.pf.values).cwiseAbs().maxCoeff() <= 1e-6);

  const PerturbationField other(alab::testing::small_grid(8), kLine, 0.1);
  CHECK_THROWS_AS(require_same_field_grids(f, other), GridMismatch);
}

TEST_CASE("abc map reproduces P f") {
  const GridPtr g = grid12();
  const auto f = alab::testing::random_field(g, kLine, 0.1, 8);
  const auto pr = hydro::project_P(f);
  const Eigen::MatrixXd abc = hydro::to_abc(pr.fields, g);
  Eigen::MatrixXd rebuilt(pr.pf.values.rows(), pr.pf.values.cols());
  for (std::size_t k = 0; k < g->size(); ++k) {
    const Vec3& v = g->node(k);
    const auto r = static_cast<Eigen::Index>(k);
    rebuilt.row(r) = (abc.row(0) + v[0] * abc.row(1) + v[1] * abc.row(2) + v[2] * abc.row(3) +
                      velocity::norm2(v) * abc.row(4)) *
                     sqrt_mu(v);
  }
  CHECK(alab::testing::rel_diff(rebuilt, pr.pf.values) <= 1e-10);
}

TEST_CASE("13-moment projection") {
  const GridPtr g = grid12();
  const hydro::MomentBasis basis(g);
  CHECK(basis.condition() < 1e12);
  CHECK(hydro::MomentBasis::pair_index(0, 1) == hydro::MomentBasis::pair_index(1, 0));
  const Eigen::MatrixXd& phi = basis.functions();

  // A basis element projects to itself.
  const Eigen::MatrixXd e = phi.col(10);
  CHECK((hydro::project_13moment(e, basis) - e).cwiseAbs().maxCoeff() <= 1e-10);

  // The complement of the span projects to zero.
  const Eigen::MatrixXd f = alab::testing::random_block(*g, 3, 12);
  const Eigen::MatrixXd comp = f - hydro::project_13moment(f, basis);
  CHECK(hydro::project_13moment(comp, basis).cwiseAbs().maxCoeff() <= 1e-10);

  // Pythagoras in the weighted inner product.
  const Eigen::MatrixXd par = hydro::project_13moment(f, basis);
  for (Eigen::Index c = 0; c < f.cols(); ++c) {
    const double total = velocity::weighted_inner(*g, f.col(c), f.col(c));
    const double a = velocity::weighted_inner(*g, par.col(c), par.col(c));
    const double b = velocity::weighted_inner(*g, comp.col(c), comp.col(c));
    CHECK(std::abs(total - a - b) <= 1e-6 * total);
  }

  // The orthonormal invariant block.
  const Eigen::MatrixXd& q = basis.invariants();
  Eigen::MatrixXd gram(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) gram(i, j) = velocity::weighted_inner(*g, q.col(i), q.col(j));
  CHECK((gram - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() <= 1e-6);

  CHECK_THROWS_AS(hydro::MomentBasis(g, 1.0), IllConditionedGram);
}

TEST_CASE("global conservation residual examples") {
  const GridPtr g = grid12();
  CHECK(hydro::global_conservation_residual(PerturbationField(g, kLine, 0.1)).cwiseAbs().maxCoeff() == 0.0);

  PerturbationField s(g, kLine, 0.1);
  for (std::size_t p = 0; p < kLine.points(); ++p) {
    const double x = kLine.coordinate(p)[0];
    for (std::size_t k = 0; k < g->size(); ++k)
      s.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(p)) =
          std::sin(2.0 * std::numbers::pi * x) * sqrt_mu(g->node(k));
  }
  CHECK(hydro::global_conservation_residual(s).cwiseAbs().maxCoeff() <= 1e-12);

  const auto r = hydro::global_conservation_residual(constant_in_x(g, kLine, sqrt_mu));
  CHECK(std::abs(r[0] - 1.0) <= 1e-5);
  CHECK(r.segment(1, 3).cwiseAbs().maxCoeff() <= 1e-12);
  // The energy moment of sqrt(mu) vanishes only up to quadrature error.
  CHECK(std::abs(r[4]) <= 1e-5);
}

TEST_CASE("local conservation residuals") {
  const GridPtr g = grid12();
  const PerturbationField zero(g, kLine, 0.1);
  const auto r0 = hydro::local_conservation_residual(zero, zero, 0.01);
  CHECK(r0.a == 0.0);
  CHECK(r0.b == 0.0);
  CHECK(r0.c == 0.0);

  const auto m = constant_in_x(g, kLine, shear);
  const auto rm = hydro::local_conservation_residual(m, m, 0.01);
  CHECK(rm.fields.cwiseAbs().maxCoeff() <= 1e-12);

  // Backward difference of a solver trajectory: residual shrinks like dt.
  const auto& op = alab::testing::hard_sphere_12();
  const HydroState h = acoustic::sound_wave(kLine, 1e-3);
  const PerturbationField f0 = kinetic::well_prepared_data(h, g, 0.1);
  auto final_residual = [&](double dt) {
    kinetic::SolverConfig cfg;
    cfg.epsilon = 0.1;
    cfg.dt = dt;
    cfg.t_end = 0.2;
    kinetic::ImexStepper stepper(cfg, op, nullptr, kLine);
    PerturbationField prev = f0, now = f0;
    for (std::size_t i = 0; i < cfg.steps(); ++i) {
      prev = now;
      now = stepper.step(now);
    }
    const auto r = hydro::local_conservation_residual(now, prev, dt);
    return std::sqrt(r.a * r.a + r.b * r.b + r.c * r.c);
  };
  const double coarse = final_residual(0.02);
  const double fine = final_residual(0.01);
  CHECK(fine < coarse);
  CHECK(coarse / fine == doctest::Approx(2.0).epsilon(0.25));
}

TEST_CASE("macroscopic coefficients") {
  const GridPtr g = grid12();
  const auto& op = alab::testing::hard_sphere_12();
  const hydro::MomentBasis basis(g);
  const PerturbationField zero(g, kLine, 0.1);
  const auto z = hydro::macroscopic_coefficients(zero, zero, 0.01, basis, op, nullptr);
  CHECK(z.balance.cwiseAbs().maxCoeff() == 0.0);

  const auto f_prev = alab::testing::random_field(g, kLine, 0.1, 51);
  const auto f_now = alab::testing::random_field(g, kLine, 0.1, 52);
  const double dt = 0.01;
  const auto mc = hydro::macroscopic_coefficients(f_now, f_prev, dt, basis, op, nullptr);
  CHECK(mc.nonlinear.cwiseAbs().maxCoeff() == 0.0);

  // Reassembled coefficients equal the 13-moment projection of the full
  // discrete residual (f_now - f_prev)/dt + v.grad f + L f / eps.
  const Eigen::MatrixXd residual = (f_now.values - f_prev.values) / dt + stream(f_now) +
                                   op.matrix * f_now.values / f_now.epsilon;
  const Eigen::MatrixXd direct = hydro::project_13moment(residual, basis);
  CHECK(alab::testing::rel_diff(basis.functions() * mc.balance, direct) <= 1e-6);
}

TEST_CASE("hydro csv layout") {
  HydroState h(kLine);
  h.rho().setConstant(0.5);
  std::ostringstream os;
  hydro::write_hydro_csv(os, h);
  const std::string s = os.str();
  CHECK(s.rfind("index,x,rho,u1,u2,u3,theta\n", 0) == 0);
  CHECK(s.find("\n1,0.125,0.5,0,0,0,0\n") != std::string::npos);
}
