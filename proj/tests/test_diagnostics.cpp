#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "alab/acoustic_solver.hpp"
#include "alab/diagnostics.hpp"
#include "alab/errors.hpp"
#include "alab/hydrodynamics.hpp"
#include "support.hpp"

using namespace alab;
using namespace alab::diagnostics;
using collision::Family;
using collision::KernelSpec;

namespace {

const collision::AssembledL& op12() { return alab::testing::hard_sphere_12(); }

KernelSpec kernel(Family fam, double gamma) {
  KernelSpec k;
  k.family = fam;
  k.gamma = gamma;
  return k;
}

PerturbationField pure_macro(const GridPtr& g, const SpatialGrid& s) {
  return kinetic::well_prepared_data(acoustic::sound_wave(s, 0.1), g, 0.1);
}

PerturbationField pure_micro(const GridPtr& g, const SpatialGrid& s, std::uint64_t seed) {
  auto f = alab::testing::random_field(g, s, 0.1, seed);
  f.values = velocity::InvariantBasis(g).complement(f.values);
  return f;
}

double relative(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace

TEST_CASE("weight law dispatch") {
  CHECK(weight_law(kernel(Family::boltzmann, 1.0)) == WeightLaw::hard);
  CHECK(weight_law(kernel(Family::boltzmann, 0.0)) == WeightLaw::hard);
  CHECK(weight_law(kernel(Family::boltzmann, -2.0)) == WeightLaw::soft);
  CHECK(weight_law(kernel(Family::landau, -3.0)) == WeightLaw::landau);
  CHECK(to_string(WeightLaw::soft) == "soft");

  CHECK(weight_exponent(kernel(Family::boltzmann, 1.0), 3.0, 2) == 3.0);
  CHECK(weight_exponent(kernel(Family::boltzmann, -2.0), 3.0, 1) == 4.0);
  CHECK(weight_exponent(kernel(Family::boltzmann, -0.5), 1.0, 2) == -0.5);
  CHECK(weight_exponent(kernel(Family::landau, -3.0), 3.0, 2) == 1.0);

  // The functional uses the same exponents term by term.
  const auto f = alab::testing::random_field(op12().grid, SpatialGrid{1, 4}, 0.1, 2);
  const auto terms = energy_terms(f, 1, 2.0, kernel(Family::boltzmann, -2.0));
  REQUIRE(terms.weighted.size() == 4);
  CHECK(terms.weighted[0].exponent == 4.0);
  for (std::size_t i = 1; i < 4; ++i) CHECK(terms.weighted[i].exponent == 2.0);
  const auto lterms = energy_terms(f, 1, 2.0, kernel(Family::landau, -3.0));
  CHECK(lterms.weighted[0].exponent == 2.0);
  CHECK(lterms.weighted[1].exponent == 1.0);
}

TEST_CASE("zero field and quadratic scaling") {
  const auto& op = op12();
  const SpatialGrid s{1, 8};
  const auto w = DissipationWeight::from_operator(op);
  const PerturbationField zero(op.grid, s, 0.1);
  CHECK(instant_energy(zero, 2, 1.0, op.kernel) == 0.0);
  CHECK(dissipation_rate(zero, 0.1, 2, 1.0, op.kernel, w) == 0.0);

  const auto f = alab::testing::random_field(op.grid, s, 0.1, 3);
  PerturbationField f2 = f;
  f2.values *= 2.0;
  CHECK(instant_energy(f2, 2, 1.0, op.kernel) == 4.0 * instant_energy(f, 2, 1.0, op.kernel));
  CHECK(dissipation_rate(f2, 0.1, 2, 1.0, op.kernel, w) ==
        4.0 * dissipation_rate(f, 0.1, 2, 1.0, op.kernel, w));
}

TEST_CASE("alpha sum of a sine profile") {
  const GridPtr g = op12().grid;
  const SpatialGrid s{1, 16};
  PerturbationField f(g, s, 0.1);
  for (std::size_t p = 0; p < s.points(); ++p)
    f.values.col(static_cast<Eigen::Index>(p))
        .setConstant(std::sin(2.0 * std::numbers::pi * s.coordinate(p)[0]));
  double mass = 0.0;
  for (std::size_t k = 0; k < g->size(); ++k) mass += g->weight(k);
  const double k2 = 4.0 * std::numbers::pi * std::numbers::pi;
  const double expect = (1.0 + k2 + k2 * k2) * 0.5 * mass;
  const auto terms = energy_terms(f, 1, 0.0, kernel(Family::boltzmann, 1.0));
  CHECK(relative(terms.alpha_sum, expect) <= 1e-6);
}

TEST_CASE("epsilon scaling of the dissipation rate") {
  const auto& op = op12();
  const SpatialGrid s{1, 8};
  const auto w = DissipationWeight::from_operator(op);

  const auto m = pure_macro(op.grid, s);
  const double a = dissipation_rate(m, 0.2, 2, 1.0, op.kernel, w) / 0.2;
  const double b = dissipation_rate(m, 0.05, 2, 1.0, op.kernel, w) / 0.05;
  CHECK(relative(a, b) <= 1e-6);

  const auto r = pure_micro(op.grid, s, 5);
  const double d1 = dissipation_rate(r, 0.1, 2, 1.0, op.kernel, w);
  const double d2 = dissipation_rate(r, 0.05, 2, 1.0, op.kernel, w);
  CHECK(relative(d2, 2.0 * d1) <= 1e-12);
  const auto terms = dissipation_terms(r, 0.1, 2, 1.0, op.kernel, w);
  CHECK(terms.macro <= 1e-12 * terms.micro);
}

TEST_CASE("dissipation splits into hydrodynamic and microscopic parts") {
  const auto& op = op12();
  const SpatialGrid s{1, 8};
  const auto w = DissipationWeight::from_operator(op);
  const auto f = alab::testing::random_field(op.grid, s, 0.1, 7);
  PerturbationField pf = f, mf = f;
  const velocity::InvariantBasis basis(op.grid);
  pf.values = basis.project(f.values);
  mf.values = f.values - pf.values;
  const auto all = dissipation_terms(f, 0.1, 2, 1.0, op.kernel, w);
  const auto hp = dissipation_terms(pf, 0.1, 2, 1.0, op.kernel, w);
  const auto hm = dissipation_terms(mf, 0.1, 2, 1.0, op.kernel, w);
  // Alpha-only sub-sums.
  const double lhs = all.epsilon * all.macro + all.micro / all.epsilon;
  const double rhs = hp.epsilon * hp.macro + hp.micro / hp.epsilon + hm.epsilon * hm.macro +
                     hm.micro / hm.epsilon;
  CHECK(relative(lhs, rhs) <= 1e-6);
}

TEST_CASE("dissipation weights from the kernel") {
  const GridPtr g = op12().grid;
  const auto hard = DissipationWeight::from_kernel(*g, kernel(Family::boltzmann, 1.0));
  CHECK((hard.nu - op12().nu).cwiseAbs().maxCoeff() <= 1e-12 * op12().nu.maxCoeff());
  const auto lw = DissipationWeight::from_kernel(*g, kernel(Family::landau, -3.0));
  CHECK(lw.sigma_form.rows() == static_cast<Eigen::Index>(g->size()));

  // On homogeneous data the Landau microscopic term is the sigma form.
  const SpatialGrid s{1, 4};
  PerturbationField r(g, s, 0.1);
  const Eigen::VectorXd col = pure_micro(g, s, 9).values.col(0);
  r.values = col.replicate(1, 4);
  const auto t = dissipation_terms(r, 0.1, 0, 0.0, kernel(Family::landau, -3.0), lw);
  CHECK(relative(t.micro, col.dot(lw.sigma_form * col)) <= 1e-12);
}

TEST_CASE("unsupported derivative orders") {
  const auto f = alab::testing::random_field(op12().grid, SpatialGrid{1, 4}, 0.1, 1);
  CHECK_THROWS_AS(instant_energy(f, 6, 1.0, op12().kernel), UnsupportedN);
  CHECK_THROWS_AS(instant_energy(f, -1, 1.0, op12().kernel), UnsupportedN);
  CHECK_NOTHROW(instant_energy(f, 5, 1.0, op12().kernel));
}

TEST_CASE("fitted order") {
  CHECK(fitted_order({0.2, 0.1, 0.05}, {3 * 0.04, 3 * 0.01, 3 * 0.0025}) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::isnan(fitted_order({0.1}, {0.5})));
  CHECK(std::isnan(fitted_order({0.2, 0.1}, {0.0, 0.0})));
}

TEST_CASE("energy monitor") {
  const auto& op = op12();
  const SpatialGrid s{1, 8};
  const auto w = DissipationWeight::from_operator(op);
  kinetic::SolverConfig cfg;
  cfg.epsilon = 0.1;
  cfg.dt = 0.01;
  cfg.t_end = 0.1;

  const auto zero = kinetic::run_simulation(cfg, PerturbationField(op.grid, s, 0.1), op);
  const auto mz = energy_monitor(zero, op.kernel, w, MonitorConfig{});
  for (const auto& r : mz.series) {
    CHECK(r.E == 0.0);
    CHECK(r.D == 0.0);
    CHECK(r.dEdt_plus_D == 0.0);
    CHECK(r.l2 == 0.0);
  }
  CHECK(mz.bounded);

  const auto run = kinetic::run_simulation(
      cfg, kinetic::well_prepared_data(acoustic::sound_wave(s, 1e-2), op.grid, 0.1), op);
  const auto mon = energy_monitor(run, op.kernel, w, MonitorConfig{});
  REQUIRE(mon.series.size() == 11);
  for (std::size_t i = 1; i < mon.series.size(); ++i)
    CHECK(mon.series[i].l2 <= mon.series[i - 1].l2 + 1e-10);
  for (const auto& r : mon.series) {
    CHECK(r.E >= 0.0);
    CHECK(r.D >= 0.0);
  }
  CHECK(mon.bounded);

  std::ostringstream os;
  write_energy_csv(os, mon.series);
  CHECK(os.str().rfind("t,E,D,dEdt_plus_D,l2,micro_nu,drift_mass,drift_mom1,drift_mom2,drift_mom3,"
                       "drift_energy,pos_min\n",
                       0) == 0);
}

TEST_CASE("convergence sweep") {
  const auto& op = op12();
  const SpatialGrid s{1, 8};
  kinetic::SolverConfig cfg;
  cfg.dt = 0.01;

  const auto degenerate = convergence_sweep({0.1}, cfg, HydroState(s), {0.1}, op);
  CHECK(degenerate.errors[0][0].total == 0.0);
  CHECK(std::isnan(degenerate.fitted_order));
  CHECK_FALSE(degenerate.warnings.empty());

  const auto zero = convergence_sweep({0.2, 0.1}, cfg, HydroState(s), {0.1}, op);
  CHECK(zero.errors[0][0].total == 0.0);
  CHECK(zero.errors[1][0].total == 0.0);
  CHECK(std::isnan(zero.fitted_order));

  const HydroState wave = acoustic::sound_wave(s, 1e-2);
  const auto serial = convergence_sweep({0.2, 0.1}, cfg, wave, {0.2, 0.4}, op);
  CHECK(serial.monotone());
  CHECK(serial.micro_monotone());
  CHECK(serial.fitted_order > 0.0);
  SweepOptions two;
  two.jobs = 2;
  const auto parallel = convergence_sweep({0.2, 0.1}, cfg, wave, {0.2, 0.4}, op, nullptr, two);
  for (std::size_t e = 0; e < 2; ++e)
    for (std::size_t p = 0; p < 2; ++p) CHECK(parallel.errors[e][p].total == serial.errors[e][p].total);

  CHECK_THROWS_AS(convergence_sweep({0.1, 0.2}, cfg, wave, {0.1}, op), ConfigError);
  CHECK_THROWS_AS(convergence_sweep({0.1}, cfg, wave, {0.015}, op), ConfigError);

  std::ostringstream os;
  write_sweep_csv(os, serial);
  const std::string csv = os.str();
  CHECK(csv.rfind("epsilon,t_probe,err_rho,err_u,err_theta,err_total\n", 0) == 0);
  CHECK(csv.find("# fitted_order,") != std::string::npos);
}
