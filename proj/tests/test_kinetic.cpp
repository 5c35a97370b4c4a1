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
using namespace alab::kinetic;

namespace {

const double kTolStep = 1e-10;

const collision::AssembledL& op12() { return alab::testing::hard_sphere_12(); }

PerturbationField homogeneous(const GridPtr& g, const SpatialGrid& s, double eps,
                              const Eigen::VectorXd& column) {
  PerturbationField f(g, s, eps);
  f.values = column.replicate(1, static_cast<Eigen::Index>(s.points()));
  return f;
}

Eigen::VectorXd micro_column(const GridPtr& g, std::uint64_t seed) {
  const velocity::InvariantBasis basis(g);
  return basis.complement(alab::testing::random_block(*g, 1, seed)).col(0);
}

SolverConfig config(double eps, double dt, double t_end) {
  SolverConfig c;
  c.epsilon = eps;
  c.dt = dt;
  c.t_end = t_end;
  return c;
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_NOTHROW(config(0.25, 0.01, 1.0).validate());
  CHECK_THROWS_AS(config(0.3, 0.01, 1.0).validate(), ConfigError);
  CHECK_THROWS_AS(config(0.0, 0.01, 1.0).validate(), ConfigError);
  CHECK_THROWS_AS(config(0.1, 0.0, 1.0).validate(), ConfigError);
  CHECK_THROWS_AS(config(0.1, 0.01, -1.0).validate(), ConfigError);
  CHECK(config(0.1, 0.01, 1.0).steps() == 100);
  CHECK(config(0.1, 0.3, 0.0).steps() == 0);
  CHECK(parse_mode("nonlinear") == Mode::nonlinear);
  CHECK(parse_splitting(to_string(Splitting::strang)) == Splitting::strang);
  CHECK_THROWS_AS(parse_mode("semilinear"), ConfigError);
}

TEST_CASE("equilibrium and homogeneous null data are fixed points") {
  const auto& op = op12();
  const SpatialGrid s{1, 8};
  const PerturbationField zero(op.grid, s, 0.1);
  CHECK(imex_step(zero, config(0.1, 0.01, 1.0), op).values.cwiseAbs().maxCoeff() == 0.0);

  Eigen::VectorXd null_col(static_cast<Eigen::Index>(op.grid->size()));
  for (std::size_t k = 0; k < op.grid->size(); ++k) {
    const auto& v = op.grid->node(k);
    null_col[static_cast<Eigen::Index>(k)] =
        (0.3 - 0.5 * v[1] + 0.2 * velocity::norm2(v)) * velocity::sqrt_maxwellian(v);
  }
  const auto f = homogeneous(op.grid, s, 0.1, null_col);
  for (const Splitting sp : {Splitting::lie, Splitting::strang}) {
    auto cfg = config(0.1, 0.01, 1.0);
    cfg.splitting = sp;
    const auto g = imex_step(f, cfg, op);
    CHECK((g.values - f.values).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("transport is an isometry and the collision solve contracts") {
  const auto& op = op12();
  const SpatialGrid s{1, 16};
  ImexStepper stepper(config(0.05, 0.02, 1.0), op, nullptr, s);
  const auto f = alab::testing::random_field(op.grid, s, 0.05, 11);
  PerturbationField moved = f;
  moved.values = stepper.transport(f.values, 0.37);
  CHECK(std::abs(l2_norm(moved) - l2_norm(f)) <= 1e-12 * l2_norm(f));
  PerturbationField back = moved;
  back.values = stepper.transport(moved.values, -0.37);
  CHECK((back.values - f.values).cwiseAbs().maxCoeff() <= 1e-12);

  // Operator-norm check of the factored solve on random vectors.
  const Eigen::MatrixXd b = alab::testing::random_block(*op.grid, 20, 12);
  const Eigen::MatrixXd x = stepper.collision_solve(b);
  const Eigen::Map<const Eigen::VectorXd> w(op.grid->weights().data(),
                                            static_cast<Eigen::Index>(op.grid->size()));
  for (Eigen::Index c = 0; c < b.cols(); ++c) {
    const double nb = std::sqrt((w.array() * b.col(c).array().square()).sum());
    const double nx = std::sqrt((w.array() * x.col(c).array().square()).sum());
    CHECK(nx <= nb + kTolStep);
  }
  // It really solves (I + (dt/eps) L) x = b.
  const Eigen::MatrixXd r = x + (0.02 / 0.05) * (op.matrix * x) - b;
  CHECK(alab::testing::rel_diff(r + b, b) <= 1e-10);
}

TEST_CASE("linearized steps do not increase the L2 norm") {
  const auto& op = op12();
  const SpatialGrid s{1, 16};
  for (const Splitting sp : {Splitting::lie, Splitting::strang}) {
    auto cfg = config(0.1, 0.01, 0.2);
    cfg.splitting = sp;
    ImexStepper stepper(cfg, op, nullptr, s);
    PerturbationField f = alab::testing::random_field(op.grid, s, 0.1, 21);
    for (int i = 0; i < 20; ++i) {
      const auto g = stepper.step(f);
      CHECK(l2_norm(g) <= l2_norm(f) + kTolStep);
      f = g;
    }
  }
}

TEST_CASE("well-prepared data") {
  const GridPtr g = op12().grid;
  const SpatialGrid s{1, 16};
  CHECK(well_prepared_data(HydroState(s), g, 0.1).values.cwiseAbs().maxCoeff() == 0.0);

  HydroState h(s);
  for (std::size_t p = 0; p < s.points(); ++p)
    h.rho()[static_cast<Eigen::Index>(p)] = std::sin(2.0 * std::numbers::pi * s.coordinate(p)[0]);
  const auto f = well_prepared_data(h, g, 0.1);
  CHECK(hydro::global_conservation_residual(f).cwiseAbs().maxCoeff() <= 1e-8);

  const HydroState wave = acoustic::sound_wave(s, 0.2, 2);
  const auto back = hydro::project_P(well_prepared_data(wave, g, 0.1)).fields;
  CHECK((back.fields - wave.fields).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("run_simulation contracts") {
  const auto& op = op12();
  const SpatialGrid s{1, 8};
  const auto f0 = well_prepared_data(acoustic::sound_wave(s, 1e-2), op.grid, 0.1);

  const auto r0 = run_simulation(config(0.1, 0.01, 0.0), f0, op);
  REQUIRE(r0.samples.size() == 1);
  REQUIRE(r0.snapshots.size() == 1);
  CHECK((r0.snapshots[0].values - f0.values).cwiseAbs().maxCoeff() == 0.0);

  auto cfg = config(0.1, 0.01, 0.1);
  cfg.cadence = 2;
  const auto a = run_simulation(cfg, f0, op);
  const auto b = run_simulation(cfg, f0, op);
  REQUIRE(a.snapshots.size() == 6);
  CHECK(a.samples.back().t == doctest::Approx(0.1));
  for (std::size_t i = 0; i < a.snapshots.size(); ++i)
    CHECK((a.snapshots[i].values.array() == b.snapshots[i].values.array()).all());
  for (std::size_t i = 1; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].l2 <= a.samples[i - 1].l2 + kTolStep);
    CHECK(a.samples[i].drift.cwiseAbs().maxCoeff() <= 1e-8 * a.samples[i].t);
  }

  // Observer sees every recorded sample.
  std::size_t seen = 0;
  RunOptions opts;
  opts.keep_snapshots = false;
  opts.observer = [&](const StepSample&, const PerturbationField&) { ++seen; };
  const auto c = run_simulation(cfg, f0, op, nullptr, opts);
  CHECK(seen == c.samples.size());
  CHECK(c.snapshots.empty());

  // Nonzero mass is inadmissible.
  Eigen::VectorXd root(static_cast<Eigen::Index>(op.grid->size()));
  for (std::size_t k = 0; k < op.grid->size(); ++k)
    root[static_cast<Eigen::Index>(k)] = velocity::sqrt_maxwellian(op.grid->node(k));
  const auto massive = homogeneous(op.grid, s, 0.1, root);
  CHECK_THROWS_AS(run_simulation(cfg, massive, op), InadmissibleInitialData);
}

TEST_CASE("uniform in epsilon stability") {
  const auto& op = op12();
  const SpatialGrid s{1, 16};
  const auto h = acoustic::sound_wave(s, 1e-2);
  for (const double eps : {0.2, 0.1, 0.05, 0.025}) {
    const auto run = run_simulation(config(eps, 0.01, 0.5), well_prepared_data(h, op.grid, eps), op);
    for (std::size_t i = 1; i < run.samples.size(); ++i) {
      CHECK(std::isfinite(run.samples[i].l2));
      CHECK(run.samples[i].l2 <= run.samples[i - 1].l2 + kTolStep);
    }
  }
}

TEST_CASE("homogeneous microscopic data relaxes at the coercivity rate") {
  const auto& op = op12();
  const double delta = collision::coercivity_delta(op).delta;
  REQUIRE(delta > 0.0);
  const SpatialGrid s{1, 2};
  const double eps = 0.1;
  const auto f0 = homogeneous(op.grid, s, eps, micro_column(op.grid, 31));
  const auto run = run_simulation(config(eps, 0.001, 0.3), f0, op);
  const double m0 = run.samples.front().micro_nu;
  REQUIRE(m0 > 0.0);
  for (const auto& smp : run.samples)
    CHECK(smp.micro_nu <= m0 * std::exp(-delta * smp.t / eps) + kTolStep);
}

TEST_CASE("nonlinear mode") {
  const auto& op = op12();
  const GridPtr g = op.grid;
  const collision::GammaOperator gamma(g, collision::KernelSpec{});
  const SpatialGrid s{1, 2};

  auto cfg = config(0.1, 0.01, 0.02);
  cfg.mode = Mode::nonlinear;
  const auto f0 = well_prepared_data(acoustic::sound_wave(s, 1e-2), g, 0.1);
  const auto run = run_simulation(cfg, f0, op, &gamma);
  CHECK(run.samples.size() == 3);
  CHECK(run.positivity_violations == 0);
  CHECK(run.samples.back().positivity_min > 0.0);

  // One explicit step matches a hand-built Lie step.
  const auto step = imex_step(f0, cfg, op, &gamma);
  ImexStepper st(cfg, op, &gamma, s);
  const Eigen::MatrixXd moved = st.transport(f0.values, cfg.dt);
  const Eigen::MatrixXd rhs = moved + cfg.dt * gamma.quadratic(moved);
  const Eigen::MatrixXd expect =
      (Eigen::MatrixXd::Identity(op.matrix.rows(), op.matrix.cols()) + (cfg.dt / 0.1) * op.matrix)
          .partialPivLu()
          .solve(rhs);
  CHECK(alab::testing::rel_diff(step.values, expect) <= 1e-10);

  // Data with mu + eps sqrt(mu) f < 0 somewhere is rejected.
  const auto big = well_prepared_data(acoustic::sound_wave(s, 30.0), g, 0.1);
  CHECK(positivity_min(big) < 0.0);
  CHECK_THROWS_AS(run_simulation(cfg, big, op, &gamma), InadmissibleInitialData);
  CHECK_THROWS_AS(run_simulation(cfg, f0, op, nullptr), ConfigError);
}

TEST_CASE("field dump round trip") {
  const GridPtr g = op12().grid;
  const SpatialGrid s{1, 8};
  const auto f = alab::testing::random_field(g, s, 0.05, 41);
  std::stringstream ss;
  write_field_dump(ss, f, 1.25);
  double t = 0.0;
  const auto back = read_field_dump(ss, g, &t);
  CHECK(t == 1.25);
  CHECK(back.epsilon == 0.05);
  CHECK(back.space == s);
  CHECK((back.values.array() == f.values.array()).all());

  std::stringstream truncated(ss.str().substr(0, 20));
  CHECK_THROWS_AS(read_field_dump(truncated, g), FormatError);
}
