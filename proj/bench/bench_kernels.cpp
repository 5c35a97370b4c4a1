// OpenMP kernels against their serial references.

#include <benchmark/benchmark.h>

#include <random>

#include "alab/detail/collision_kernels.hpp"
#include "alab/kinetic_solver.hpp"
#include "alab/acoustic_solver.hpp"

using namespace alab;
namespace det = alab::collision::detail;

namespace {

GridPtr grid(int n) { return velocity::build_grid(6.0, {n, n, n}, velocity::QuadratureRule::uniform_midpoint, {1e-1}); }

std::vector<double> noise(std::size_t count) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  std::vector<double> v(count);
  for (auto& x : v) x = n01(rng);
  return v;
}

template <bool Parallel>
void rows(benchmark::State& st) {
  const GridPtr g = grid(static_cast<int>(st.range(0)));
  const det::Geometry geo(*g, collision::KernelSpec{});
  Eigen::MatrixXd M(static_cast<Eigen::Index>(g->size()), static_cast<Eigen::Index>(g->size()));
  for (auto _ : st) {
    if constexpr (Parallel) det::boltzmann_rows_omp(geo, M);
    else det::boltzmann_rows_serial(geo, M);
    benchmark::DoNotOptimize(M.data());
  }
  st.counters["n_v"] = static_cast<double>(g->size());
}

template <bool Parallel>
void gain(benchmark::State& st) {
  const GridPtr g = grid(static_cast<int>(st.range(0)));
  const int m = static_cast<int>(st.range(1));
  const det::Geometry geo(*g, collision::KernelSpec{});
  const auto phi = noise(g->size() * m);
  std::vector<double> out(g->size() * m);
  for (auto _ : st) {
    if constexpr (Parallel) det::gamma_gain_omp(geo, phi.data(), nullptr, m, out.data());
    else det::gamma_gain_serial(geo, phi.data(), nullptr, m, out.data());
    benchmark::DoNotOptimize(out.data());
  }
}

void imex(benchmark::State& st) {
  // Coarser grids leave I + c L too close to singular for Cholesky.
  const int n = static_cast<int>(st.range(0));
  const GridPtr g = velocity::build_grid(6.0, {n, n, n});
  collision::AssemblyOptions ao;
  ao.cache_path = std::string(ALAB_BENCH_CACHE) + "/hs" + std::to_string(n) + ".bin";
  const auto op = collision::assemble_L(g, collision::KernelSpec{}, ao);
  const SpatialGrid s{1, static_cast<int>(st.range(1))};
  kinetic::SolverConfig cfg;
  kinetic::ImexStepper stepper(cfg, op, nullptr, s);
  PerturbationField f = kinetic::well_prepared_data(acoustic::sound_wave(s, 1e-3), g, cfg.epsilon);
  for (auto _ : st) {
    f = stepper.step(f);
    benchmark::DoNotOptimize(f.values.data());
  }
}

}  // namespace

BENCHMARK(rows<false>)->Name("boltzmann_rows/serial")->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(rows<true>)->Name("boltzmann_rows/omp")->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(gain<false>)->Name("gamma_gain/serial")->Args({8, 1})->Args({8, 8})->Unit(benchmark::kMillisecond);
BENCHMARK(gain<true>)->Name("gamma_gain/omp")->Args({8, 1})->Args({8, 8})->Unit(benchmark::kMillisecond);
BENCHMARK(imex)->Name("imex_step")->Args({12, 64})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
