#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "alab/collision_ops.hpp"
#include "alab/kinetic_solver.hpp"
#include "alab/spectral.hpp"
#include "alab/velocity_space.hpp"

namespace alab::config {

struct GridBlock {
  double v_max = 6.0;
  std::array<int, 3> counts{16, 16, 16};
  velocity::QuadratureRule rule = velocity::QuadratureRule::uniform_midpoint;
  double tol_moment = 1e-5;
  spectral::SpatialGrid space{1, 64};
};

struct SolverBlock {
  double epsilon = 0.1;
  std::vector<double> epsilons{0.2, 0.1, 0.05, 0.025};
  double dt = 0.01;
  double t_end = 1.0;
  kinetic::Mode mode = kinetic::Mode::linearized;
  kinetic::Splitting splitting = kinetic::Splitting::lie;
  double amplitude = 1e-3;
  int wave_number = 1;
  int direction = 1;
};

struct DiagnosticsBlock {
  int N = 2;
  double l = 1.0;
  std::vector<double> probes{0.5, 1.0};
  double tol_sym = 1e-10;
  double tol_null = 1e-6;
  double tol_psd = 1e-8;
  double tol_step = 1e-10;
  double tol_conserve = 1e-8;
  double tol_conserve_rate = 1e-8;
  double tol_energy = 1e-6;
  double tol_energy_bound = 0.05;
};

struct IoBlock {
  std::string out_dir = "out";
  int cadence = 1;
  std::string cache;  // empty: no operator cache
  bool dump_full = false;
  int jobs = 1;
  std::size_t max_entries = std::size_t{1} << 26;
};

/// Everything a command needs. Text form is line-oriented `key = value`
/// with dotted section prefixes; `#` starts a comment.
struct RunConfig {
  collision::KernelSpec kernel;
  GridBlock grid;
  SolverBlock solver;
  DiagnosticsBlock diagnostics;
  IoBlock io;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
  /// Canonical text; parse(serialize()) reproduces the config exactly.
  std::string serialize() const;
  std::uint64_t hash() const;

  kinetic::SolverConfig solver_config(double epsilon) const;
};

/// Unknown keys and malformed values raise ConfigError naming the line.
RunConfig parse(const std::string& text);
RunConfig load(const std::string& path);

}  // namespace alab::config
