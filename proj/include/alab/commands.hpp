#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "alab/config.hpp"

namespace alab::cli {

struct CommandOptions {
  std::string out_dir;  // overrides io.out_dir when set
  int jobs = 0;         // overrides io.jobs when > 0
  bool list = false;    // check only: print check names and stop
};

/// Operator cache file for a config: ACOUSTIC_LAB_CACHE overrides io.cache;
/// a directory gets a file name derived from the grid and kernel hashes.
std::string cache_path(const config::RunConfig& cfg, std::uint64_t grid_hash);

int cmd_assemble(const config::RunConfig& cfg, const CommandOptions& opts, std::ostream& out);
int cmd_simulate(const config::RunConfig& cfg, const CommandOptions& opts, std::ostream& out);
int cmd_sweep(const config::RunConfig& cfg, const CommandOptions& opts, std::ostream& out);
int cmd_acoustic(const config::RunConfig& cfg, const CommandOptions& opts, std::ostream& out);
int cmd_check(const config::RunConfig& cfg, const CommandOptions& opts, std::ostream& out);

const std::vector<std::string>& check_names();

}  // namespace alab::cli
