#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <map>

#include "alab/commands.hpp"
#include "alab/config.hpp"
#include "alab/errors.hpp"

using namespace alab;

int main(int argc, char** argv) {
  CLI::App app{"acoustic_lab: linearized Boltzmann/Landau solver and acoustic limit diagnostics"};
  app.require_subcommand(1);

  using Command = std::function<int(const config::RunConfig&, const cli::CommandOptions&,
                                    std::ostream&)>;
  const std::map<std::string, std::pair<std::string, Command>> commands = {
      {"assemble", {"Assemble L, report structure and coercivity", cli::cmd_assemble}},
      {"simulate", {"Run the kinetic solver from a well-prepared sound wave", cli::cmd_simulate}},
      {"sweep", {"Epsilon convergence sweep against the acoustic solution", cli::cmd_sweep}},
      {"acoustic", {"Propagate the acoustic system alone", cli::cmd_acoustic}},
      {"check", {"Run consistency checks", cli::cmd_check}},
  };

  std::string config_path;
  cli::CommandOptions opts;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config,-c", config_path, "Run configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out,-o", opts.out_dir, "Output directory (overrides io.out_dir)");
    sub->add_option("--jobs,-j", opts.jobs, "Worker threads (overrides io.jobs)");
    if (name == "check") sub->add_flag("--list", opts.list, "List check names and exit");
    subs[name] = sub;
  }

  // Usage errors exit with 2; --help exits with 0.
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  for (const auto& [name, sub] : subs) {
    if (!sub->parsed()) continue;
    try {
      if (opts.list) return commands.at(name).second(config::RunConfig{}, opts, std::cout);
      if (config_path.empty()) {
        std::cerr << "error: --config is required\n";
        return 2;
      }
      const config::RunConfig cfg = config::load(config_path);
      return commands.at(name).second(cfg, opts, std::cout);
    } catch (const LabError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    } catch (const std::exception& e) {
      std::cerr << "internal error: " << e.what() << '\n';
      return 3;
    }
  }
  return 2;
}
