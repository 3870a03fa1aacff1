#include <iostream>

#include <CLI11.hpp>

#include "d2dstore/app/commands.hpp"

int main(int argc, char** argv) {
  using namespace d2dstore::app;
  CLI::App app{"D2D distributed storage cost model: analytics, simulation and code search"};
  app.require_subcommand(1, 1);

  Manifest m;
  std::uint64_t seed = 0;
  for (const char* name : {"analytic", "simulate", "search", "figures", "validate"}) {
    static const std::map<std::string, std::string> help = {
        {"analytic", "closed-form costs over the grid, written to analytic.csv"},
        {"simulate", "event-driven simulation compared with the analytic model"},
        {"search", "code search: delta_max, delta_opt and the min-cost curve"},
        {"figures", "CSV datasets for the reference plots"},
        {"validate", "acceptance criteria and golden values"},
    };
    auto* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("-c,--config", m.config_path, "JSON configuration file");
    sub->add_option("-o,--out", m.out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "override the simulation seed");
    sub->add_flag("-f,--force", m.force, "overwrite existing output files");
    sub->add_option("--set", m.overrides, "dotted key=value override, repeatable")
        ->allow_extra_args(false);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitCode::kConfigError);
  }
  m.command = app.get_subcommands().front()->get_name();
  if (app.get_subcommands().front()->count("--seed") > 0) m.seed = seed;
  return run_command(m, std::cout, std::cerr);
}
