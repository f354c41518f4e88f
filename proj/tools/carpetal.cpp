// carpetal: renders Talbot carpets from multi-slit current algebra, checks the
// Sorkin hierarchy, integrates averaged trajectories and cross-checks against
// direct wave mechanics.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "carpetal/commands.hpp"
#include "carpetal/config.hpp"
#include "carpetal/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Talbot carpets from multi-slit current algebra"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  unsigned workers = 1;
  std::optional<std::uint64_t> seed;
  int max_order = 0;

  app.add_option("--config", config_path, "JSON run configuration (defaults built in)");
  app.add_option("--out", out_dir, "output directory (overrides outputs.directory)");
  app.add_option("--workers", workers, "worker threads for data-parallel stages")
      ->check(CLI::Range(1u, 1024u));
  app.add_option("--seed", seed, "64-bit seed (overrides the config)");

  auto* carpet = app.add_subcommand("carpet", "render the carpet and detect recurrences");
  auto* sorkin = app.add_subcommand("sorkin", "inclusion-exclusion hierarchy report");
  sorkin->add_option("--max-order", max_order, "highest order to evaluate (default: slit count)");
  auto* traj = app.add_subcommand("traj", "integrate and export a trajectory bundle");
  auto* validate = app.add_subcommand("validate", "run all consistency checks");
  auto* compare = app.add_subcommand("compare", "point-by-point comparison with wave mechanics");
  for (auto* sub : {carpet, sorkin, traj, validate, compare}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : carpetal::kExitConfigError;
  }

  try {
    carpetal::RunConfig config =
        config_path.empty() ? carpetal::default_config() : carpetal::load_config(config_path);
    if (!out_dir.empty()) config.outputs.directory = out_dir;
    if (seed) config.seed = *seed;
    if (*sorkin && max_order == 0) max_order = config.sorkin.max_order;

    carpetal::RunOptions options;
    options.workers = workers;
    options.tolerance_scale = carpetal::tolerance_scale_from_env();

    carpetal::CommandResult result;
    if (*carpet)
      result = carpetal::cmd_carpet(config, options);
    else if (*sorkin)
      result = carpetal::cmd_sorkin(config, max_order, options);
    else if (*traj)
      result = carpetal::cmd_traj(config, options);
    else if (*validate)
      result = carpetal::cmd_validate(config, options);
    else
      result = carpetal::cmd_compare(config, options);

    auto summary = result.report;
    summary.erase("points");
    std::cout << summary.dump(2) << '\n';
    if (result.exit_code != carpetal::kExitOk)
      std::cerr << "carpetal: physics check failed (see report)\n";
    return result.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "carpetal: " << e.what() << '\n';
    return carpetal::exit_code_for(e);
  }
}
