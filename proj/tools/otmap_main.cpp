#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "otmap/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Optimal transport map estimation via input-convex networks"};
  app.require_subcommand(1);

  otmap::RunOptions run_opts;
  std::string run_profile;
  CLI::App* run = app.add_subcommand(
      "run", "Run the experiments described in a JSON config");
  run->add_option("--config", run_opts.config_path, "Config file path")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--out", run_opts.out_dir,
                  "Output directory (overrides the config)");
  run->add_option("--profile", run_profile,
                  "Override every experiment's profile (paper or fast)");
  run->add_option("--threads", run_opts.threads,
                  "Worker threads (default: OTMAP_THREADS or hardware)");
  run->add_flag("--force", run_opts.force, "Rerun even if outputs exist");

  otmap::TableOptions table_opts;
  CLI::App* table = app.add_subcommand(
      "table", "Aggregate results CSVs into a summary table");
  table->add_option("--glob", table_opts.results_glob,
                    "Glob matching results CSV files")
      ->required();
  table->add_option("--out", table_opts.out_path, "Summary CSV path")
      ->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    if (!run_profile.empty()) {
      try {
        run_opts.profile_override = otmap::parse_profile(run_profile);
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
      }
    }
    return otmap::cmd_run(run_opts, std::cout, std::cerr);
  }
  return otmap::cmd_table(table_opts, std::cout, std::cerr);
}
