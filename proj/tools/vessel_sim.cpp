#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "vessel/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Compliant-vessel pulse flow simulator"};

  vessel::RunOptions opt;
  std::string log_level = "info";
  app.add_option("--config", opt.config_path, "Scenario config file")
      ->required();
  app.add_option("--output-dir", opt.output_dir,
                 "Output directory (overrides the config value)");
  app.add_flag("--dry-run", opt.dry_run,
               "Validate and print the resolved config without computing");
  app.add_option("--log-level", log_level, "Log verbosity")
      ->check(CLI::IsMember({"info", "debug"}));

  CLI11_PARSE(app, argc, argv);
  opt.debug_log = (log_level == "debug");

  return vessel::run_scenario(opt, std::cout);
}
