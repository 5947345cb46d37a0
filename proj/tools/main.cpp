#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "beltrami/errors.hpp"
#include "beltrami/scenario.hpp"

// Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O.

int main(int argc, char** argv) {
  CLI::App app{"planar Beltrami equation laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  long long seed_override = -1;

  const char* names[] = {"solve", "verify-oracle", "classify", "diagnose"};
  const char* blurbs[] = {"solve the truncation ladder and dump solution fields",
                          "compare solved maps against the radial family's closed forms",
                          "classify a weight as compact / normal / undetermined",
                          "run the toggled analyses over a solved ladder"};
  for (int i = 0; i < 4; ++i) {
    auto* sub = app.add_subcommand(names[i], blurbs[i]);
    sub->add_option("--config", config_path, "scenario config file")->required();
    sub->add_option("--out", out_override, "output directory (overrides the config)");
    sub->add_option("--seed", seed_override, "seed for randomized diagnostics");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  beltrami::ScenarioConfig cfg;
  try {
    cfg = beltrami::load_config(config_path);
    beltrami::validate_config(cfg);
  } catch (const beltrami::parse_error& e) {
    std::cerr << "config error: line " << e.line << ": " << e.what() << "\n";
    return 2;
  } catch (const beltrami::io_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  if (!out_override.empty()) cfg.out_dir = out_override;
  if (seed_override >= 0) cfg.seed = static_cast<unsigned long long>(seed_override);

  return beltrami::run_command(app.get_subcommands().front()->get_name(), cfg, std::cout);
}
