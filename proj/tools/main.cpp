// orbitherm CLI: config-driven experiment runner.
//
// Exit codes: 0 success, 2 config/validation error, 3 runtime status error
// (e.g. "no saddles at this alpha").

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "orbitherm/experiment.hpp"
#include "orbitherm/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"orbitherm: saddle-orbit pressure, escape-rate and dimension experiments"};
  app.set_version_flag("--version", std::string(orbitherm::kToolVersion));
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::optional<uint64_t> seed_override;
  std::optional<int> threads_override;

  for (const char* name : orbitherm::kCommands) {
    CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name + " pipeline");
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory (overrides config)");
    sub->add_option_function<uint64_t>(
        "--seed", [&](uint64_t s) { seed_override = s; }, "seed override");
    sub->add_option_function<int>(
        "--threads", [&](int t) { threads_override = t; }, "worker thread override");
  }

  CLI11_PARSE(app, argc, argv);
  std::string command = app.get_subcommands().front()->get_name();

  try {
    auto config = orbitherm::load_config(config_path);
    config = orbitherm::with_overrides(
        config, seed_override, threads_override,
        out_dir.empty() ? std::nullopt : std::optional<std::string>(out_dir));

    auto bundle = orbitherm::run_experiment(config, command);
    auto paths = orbitherm::emit_report(bundle, config.out_dir);
    for (const auto& p : paths) std::cout << p << "\n";
    for (const auto& check : bundle.checks)
      std::cout << check.name << ": " << (check.pass ? "PASS" : "FAIL") << " ("
                << check.details << ")\n";
    if (bundle.status_error) {
      std::cerr << "status: " << *bundle.status_error << "\n";
      return 3;
    }
    return 0;
  } catch (const orbitherm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
