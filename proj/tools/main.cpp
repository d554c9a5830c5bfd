#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "btl/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Finite-duration transmission capacity sweeps and checks"};
  app.set_version_flag("--version", std::string(btl::cli::kToolName) + " " + btl::cli::kToolVersion);
  app.require_subcommand(1);

  std::string config;
  std::string output_dir;
  double at_T = 0.0;

  auto add = [&](const std::string& name, const std::string& help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", config, "Run configuration (JSON)")->required();
    sub->add_option("--output-dir", output_dir, "Overrides output_dir from the config");
    return sub;
  };
  add("sweep", "Capacity curve, eigenvalues, opening times and mode profiles over a T grid");
  add("check", "Run the configured check suites and print a pass/fail table");
  add("modes", "Mode profiles at one duration")->add_option("--at-T", at_T, "Duration T")->required();
  add("bound", "Top-transmissivity bound diagnostic over the T grid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : btl::cli::kExitConfig;
  }

  const auto* sub = app.get_subcommands().front();
  std::optional<std::filesystem::path> dir;
  if (!output_dir.empty()) dir = output_dir;
  std::optional<double> T;
  if (sub->get_name() == "modes") T = at_T;
  return btl::cli::dispatch(sub->get_name(), config, dir, T, std::cout, std::cerr);
}
