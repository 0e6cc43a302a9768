// Command-line front end: simulate-and-track runs, the MAP-MTA baseline
// tracker, and the numerical verification suite.

#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>

#include "rfstrack/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"rfstrack: random-finite-set multitarget tracking"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
    sub->add_option("--seed", seed, "random seed (overrides the config)")
        ->each([&](const std::string&) { seed_set = true; });
  };

  CLI::App* track = app.add_subcommand("track", "simulate a scenario and run a GLMB filter");
  add_common(track);
  CLI::App* verify = app.add_subcommand("verify", "run the numerical verification suite");
  add_common(verify);
  CLI::App* mta_map = app.add_subcommand("mta-map", "run the MAP-MTA baseline tracker");
  add_common(mta_map);

  CLI11_PARSE(app, argc, argv);

  rfstrack::cli::CliOverrides overrides;
  if (!out_dir.empty()) overrides.out_dir = out_dir;
  if (seed_set) overrides.seed = seed;

  if (track->parsed()) return rfstrack::cli::run_track(config_path, std::cerr, overrides);
  if (verify->parsed()) return rfstrack::cli::run_verify(config_path, std::cerr, overrides);
  return rfstrack::cli::run_mta_map(config_path, std::cerr, overrides);
}
