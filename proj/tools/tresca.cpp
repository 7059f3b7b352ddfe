// tresca: forward rupture runs, checks, friction recovery and noise sweeps.
#include <iostream>

#include <CLI11.hpp>

#include "tresca/commands.hpp"

int main(int argc, char** argv) {
  using namespace tresca;
  CLI::App app{"Tresca-friction rupture simulator and friction recovery"};
  app.require_subcommand(1);

  std::string config;
  auto* forward = app.add_subcommand("forward", "simulate and write snapshots, fault history, energy");
  forward->add_option("config", config, "scenario config")->required();
  auto* verify = app.add_subcommand("verify", "check a finished forward run");
  verify->add_option("config", config, "scenario config")->required();
  auto* invert = app.add_subcommand("invert", "recover the friction coefficient from patch data");
  invert->add_option("config", config, "scenario config")->required();
  std::string mode;
  double eps0 = 0;
  std::uint64_t seed = 0;
  auto* mode_opt = invert->add_option("--mode", mode, "closed-loop or full-inverse")
                       ->check(CLI::IsMember({"closed-loop", "full-inverse"}));
  auto* eps_opt = invert->add_option("--eps0", eps0, "noise level in discrete H2 units");
  auto* seed_opt = invert->add_option("--seed", seed, "noise seed");
  auto* sweep = app.add_subcommand("sweep", "noise-level stability sweep");
  sweep->add_option("config", config, "scenario config")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (forward->parsed())
    return cmd_forward(config, std::cerr);
  if (verify->parsed())
    return cmd_verify(config, std::cerr);
  if (invert->parsed()) {
    InvertFlags flags;
    if (*mode_opt)
      flags.mode = parse_recovery_mode(mode);
    if (*eps_opt)
      flags.eps0 = eps0;
    if (*seed_opt)
      flags.seed = seed;
    return cmd_invert(config, flags, std::cerr);
  }
  return cmd_sweep(config, std::cerr);
}
