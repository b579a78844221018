#include <CLI11.hpp>
#include <string>

#include "evolv/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"evolv: solve and verify evolutionary problems on weighted time grids"};
  app.require_subcommand(1);

  evolv::cli::Options opts;
  std::string suite;
  std::string example_name;

  auto add_common = [&](CLI::App* cmd, bool needs_scenario) {
    auto* sc = cmd->add_option("--scenario", opts.scenario,
                               "scenario file or named example (heat1d, wave_memory, tdide)");
    if (needs_scenario) sc->required();
    cmd->add_option("--nu", opts.nus, "weight(s) nu, comma separated")->delimiter(',');
    cmd->add_option("--seed", opts.seed, "seed for randomized checks");
    cmd->add_option("--out", opts.out_dir, "output directory for artifacts");
    cmd->add_option("--tol", opts.tol, "residual tolerance for pass/fail");
    cmd->add_flag("--dump-scenario", opts.dump_scenario, "print the expanded scenario and exit");
  };

  CLI::App* solve = app.add_subcommand("solve", "solve a scenario, write CSV + report JSON");
  add_common(solve, true);

  CLI::App* certify = app.add_subcommand("certify", "compute the positivity certificate only");
  add_common(certify, true);

  CLI::App* verify = app.add_subcommand(
      "verify", "run a verification suite (causality, nu-independence, commutator, adjoint, "
                "yosida, spectral, oracle, corpus)");
  verify->add_option("suite", suite, "suite name")->required();
  add_common(verify, false);
  verify->add_flag("--anticausal", opts.anticausal,
                   "inject an anticausal operator (negative control; fails by design)");

  CLI::App* convergence =
      app.add_subcommand("convergence", "manufactured-solution convergence studies");
  add_common(convergence, true);
  convergence->add_option("--halvings", opts.halvings, "number of parameter halvings");
  convergence->add_option("--mode", opts.mode, "temporal | spatial | both")
      ->check(CLI::IsMember({"temporal", "spatial", "both"}));

  CLI::App* examples = app.add_subcommand("examples", "list or expand the named examples");
  examples->add_option("name", example_name, "example to describe");
  examples->add_flag("--dump-scenario", opts.dump_scenario, "print the expanded scenario JSON");

  CLI11_PARSE(app, argc, argv);

  return evolv::cli::run_guarded([&]() -> int {
    if (solve->parsed()) return evolv::cli::cmd_solve(opts);
    if (certify->parsed()) return evolv::cli::cmd_certify(opts);
    if (verify->parsed()) return evolv::cli::cmd_verify(suite, opts);
    if (convergence->parsed()) return evolv::cli::cmd_convergence(opts);
    if (examples->parsed()) return evolv::cli::cmd_examples(opts, example_name);
    return evolv::cli::kExitInputError;
  });
}
