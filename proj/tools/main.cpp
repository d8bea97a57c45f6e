#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using stosym::cli::CommandOptions;

CLI::App* add_command(CLI::App& app, const std::string& name, const std::string& help, CommandOptions& opts) {
  CLI::App* sub = app.add_subcommand(name, help);
  sub->add_option("--config", opts.config_path, "Config file (JSON)")->required();
  sub->add_flag("--plot", opts.plot, "Also write SVG charts");
  sub->add_flag("--paper-scale", opts.paper_scale, "Use 512 cells and 500 paths");
  sub->add_option("--threads", opts.threads, "Worker threads for Monte-Carlo paths")->check(CLI::PositiveNumber);
  sub->add_flag("--no-truncate", opts.no_truncate, "Use raw Gaussian increments");
  sub->add_option("--seed", opts.seed, "Master seed; overrides STOSYM_SEED and the config");
  sub->add_option("--output-dir", opts.output_dir, "Output directory; overrides run.output_dir");
  return sub;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structure-preserving integrators for the stochastic nonlinear Schroedinger equation"};
  app.set_version_flag("--version", STOSYM_VERSION);
  app.require_subcommand(1);
  CommandOptions opts;
  CLI::App* simulate = add_command(app, "simulate", "Integrate one path and write trajectory.csv", opts);
  CLI::App* converge = add_command(app, "converge", "Measure mean-square convergence and write convergence.csv", opts);
  CLI::App* conserve = add_command(app, "conserve", "Ensemble charge and energy, written to ensemble.csv", opts);
  CLI::App* check = add_command(app, "symplectic-check", "Tableau conditions and one-step Jacobian defect", opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : stosym::cli::kConfigError;
  }

  if (simulate->parsed()) return stosym::cli::cmd_simulate(opts, std::cout, std::cerr);
  if (converge->parsed()) return stosym::cli::cmd_converge(opts, std::cout, std::cerr);
  if (conserve->parsed()) return stosym::cli::cmd_conserve(opts, std::cout, std::cerr);
  if (check->parsed()) return stosym::cli::cmd_symplectic_check(opts, std::cout, std::cerr);
  return stosym::cli::kConfigError;
}
