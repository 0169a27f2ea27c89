#include <CLI11.hpp>

#include <iostream>

#include "stabhom/cli.hpp"

namespace {

void add_common(CLI::App* cmd, std::optional<std::string>& out_dir, std::string& config,
                stabhom::cli::Overrides& ov) {
  cmd->add_option("--output-dir,-o", out_dir, "Output directory (default: $STABHOM_OUTPUT_DIR or ./stabhom_out)");
  cmd->add_option("--config,-c", config, "INI file with [default] and per-example sections")->check(CLI::ExistingFile);
  cmd->add_option("--s-steps", ov.s_steps, "Number of s values on the homotopy grid")->check(CLI::PositiveNumber);
  cmd->add_option("--samples", ov.samples, "Sample count per certificate slice")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", ov.seed, "Seed for sampled disturbances and streamlines");
  cmd->add_option("--rel-tol", ov.rel_tol, "Integrator relative tolerance");
  cmd->add_option("--abs-tol", ov.abs_tol, "Integrator absolute tolerance");
  cmd->add_option("--max-step", ov.max_step, "Integrator maximum step");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace stabhom::cli;
  CLI::App app{"Stability-preserving homotopies: examples, certificates and frames"};
  app.require_subcommand(1);

  RunSpec spec;
  std::optional<std::string> out_dir;
  std::string config;

  auto* list = app.add_subcommand("list", "List registered examples");
  auto* run = app.add_subcommand("run-example", "Run one example and write its artifacts");
  run->add_option("name", spec.example_name, "Example name")->required();
  add_common(run, out_dir, config, spec.overrides);
  auto* verify = app.add_subcommand("verify", "Check examples against their expected verdicts");
  verify->add_option("name", spec.example_name, "Example name or 'all'")->required();
  add_common(verify, out_dir, config, spec.overrides);
  auto* frames = app.add_subcommand("export-frames", "Write one SVG per s-step of an example's path");
  frames->add_option("name", spec.example_name, "Example name")->required();
  add_common(frames, out_dir, config, spec.overrides);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  if (list->parsed()) spec.command = Command::List;
  if (run->parsed()) spec.command = Command::RunExample;
  if (verify->parsed()) spec.command = Command::Verify;
  if (frames->parsed()) spec.command = Command::ExportFrames;
  spec.output_dir = resolve_output_dir(out_dir);
  if (!config.empty()) spec.config_file = config;
  return execute(spec, std::cout, std::cerr);
}
