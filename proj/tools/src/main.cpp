#include <CLI11.hpp>
#include <iostream>

#include "chid/error.hpp"
#include "chid_tools/commands.hpp"

int main(int argc, char** argv) {
  using namespace chid;
  CLI::App app{"Cahn-Hilliard parameter identification toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::string preset;
  std::string input;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  app.add_option("--config", config_path, "Run configuration file");
  app.add_option("--out", out_dir, "Output directory (overrides output.dir)");
  app.add_option("--seed", seed, "Noise seed (overrides data.seed)");
  app.add_option("--threads", threads, "Worker threads for assembly and alpha sweeps")
      ->check(CLI::PositiveNumber);
  app.add_option("--preset", preset, "Built-in configuration")->check(CLI::IsMember({"paper"}));
  app.add_option("--input", input, "Input container (trajectory or observation)");

  auto* simulate = app.add_subcommand("simulate", "Forward run");
  auto* make_data = app.add_subcommand("make-data", "Observation data and diagnostics");
  auto* identify = app.add_subcommand("identify", "Parameter identification");
  auto* verify = app.add_subcommand("verify", "Invariant suite");
  auto* lcurve = app.add_subcommand("lcurve", "L-curve sweep");

  CLI11_PARSE(app, argc, argv);

  try {
    tools::CommandOptions opts;
    opts.config = config_path.empty() ? io::paper_preset() : io::load_config(config_path);
    if (!out_dir.empty()) opts.config.output.dir = out_dir;
    if (app.count("--seed")) opts.config.data.seed = seed;
    io::validate(opts.config);
    if (!input.empty()) opts.input = input;
    opts.threads = threads;
    opts.log = &std::cerr;
    if (*simulate) return tools::cmd_simulate(opts);
    if (*make_data) return tools::cmd_make_data(opts);
    if (*identify) return tools::cmd_identify(opts);
    if (*verify) return tools::cmd_verify(opts);
    if (*lcurve) return tools::cmd_lcurve(opts);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return tools::kValidationError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return tools::kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return tools::kNumericalError;
  }
  return tools::kValidationError;
}
