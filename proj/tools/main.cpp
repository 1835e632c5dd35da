#include <CLI11.hpp>

#include "cepc/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Constant-envelope quantized precoding simulator for the "
               "cell-free massive MIMO-OFDM downlink"};
  app.require_subcommand(1);

  cepc::RunOptions opts;
  std::uint64_t seed = 0;
  int setups = 0, symbols = 0;
  bool freeze = false;

  auto* run = app.add_subcommand("run", "Run an experiment and write CSVs");
  run->add_option("--config", opts.config_path, "JSON configuration file");
  run->add_option("--replay", opts.replay_manifest,
                  "Replay a previous run from its manifest.json");
  auto* seed_opt = run->add_option("--seed", seed, "Override master seed");
  auto* setups_opt = run->add_option("--setups", setups, "Override setup count");
  auto* symbols_opt =
      run->add_option("--symbols", symbols, "Override OFDM symbols per setup");
  run->add_option("--schemes", opts.schemes,
                  "Schemes to run: baseline, power_control")
      ->delimiter(',');
  run->add_option("--dac-bits", opts.dac_bits, "DAC resolutions to run")
      ->delimiter(',');
  run->add_option("--out", opts.out_dir, "Output directory")
      ->capture_default_str();
  run->add_option("--jobs", opts.jobs,
                  "Parallel setup workers (0 = all cores)")
      ->capture_default_str();
  auto* freeze_opt = run->add_flag(
      "--freeze-rho", freeze,
      "Compute power-control coefficients once per setup and reuse them");
  run->add_flag("--dump-channels", opts.dump_channels,
                "Write per-setup channel tap dumps for replay");
  run->add_flag("--verbose-diag", opts.verbose_diag,
                "Write first-symbol solver and distortion traces");

  std::string validate_path;
  auto* validate =
      app.add_subcommand("validate", "Check a configuration without running");
  validate->add_option("--config", validate_path, "JSON configuration file")
      ->required();

  std::string results_dir, plot_out;
  auto* exp = app.add_subcommand("export-plotdata",
                                 "Emit plot-ready CSVs from a run directory");
  exp->add_option("--results", results_dir, "Directory with manifest.json")
      ->required();
  exp->add_option("--out", plot_out, "Destination (default <results>/plotdata)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  if (run->parsed()) {
    if (opts.config_path.empty() && opts.replay_manifest.empty()) {
      std::cerr << "config error: provide --config or --replay\n";
      return 1;
    }
    if (!seed_opt->empty()) opts.seed = seed;
    if (!setups_opt->empty()) opts.setups = setups;
    if (!symbols_opt->empty()) opts.symbols = symbols;
    if (!freeze_opt->empty()) opts.freeze_rho = freeze;
    return cepc::cmd_run(opts);
  }
  if (validate->parsed()) {
    return cepc::cmd_validate(validate_path);
  }
  return cepc::cmd_export_plotdata(results_dir, plot_out);
}
