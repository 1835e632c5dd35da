#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cepc/channel.hpp"
#include "cepc/link_eval.hpp"
#include "cepc/scenario.hpp"

namespace cepc {

/// Parses the JSON configuration file. Unknown keys are a hard error.
SystemConfig load_config(const std::string& path);
SystemConfig parse_config(const std::string& json_text);
std::string config_to_json(const SystemConfig& config);

/// Normalized-units channel for one setup: the physical large-scale gains
/// are divided by the physical noise power so that every downstream stage
/// runs with sigma^2 = 1. SNR-dependent quantities are unchanged. taps_out,
/// when given, receives the normalized time-domain taps.
FreqChannel build_setup_channel(const SystemConfig& config, int setup_id,
                                SetupGeometry* geometry_out = nullptr,
                                ChannelRealization* taps_out = nullptr);

struct RunOptions {
  std::string config_path;
  std::string replay_manifest;  // alternative to config_path
  std::string out_dir = "results";
  std::optional<std::uint64_t> seed;
  std::optional<int> setups;
  std::optional<int> symbols;
  std::optional<bool> freeze_rho;
  std::vector<std::string> schemes;  // empty: both
  std::vector<int> dac_bits;         // empty: config value
  int jobs = 0;                      // 0: hardware concurrency
  bool dump_channels = false;        // write per-setup tap dumps
  bool verbose_diag = false;         // write first-symbol objective traces
};

/// Executes the experiment and writes ber_per_ue.csv, sorted_curve.csv,
/// power_map.csv and manifest.json into out_dir. Exit-code semantics:
/// 0 success, 1 configuration error, 2 runtime error.
int cmd_run(const RunOptions& options);

/// Checks every configuration invariant and prints derived quantities.
int cmd_validate(const std::string& config_path);

/// Re-emits plot-ready CSVs from a completed run directory.
int cmd_export_plotdata(const std::string& results_dir,
                        const std::string& out_dir = "");

/// Simple worker pool; fn(i) runs for i in [0, n) on `jobs` threads in a
/// deterministic-result layout (caller indexes results by i).
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

}  // namespace cepc
