#pragma once

#include <armadillo>
#include <cstdint>
#include <string>
#include <vector>

#include "cepc/rng.hpp"

namespace cepc {

struct SolverParams {
  int max_iters = 200;
  double step_size = 1.0;
  double tol = 1e-6;             // relative objective-change stopping threshold
  double over_relaxation = 1.0;  // in (0, 2]
};

/// All scenario and algorithm parameters for one experiment.
struct SystemConfig {
  int ap_count = 0;          // L
  int antennas_per_ap = 0;   // N
  int ue_count = 0;          // K
  int dft_size = 0;          // S, samples per OFDM symbol
  std::vector<int> occupied; // ordered occupied-subcarrier indices
  double delta_f_hz = 0.0;
  int channel_memory = 0;    // T, taps = T + 1
  int dac_bits = 0;          // p
  double p_ant_watts = 0.0;  // max per-antenna power
  double noise_figure_db = 0.0;
  double area_side_m = 0.0;
  double ap_ue_height_m = 0.0;
  double shadow_std_db = 0.0;
  double asd_deg = 0.0;      // azimuth angular spread
  int n_setups = 1;
  int ofdm_symbols_per_setup = 10;
  int outer_iters = 5;       // alternating-loop count
  SolverParams solver;
  std::uint64_t master_seed = 1;
  bool freeze_rho = false;   // reuse first-symbol power coefficients

  int total_antennas() const { return ap_count * antennas_per_ap; }
  int occupied_count() const { return static_cast<int>(occupied.size()); }

  /// Returns every violated invariant (empty when valid).
  std::vector<std::string> violations() const;

  /// Throws ConfigError listing all violations.
  void validate() const;
};

/// Noise power in watts: sigma^2[dB] = -204 + 10 log10(S * delta_f) + NF.
double derive_noise_power(const SystemConfig& config);

/// gamma = sigma^2 * S_I * K / p_ant.
double derive_gamma(const SystemConfig& config, double sigma2, double p_ant);

struct SetupGeometry {
  arma::mat ap_xy;  // L x 2
  arma::mat ue_xy;  // K x 2
  double height_m = 0.0;

  double distance_3d(int ue, int ap) const {
    const double dx = ap_xy(ap, 0) - ue_xy(ue, 0);
    const double dy = ap_xy(ap, 1) - ue_xy(ue, 1);
    return std::sqrt(dx * dx + dy * dy + height_m * height_m);
  }
};

/// APs on a centered sqrt(L) x sqrt(L) grid, UEs uniform over the square.
/// Throws NonSquareAPCount when L has no integer square root.
SetupGeometry build_geometry(const SystemConfig& config, RngStream& rng);

}  // namespace cepc
