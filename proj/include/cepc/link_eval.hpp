#pragma once

#include <armadillo>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cepc/channel.hpp"
#include "cepc/power_control.hpp"
#include "cepc/scenario.hpp"
#include "cepc/waveform.hpp"

namespace cepc {

enum class Scheme { Baseline, PowerControl };

std::string scheme_name(Scheme scheme);
Scheme scheme_from_name(const std::string& name);

struct BerReport {
  int setup_id = 0;
  Scheme scheme = Scheme::Baseline;
  int dac_bits = 0;
  arma::Col<arma::u64> errors;  // K
  arma::Col<arma::u64> bits;    // K
  arma::vec ber;                // K
};

struct SortedBerCurve {
  arma::vec mean_ber_by_rank;  // rank 1 (worst UE) first
};

/// Noiseless received signal plus per-subcarrier CN(0, sigma2 I) noise on the
/// occupied set, scaled by the receive factor: beta * (H[v] P x[v] + w[v]).
std::vector<arma::cx_vec> simulate_downlink(const FreqChannel& channel,
                                            const PrecodeResult& precode,
                                            double sigma2,
                                            const SymbolGrid& grid,
                                            int antennas_per_ap,
                                            RngStream& rng);

/// Minimum-distance QPSK demapping, inverse of qpsk_map.
std::pair<unsigned, unsigned> demap_qpsk(std::complex<double> soft);

struct SetupEval {
  BerReport report;
  arma::vec power_frac;  // mean p_l / P_ant across OFDM symbols
  std::uint64_t ce_samples_checked = 0;
  int beta_collapse_count = 0;
  // diagnostics of the first OFDM symbol, filled when requested
  std::vector<std::vector<double>> solver_traces;
  std::vector<double> distortion_trace;
};

/// Runs ofdm_symbols_per_setup symbols through bit generation, precoding,
/// the downlink model, and demapping; channel must already carry the
/// normalization implied by sigma2. noise_sigma2 overrides the injected
/// noise power (< 0 means "same as sigma2"), e.g. 0 for noiseless runs.
SetupEval evaluate_setup(const FreqChannel& channel, const SystemConfig& config,
                         Scheme scheme, int dac_bits, int setup_id,
                         double sigma2 = 1.0, double noise_sigma2 = -1.0,
                         bool collect_traces = false);

/// Sorts each report's per-UE BER descending and averages rank-wise.
SortedBerCurve aggregate_sorted(const std::vector<BerReport>& reports);

}  // namespace cepc
