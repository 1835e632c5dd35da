#pragma once

#include <armadillo>
#include <optional>
#include <vector>

#include "cepc/channel.hpp"
#include "cepc/scenario.hpp"
#include "cepc/waveform.hpp"

namespace cepc {

struct PowerState {
  arma::vec rho;     // L per-AP amplitudes in [0, sqrt(P_ant)]
  double beta = 0.0; // receive scale, >= 0
};

/// Labeled point of the distortion trace.
struct TraceEntry {
  enum class Stage { AfterQuantize, AfterBeta, AfterRhoUpdate, AfterSweep };
  Stage stage;
  int ap = -1;  // coordinate index for AfterRhoUpdate
  double value = 0.0;
};

struct PrecodeResult {
  arma::cx_mat B;    // relaxed frequency-domain precoder from the last solve
  arma::cx_mat X;    // M x S quantized time-domain signal, unit amplitude
  arma::cx_mat Xf;   // X * F
  PowerState power;
  std::vector<TraceEntry> trace;        // labeled distortion trace
  std::vector<double> objective_trace;  // values after beta update and sweep
  std::vector<std::vector<double>> solver_traces;  // per outer iteration
  bool solver_converged = true;
  bool beta_collapsed = false;   // beta hit 0 during the alternating loop
  bool fell_back = false;        // rerun as classical baseline after collapse
};

/// H_tilde[v] = H[v] * diag(rho (x) 1_N).
FreqChannel effective_channel(const FreqChannel& channel, const arma::vec& rho,
                              int antennas_per_ap);

/// Closed-form receive-scale update: beta = max{0, b / a} with
/// a = sum_v ||u[v]||^2 + sigma^2 S_I K and b = sum_v Re(u[v]^H s[v]).
/// Returns 0 when a vanishes.
double update_beta(const std::vector<arma::cx_vec>& u_occupied,
                   const SymbolGrid& grid, double sigma2);

/// Per-AP contribution vectors a_{v,l} = H_l[v] x_l[v], one K x L matrix per
/// occupied subcarrier (column l is AP l's contribution).
std::vector<arma::cx_mat> ap_contribution(const FreqChannel& channel,
                                          const arma::cx_mat& X_freq,
                                          const std::vector<int>& occupied,
                                          int antennas_per_ap);

/// Closed-form coordinate update of rho[l], projecting the unconstrained
/// minimizer onto [0, sqrt(p_ant)]. Returns rho[l] unchanged when beta = 0,
/// and 0 when A_l = 0.
double update_rho_l(int l, const std::vector<arma::cx_mat>& contributions,
                    const arma::vec& rho, double beta, const SymbolGrid& grid,
                    double p_ant);

/// sum_{v in I} ||s[v] - beta H[v] P x[v]||^2 + sigma^2 S_I K beta^2.
double distortion(const FreqChannel& channel, const arma::vec& rho, double beta,
                  const arma::cx_mat& X_freq, const SymbolGrid& grid,
                  double sigma2);

struct AlternatingOptions {
  std::optional<int> outer_iters;     // defaults to config.outer_iters
  bool sweep_rho = true;              // run the per-AP coordinate sweep
  std::optional<arma::vec> fixed_rho; // start from these amplitudes
  const arma::cx_mat* warm_B = nullptr;
  double sigma2 = 1.0;
  bool record_coordinate_trace = false;
  bool record_solver_trace = false;
  bool fallback_on_beta_collapse = true;
};

/// Alternating optimization of (precoder, beta, rho). Each outer iteration:
/// effective channel from rho, relaxed solve under the normalized CE
/// constraint (unit amplitude, gamma = sigma^2 S_I K), quantization onto the
/// unit alphabet, closed-form beta update, then one Gauss-Seidel sweep of the
/// rho coordinates with residuals refreshed after every update.
PrecodeResult alternating_precode(const FreqChannel& channel,
                                  const SymbolGrid& grid,
                                  const SystemConfig& config,
                                  const AlternatingOptions& options = {});

/// Maximum-power baseline: one pass with rho fixed at sqrt(P_ant) and no
/// power sweep, equivalent to solving the beta-absorbed relaxed problem with
/// gamma = sigma^2 S_I K / P_ant and quantizing.
PrecodeResult classical_precode(const FreqChannel& channel,
                                const SymbolGrid& grid,
                                const SystemConfig& config,
                                double sigma2 = 1.0);

}  // namespace cepc
