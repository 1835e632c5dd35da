// Test-only reference implementations, kept independent of the library code
// paths they check.
#pragma once

#include <armadillo>
#include <vector>

#include "cepc/channel.hpp"
#include "cepc/rng.hpp"
#include "cepc/waveform.hpp"

namespace cepc::oracle {

/// O(S^2) unitary DFT by direct summation.
arma::cx_vec naive_dft(const arma::cx_vec& time);

/// Reference minimizer of ||u - v||^2/2 + weight ||u||_inf^2 found by
/// one-dimensional search over the magnitude cap (the objective is convex
/// in the cap; entries are clipped to it).
arma::cx_vec prox_sq_inf_search(const arma::cx_vec& v, double weight);

/// Independent solver for the relaxed CE problem
///   min_B sum_{v in I} ||s[v] - H[v] b[v]||^2 + gamma ||vec(B F^H)||_inf^2
/// via projected accelerated gradient descent on the time-domain variable
/// under the constraint max|entry| <= t, combined with golden-section search
/// over t. Requires gamma > 0. Returns the best objective value found.
double relaxed_objective_oracle(const FreqChannel& channel,
                                const SymbolGrid& grid, double gamma,
                                int fista_iters = 800, int golden_iters = 90);

/// Two-stage grid search (coarse pass, then exact target-step refinement
/// around the coarse minimizer; valid because the objective is convex) for
/// the receive scale. Evaluates the full distortion at every candidate.
double beta_grid_search(const std::vector<arma::cx_vec>& u_occupied,
                        const SymbolGrid& grid, double sigma2, double hi,
                        double step);

/// Same scheme for a single power coefficient rho[l] over [0, sqrt(p_ant)].
double rho_grid_search(int l, const std::vector<arma::cx_mat>& contributions,
                       const arma::vec& rho, double beta,
                       const SymbolGrid& grid, double sigma2, double p_ant,
                       double step);

/// Full distortion evaluated through the per-AP contribution decomposition.
double distortion_from_contributions(const std::vector<arma::cx_mat>& contribs,
                                     const arma::vec& rho, double beta,
                                     const SymbolGrid& grid, double sigma2);

/// Cyclic-prefix time-domain reference: prepend a cp_len prefix, convolve
/// linearly with the taps, strip the prefix, and DFT the rows.
arma::cx_mat cp_convolution_receive(const std::vector<arma::cx_mat>& taps,
                                    const arma::cx_mat& x_time, int cp_len);

/// Monte Carlo estimate of beta * E{a(phi) a(phi)^H} for the half-wavelength
/// ULA with Gaussian azimuth perturbations.
arma::cx_mat mc_ula_correlation(double bearing_rad, double sigma_phi_rad,
                                int antennas, double beta, int draws,
                                RngStream& rng);

/// Random CN(0,1) channel, one K x M matrix per subcarrier.
FreqChannel random_channel(int ue_count, int total_antennas, int dft_size,
                           RngStream& rng);

/// Random QPSK grid on the given occupied set.
SymbolGrid random_grid(int ue_count, const std::vector<int>& occupied,
                       int dft_size, RngStream& rng);

}  // namespace cepc::oracle
