#pragma once

#include <armadillo>
#include <vector>

#include "cepc/channel.hpp"
#include "cepc/scenario.hpp"
#include "cepc/waveform.hpp"

namespace cepc {

struct RelaxedPrecoder {
  arma::cx_mat B;  // M x S frequency-domain precoder, receive scale absorbed
  std::vector<double> objective_trace;  // best-so-far objective per iteration
  bool converged = false;
  int iterations = 0;
};

/// sum_{v in I} ||s[v] - H[v] b[v]||^2 + gamma * ||vec(B F^H)||_inf^2.
double relaxed_objective(const arma::cx_mat& B_freq, const FreqChannel& channel,
                         const SymbolGrid& grid, double gamma);

/// argmin_u ||u - v||^2 / 2 + weight * ||u||_inf^2. Phases are preserved;
/// magnitudes are clipped at the sorted-threshold level.
arma::cx_vec prox_sq_inf(const arma::cx_vec& v, double weight);

/// Douglas-Rachford splitting for the l2-linf relaxed CE precoding problem.
/// The data-fit prox acts per occupied subcarrier in the frequency domain,
/// the squared-infinity-norm prox acts in the time domain; guard columns are
/// shaped only by the time-domain path. Starts from warm_start when given,
/// otherwise from zero. Returns the best iterate found.
RelaxedPrecoder solve_relaxed(const FreqChannel& channel, const SymbolGrid& grid,
                              double gamma, const SolverParams& params,
                              const arma::cx_mat* warm_start = nullptr);

}  // namespace cepc
