#include "cepc/power_control.hpp"

#include <cmath>

#include "cepc/errors.hpp"
#include "cepc/precoder.hpp"

namespace cepc {

FreqChannel effective_channel(const FreqChannel& channel, const arma::vec& rho,
                              int antennas_per_ap) {
  FreqChannel out(channel.size());
  for (std::size_t nu = 0; nu < channel.size(); ++nu) {
    const arma::cx_mat& H = channel[nu];
    if (H.is_empty()) continue;
    if (static_cast<int>(H.n_cols) !=
        static_cast<int>(rho.n_elem) * antennas_per_ap) {
      throw DimensionMismatch("channel width does not match L * N");
    }
    arma::cx_mat He = H;
    for (arma::uword l = 0; l < rho.n_elem; ++l) {
      He.cols(l * antennas_per_ap, (l + 1) * antennas_per_ap - 1) *= rho[l];
    }
    out[nu] = std::move(He);
  }
  return out;
}

double update_beta(const std::vector<arma::cx_vec>& u_occupied,
                   const SymbolGrid& grid, double sigma2) {
  if (static_cast<int>(u_occupied.size()) != grid.occupied_count()) {
    throw DimensionMismatch("u vector count does not match occupied set");
  }
  const double noise_term = sigma2 * static_cast<double>(grid.occupied_count()) *
                            static_cast<double>(grid.ue_count());
  double a = noise_term;
  double b = 0.0;
  for (int i = 0; i < grid.occupied_count(); ++i) {
    const arma::cx_vec& u = u_occupied[i];
    a += arma::accu(arma::square(arma::abs(u)));
    b += arma::cdot(u, grid.s.col(grid.occupied[i])).real();
  }
  if (a == 0.0) return 0.0;
  return std::max(0.0, b / a);
}

std::vector<arma::cx_mat> ap_contribution(const FreqChannel& channel,
                                          const arma::cx_mat& X_freq,
                                          const std::vector<int>& occupied,
                                          int antennas_per_ap) {
  const int N = antennas_per_ap;
  std::vector<arma::cx_mat> contribs;
  contribs.reserve(occupied.size());
  for (int nu : occupied) {
    const arma::cx_mat& H = channel[nu];
    if (H.n_cols != X_freq.n_rows || H.n_cols % N != 0) {
      throw DimensionMismatch("block partition inconsistent at subcarrier " +
                              std::to_string(nu));
    }
    const int L = static_cast<int>(H.n_cols) / N;
    arma::cx_mat A(H.n_rows, L);
    for (int l = 0; l < L; ++l) {
      A.col(l) = H.cols(l * N, (l + 1) * N - 1) *
                 X_freq.submat(l * N, nu, (l + 1) * N - 1, nu);
    }
    contribs.push_back(std::move(A));
  }
  return contribs;
}

double update_rho_l(int l, const std::vector<arma::cx_mat>& contributions,
                    const arma::vec& rho, double beta, const SymbolGrid& grid,
                    double p_ant) {
  if (beta <= 0.0) return rho[l];
  double A_l = 0.0;
  double B_l = 0.0;
  for (int i = 0; i < grid.occupied_count(); ++i) {
    const arma::cx_mat& A = contributions[i];
    const arma::cx_vec a_l = A.col(l);
    arma::cx_vec residual = grid.s.col(grid.occupied[i]);
    for (arma::uword j = 0; j < rho.n_elem; ++j) {
      if (static_cast<int>(j) == l) continue;
      residual -= beta * rho[j] * A.col(j);
    }
    A_l += arma::accu(arma::square(arma::abs(a_l)));
    B_l += beta * arma::cdot(a_l, residual).real();
  }
  A_l *= beta * beta;
  if (A_l == 0.0) return 0.0;
  return std::min(std::sqrt(p_ant), std::max(0.0, B_l / A_l));
}

double distortion(const FreqChannel& channel, const arma::vec& rho, double beta,
                  const arma::cx_mat& X_freq, const SymbolGrid& grid,
                  double sigma2) {
  const int N = static_cast<int>(X_freq.n_rows) / static_cast<int>(rho.n_elem);
  if (static_cast<int>(rho.n_elem) * N != static_cast<int>(X_freq.n_rows)) {
    throw DimensionMismatch("rho length does not divide antenna count");
  }
  if (!grid.occupied.empty() &&
      channel[grid.occupied.front()].n_cols != X_freq.n_rows) {
    throw DimensionMismatch("channel width does not match precoder rows");
  }
  arma::cx_vec scaled(X_freq.n_rows);
  double fit = 0.0;
  for (int nu : grid.occupied) {
    for (arma::uword l = 0; l < rho.n_elem; ++l) {
      scaled.subvec(l * N, (l + 1) * N - 1) =
          rho[l] * X_freq.submat(l * N, nu, (l + 1) * N - 1, nu);
    }
    fit += arma::accu(arma::square(
        arma::abs(grid.s.col(nu) - beta * (channel[nu] * scaled))));
  }
  const double noise_term = sigma2 * static_cast<double>(grid.occupied_count()) *
                            static_cast<double>(grid.ue_count()) * beta * beta;
  return fit + noise_term;
}

namespace {

PrecodeResult run_alternating(const FreqChannel& channel, const SymbolGrid& grid,
                              const SystemConfig& config,
                              const AlternatingOptions& opt) {
  const int N = config.antennas_per_ap;
  const int L = config.ap_count;
  const double p_ant = config.p_ant_watts;
  const double sigma2 = opt.sigma2;
  const double gamma_unit = sigma2 * static_cast<double>(grid.occupied_count()) *
                            static_cast<double>(grid.ue_count());
  const int outer = opt.outer_iters.value_or(config.outer_iters);
  const CEAlphabet alphabet = CEAlphabet::make(config.dac_bits, 1.0);

  PrecodeResult res;
  res.power.rho = opt.fixed_rho.value_or(
      arma::vec(L, arma::fill::value(std::sqrt(p_ant))));
  res.power.beta = 0.0;

  const arma::cx_mat* warm = opt.warm_B;
  const double noise_coeff =
      sigma2 * grid.occupied_count() * grid.ue_count();

  for (int it = 0; it < outer; ++it) {
    const FreqChannel Ht = effective_channel(channel, res.power.rho, N);
    RelaxedPrecoder sol = solve_relaxed(Ht, grid, gamma_unit, config.solver, warm);
    res.solver_converged = res.solver_converged && sol.converged;
    if (opt.record_solver_trace) {
      res.solver_traces.push_back(std::move(sol.objective_trace));
    }
    res.B = std::move(sol.B);
    warm = &res.B;

    res.X = quantize_ce(idft_rows(res.B), alphabet);
    res.Xf = dft_rows(res.X);

    std::vector<arma::cx_vec> u;
    u.reserve(grid.occupied.size());
    for (int nu : grid.occupied) {
      u.push_back(Ht[nu] * res.Xf.col(nu));
    }

    res.trace.push_back({TraceEntry::Stage::AfterQuantize, -1,
                         distortion(channel, res.power.rho, res.power.beta,
                                    res.Xf, grid, sigma2)});
    res.power.beta = update_beta(u, grid, sigma2);
    const double after_beta = distortion(channel, res.power.rho, res.power.beta,
                                         res.Xf, grid, sigma2);
    res.trace.push_back({TraceEntry::Stage::AfterBeta, -1, after_beta});
    res.objective_trace.push_back(after_beta);

    if (res.power.beta <= 0.0) {
      res.beta_collapsed = true;
      continue;  // objective is rho-independent; skip the sweep
    }
    if (!opt.sweep_rho) continue;

    const auto contribs = ap_contribution(channel, res.Xf, grid.occupied, N);
    const double beta = res.power.beta;
    // residual r[v] = sum_l rho_l a_{v,l}, refreshed after every update
    std::vector<arma::cx_vec> r(grid.occupied.size());
    for (std::size_t i = 0; i < contribs.size(); ++i) {
      r[i] = contribs[i] * res.power.rho;
    }
    arma::vec energy(L);  // sum_v ||a_{v,l}||^2
    for (int l = 0; l < L; ++l) {
      double e = 0.0;
      for (const auto& A : contribs) {
        e += arma::accu(arma::square(arma::abs(A.col(l))));
      }
      energy[l] = e;
    }
    auto residual_distortion = [&]() {
      double fit = 0.0;
      for (std::size_t i = 0; i < r.size(); ++i) {
        fit += arma::accu(arma::square(
            arma::abs(grid.s.col(grid.occupied[i]) - beta * r[i])));
      }
      return fit + noise_coeff * beta * beta;
    };
    for (int l = 0; l < L; ++l) {
      const double A_l = beta * beta * energy[l];
      double rho_new = 0.0;
      if (A_l > 0.0) {
        double B_l = 0.0;
        for (std::size_t i = 0; i < contribs.size(); ++i) {
          const arma::cx_vec e = grid.s.col(grid.occupied[i]) -
                                 beta * (r[i] - res.power.rho[l] * contribs[i].col(l));
          B_l += beta * arma::cdot(contribs[i].col(l), e).real();
        }
        rho_new = std::min(std::sqrt(p_ant), std::max(0.0, B_l / A_l));
      }
      const double delta = rho_new - res.power.rho[l];
      if (delta != 0.0) {
        for (std::size_t i = 0; i < contribs.size(); ++i) {
          r[i] += delta * contribs[i].col(l);
        }
        res.power.rho[l] = rho_new;
      }
      if (opt.record_coordinate_trace) {
        res.trace.push_back(
            {TraceEntry::Stage::AfterRhoUpdate, l, residual_distortion()});
      }
    }
    const double after_sweep = distortion(channel, res.power.rho, res.power.beta,
                                          res.Xf, grid, sigma2);
    res.trace.push_back({TraceEntry::Stage::AfterSweep, -1, after_sweep});
    res.objective_trace.push_back(after_sweep);
  }

  return res;
}

}  // namespace

PrecodeResult alternating_precode(const FreqChannel& channel,
                                  const SymbolGrid& grid,
                                  const SystemConfig& config,
                                  const AlternatingOptions& options) {
  PrecodeResult res = run_alternating(channel, grid, config, options);
  if (res.beta_collapsed && res.power.beta <= 0.0 &&
      options.fallback_on_beta_collapse && options.sweep_rho) {
    // A dead transmitter would silently produce BER 1/2; fall back to the
    // maximum-power baseline for this OFDM symbol and keep the flag.
    AlternatingOptions fb;
    fb.outer_iters = 1;
    fb.sweep_rho = false;
    fb.sigma2 = options.sigma2;
    fb.fallback_on_beta_collapse = false;
    PrecodeResult base = run_alternating(channel, grid, config, fb);
    base.beta_collapsed = true;
    base.fell_back = true;
    return base;
  }
  return res;
}

PrecodeResult classical_precode(const FreqChannel& channel,
                                const SymbolGrid& grid,
                                const SystemConfig& config, double sigma2) {
  AlternatingOptions opt;
  opt.outer_iters = 1;
  opt.sweep_rho = false;
  opt.sigma2 = sigma2;
  opt.fallback_on_beta_collapse = false;
  return alternating_precode(channel, grid, config, opt);
}

}  // namespace cepc
