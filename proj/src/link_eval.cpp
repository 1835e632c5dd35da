#include "cepc/link_eval.hpp"

#include <cmath>

#include "cepc/errors.hpp"

namespace cepc {

std::string scheme_name(Scheme scheme) {
  return scheme == Scheme::Baseline ? "baseline" : "power_control";
}

Scheme scheme_from_name(const std::string& name) {
  if (name == "baseline") return Scheme::Baseline;
  if (name == "power_control") return Scheme::PowerControl;
  throw ConfigError("unknown scheme '" + name +
                    "' (expected baseline or power_control)");
}

std::vector<arma::cx_vec> simulate_downlink(const FreqChannel& channel,
                                            const PrecodeResult& precode,
                                            double sigma2,
                                            const SymbolGrid& grid,
                                            int antennas_per_ap,
                                            RngStream& rng) {
  const arma::vec& rho = precode.power.rho;
  const int N = antennas_per_ap;
  if (static_cast<int>(rho.n_elem) * N != static_cast<int>(precode.Xf.n_rows)) {
    throw DimensionMismatch("rho length does not match precoder block count");
  }
  const double noise_std = std::sqrt(sigma2);
  std::vector<arma::cx_vec> soft;
  soft.reserve(grid.occupied.size());
  arma::cx_vec scaled(precode.Xf.n_rows);
  for (int nu : grid.occupied) {
    for (arma::uword l = 0; l < rho.n_elem; ++l) {
      scaled.subvec(l * N, (l + 1) * N - 1) =
          rho[l] * precode.Xf.submat(l * N, nu, (l + 1) * N - 1, nu);
    }
    arma::cx_vec y = channel[nu] * scaled;
    for (int k = 0; k < grid.ue_count(); ++k) {
      y[k] += noise_std * rng.cnormal();
    }
    soft.push_back(precode.power.beta * y);
  }
  return soft;
}

std::pair<unsigned, unsigned> demap_qpsk(std::complex<double> soft) {
  return {soft.imag() < 0.0 ? 1u : 0u, soft.real() < 0.0 ? 1u : 0u};
}

namespace {

/// Every sample must be an exact member of the alphabet table.
std::uint64_t verify_ce_membership(const arma::cx_mat& X,
                                   const CEAlphabet& alphabet) {
  for (const auto& z : X) {
    const std::complex<double> nearest = quantize_ce(z, alphabet);
    if (z.real() != nearest.real() || z.imag() != nearest.imag()) {
      throw Error("constant-envelope invariant violated");
    }
  }
  return X.n_elem;
}

}  // namespace

SetupEval evaluate_setup(const FreqChannel& channel, const SystemConfig& config,
                         Scheme scheme, int dac_bits, int setup_id,
                         double sigma2, double noise_sigma2,
                         bool collect_traces) {
  const int K = config.ue_count;
  if (noise_sigma2 < 0.0) noise_sigma2 = sigma2;
  SystemConfig cfg = config;
  cfg.dac_bits = dac_bits;

  SetupEval eval;
  eval.report.setup_id = setup_id;
  eval.report.scheme = scheme;
  eval.report.dac_bits = dac_bits;
  eval.report.errors.zeros(K);
  eval.report.bits.zeros(K);
  eval.power_frac.zeros(config.ap_count);

  const CEAlphabet unit_alphabet = CEAlphabet::make(dac_bits, 1.0);
  const double sqrt_pant = std::sqrt(config.p_ant_watts);
  arma::vec frozen_rho;

  for (int sym = 0; sym < config.ofdm_symbols_per_setup; ++sym) {
    RngStream bit_rng(cfg.master_seed, setup_id, "symbols", sym);
    RngStream noise_rng(cfg.master_seed, setup_id, "noise", sym);
    const SymbolGrid grid =
        build_symbol_grid(K, cfg.occupied, cfg.dft_size, bit_rng);

    PrecodeResult precode;
    const bool trace_this = collect_traces && sym == 0;
    if (scheme == Scheme::Baseline) {
      AlternatingOptions opt;
      opt.outer_iters = 1;
      opt.sweep_rho = false;
      opt.sigma2 = sigma2;
      opt.fallback_on_beta_collapse = false;
      opt.record_solver_trace = trace_this;
      precode = alternating_precode(channel, grid, cfg, opt);
    } else if (cfg.freeze_rho && sym > 0) {
      AlternatingOptions opt;
      opt.sigma2 = sigma2;
      opt.fixed_rho = frozen_rho;
      opt.sweep_rho = false;
      opt.outer_iters = 1;
      precode = alternating_precode(channel, grid, cfg, opt);
    } else {
      AlternatingOptions opt;
      opt.sigma2 = sigma2;
      opt.record_solver_trace = trace_this;
      precode = alternating_precode(channel, grid, cfg, opt);
      if (cfg.freeze_rho) frozen_rho = precode.power.rho;
    }
    if (trace_this) {
      eval.solver_traces = std::move(precode.solver_traces);
      eval.distortion_trace = precode.objective_trace;
    }
    if (precode.beta_collapsed) ++eval.beta_collapse_count;
    eval.ce_samples_checked += verify_ce_membership(precode.X, unit_alphabet);
    eval.power_frac += arma::square(precode.power.rho / sqrt_pant);

    const auto soft = simulate_downlink(channel, precode, noise_sigma2, grid,
                                        cfg.antennas_per_ap, noise_rng);
    for (int i = 0; i < grid.occupied_count(); ++i) {
      for (int k = 0; k < K; ++k) {
        const auto [b0, b1] = demap_qpsk(soft[i][k]);
        eval.report.errors[k] += (b0 != grid.bits(k, 2 * i)) ? 1 : 0;
        eval.report.errors[k] += (b1 != grid.bits(k, 2 * i + 1)) ? 1 : 0;
        eval.report.bits[k] += 2;
      }
    }
  }

  eval.power_frac /= static_cast<double>(config.ofdm_symbols_per_setup);
  eval.report.ber.set_size(K);
  for (int k = 0; k < K; ++k) {
    eval.report.ber[k] =
        eval.report.bits[k] == 0
            ? 0.0
            : static_cast<double>(eval.report.errors[k]) /
                  static_cast<double>(eval.report.bits[k]);
  }
  return eval;
}

SortedBerCurve aggregate_sorted(const std::vector<BerReport>& reports) {
  if (reports.empty()) throw EmptyInput("no reports to aggregate");
  const arma::uword K = reports.front().ber.n_elem;
  SortedBerCurve curve;
  curve.mean_ber_by_rank.zeros(K);
  for (const auto& r : reports) {
    if (r.ber.n_elem != K) {
      throw DimensionMismatch("reports disagree on UE count");
    }
    curve.mean_ber_by_rank += arma::sort(r.ber, "descend");
  }
  curve.mean_ber_by_rank /= static_cast<double>(reports.size());
  return curve;
}

}  // namespace cepc
