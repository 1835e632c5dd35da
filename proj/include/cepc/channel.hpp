#pragma once

#include <armadillo>
#include <vector>

#include "cepc/rng.hpp"
#include "cepc/scenario.hpp"

namespace cepc {

/// Frequency-domain channel: one K x M matrix per subcarrier.
using FreqChannel = std::vector<arma::cx_mat>;

struct LargeScale {
  arma::mat beta;  // K x L, linear-scale power gains
};

/// Pathloss-shadowing model: beta[dB] = -30.5 - 36.7 log10(d) + z,
/// z ~ N(0, shadow_std^2). Draw order: UE-major, AP-minor.
LargeScale large_scale_fading(const SetupGeometry& geometry,
                              double shadow_std_db, RngStream& rng);

struct CorrelationSet {
  int antennas = 0;
  arma::field<arma::cx_mat> R;  // K x L of N x N Hermitian PSD
};

/// Local scattering model for a half-wavelength ULA responding to azimuth:
/// [R]_{m,n} = beta * E{exp(j pi (m-n) sin(bearing + delta))},
/// delta ~ N(0, asd^2). The Gaussian expectation is evaluated with
/// deterministic Gauss-Hermite quadrature; trace(R) = N * beta.
CorrelationSet spatial_correlation(const SetupGeometry& geometry,
                                   const LargeScale& large_scale,
                                   double asd_deg, int antennas);

struct PowerDelayProfile {
  arma::vec p;  // T+1 tap powers, descending, sum to 1
};

/// Sorts the draws descending and normalizes to unit sum.
PowerDelayProfile pdp_from_draws(const arma::vec& draws);

/// Draws T+1 i.i.d. Uniform(0,1) tap powers.
PowerDelayProfile generate_pdp(int memory, RngStream& rng);

/// Time-domain taps H[t] in C^{K x M}; row k, column block l holds
/// the transpose of the AP l -> UE k tap vector.
struct ChannelRealization {
  std::vector<arma::cx_mat> taps;  // T+1 of K x M
};

/// h_kl[t] = sqrt(p_t) R_kl^{1/2} g with g ~ CN(0, I_N), i.i.d. over
/// (k, l, t). Throws FactorizationFailure on an indefinite R.
ChannelRealization generate_taps(const CorrelationSet& corr,
                                 const PowerDelayProfile& pdp, RngStream& rng);

/// H_bar[v] = sum_t H[t] exp(-j v (2 pi / S) t), for v = 0..S-1.
FreqChannel frequency_response(const ChannelRealization& realization,
                               int dft_size);

/// Deterministic Gauss-Hermite rule: E{f(delta)}, delta ~ N(0, sigma^2),
/// is approximated by sum_i weights[i] * f(sigma * nodes[i]) with the
/// weights normalized to unit sum. Exposed for testing.
void gauss_hermite_normal(int order, arma::vec& nodes, arma::vec& weights);

/// Binary tap dump for replay. Little-endian layout: the magic "CEPCCHAN,"
/// one int64 format version, then int64 L, N, K, T, master_seed, setup_id,
/// followed by (T+1) * K * L * N complex doubles in column-major tap order.
struct ChannelDumpHeader {
  std::int64_t ap_count = 0;
  std::int64_t antennas_per_ap = 0;
  std::int64_t ue_count = 0;
  std::int64_t memory = 0;  // T
  std::int64_t master_seed = 0;
  std::int64_t setup_id = 0;
};

void dump_channel(const std::string& path, const ChannelDumpHeader& header,
                  const ChannelRealization& realization);
ChannelRealization load_channel(const std::string& path,
                                ChannelDumpHeader& header_out);

}  // namespace cepc
