#include "cepc/channel.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "cepc/errors.hpp"

namespace cepc {

LargeScale large_scale_fading(const SetupGeometry& geometry,
                              double shadow_std_db, RngStream& rng) {
  const int K = static_cast<int>(geometry.ue_xy.n_rows);
  const int L = static_cast<int>(geometry.ap_xy.n_rows);
  LargeScale ls;
  ls.beta.set_size(K, L);
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) {
      const double d = geometry.distance_3d(k, l);
      const double z = shadow_std_db * rng.normal();
      const double db = -30.5 - 36.7 * std::log10(d) + z;
      ls.beta(k, l) = std::pow(10.0, db / 10.0);
    }
  }
  return ls;
}

void gauss_hermite_normal(int order, arma::vec& nodes, arma::vec& weights) {
  // Golub-Welsch on the physicists' Hermite recurrence; nodes come back
  // pre-scaled by sqrt(2) so that E{f(delta)} = sum_i w_i f(sigma*nodes_i).
  arma::mat J(order, order, arma::fill::zeros);
  for (int i = 1; i < order; ++i) {
    const double b = std::sqrt(static_cast<double>(i) / 2.0);
    J(i, i - 1) = b;
    J(i - 1, i) = b;
  }
  arma::vec eval;
  arma::mat evec;
  if (!arma::eig_sym(eval, evec, J)) {
    throw FactorizationFailure("Gauss-Hermite eigendecomposition failed");
  }
  nodes = std::numbers::sqrt2 * eval;
  weights.set_size(order);
  for (int i = 0; i < order; ++i) {
    weights[i] = evec(0, i) * evec(0, i);
  }
  weights /= arma::accu(weights);
}

CorrelationSet spatial_correlation(const SetupGeometry& geometry,
                                   const LargeScale& large_scale,
                                   double asd_deg, int antennas) {
  const int K = static_cast<int>(geometry.ue_xy.n_rows);
  const int L = static_cast<int>(geometry.ap_xy.n_rows);
  const int N = antennas;
  const double sigma_phi = asd_deg * std::numbers::pi / 180.0;

  constexpr int kQuadOrder = 63;
  arma::vec nodes, weights;
  gauss_hermite_normal(kQuadOrder, nodes, weights);

  CorrelationSet set;
  set.antennas = N;
  set.R.set_size(K, L);
  arma::cx_vec lags(N);
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) {
      const double bearing =
          std::atan2(geometry.ue_xy(k, 1) - geometry.ap_xy(l, 1),
                     geometry.ue_xy(k, 0) - geometry.ap_xy(l, 0));
      lags.zeros();
      for (int i = 0; i < kQuadOrder; ++i) {
        const double phi = bearing + sigma_phi * nodes[i];
        const double s = std::sin(phi);
        for (int d = 0; d < N; ++d) {
          lags[d] += weights[i] *
                     std::polar(1.0, std::numbers::pi * static_cast<double>(d) * s);
        }
      }
      arma::cx_mat R(N, N);
      for (int m = 0; m < N; ++m) {
        for (int n = 0; n < N; ++n) {
          R(m, n) = (m >= n) ? lags[m - n] : std::conj(lags[n - m]);
        }
      }
      R *= large_scale.beta(k, l);
      const double tr = arma::trace(R).real();
      if (tr > 0.0) {
        R *= (static_cast<double>(N) * large_scale.beta(k, l)) / tr;
      }
      set.R(k, l) = std::move(R);
    }
  }
  return set;
}

PowerDelayProfile pdp_from_draws(const arma::vec& draws) {
  PowerDelayProfile pdp;
  pdp.p = arma::sort(draws, "descend");
  const double total = arma::accu(pdp.p);
  if (total > 0.0) pdp.p /= total;
  return pdp;
}

PowerDelayProfile generate_pdp(int memory, RngStream& rng) {
  arma::vec draws(memory + 1);
  for (auto& d : draws) d = rng.uniform_pos();
  return pdp_from_draws(draws);
}

namespace {

/// R^{1/2} by eigendecomposition; eigenvalues in [-1e-10 * trace, 0) are
/// clamped to zero, anything lower is an error.
arma::cx_mat matrix_sqrt_psd(const arma::cx_mat& R) {
  arma::vec eval;
  arma::cx_mat evec;
  const arma::cx_mat H = (R + R.t()) / 2.0;
  if (!arma::eig_sym(eval, evec, H)) {
    throw FactorizationFailure("correlation eigendecomposition failed");
  }
  const double tr = arma::trace(H).real();
  const double floor = -1e-10 * std::max(tr, 0.0);
  for (auto& v : eval) {
    if (v < floor) {
      throw FactorizationFailure("correlation matrix is numerically indefinite");
    }
    if (v < 0.0) v = 0.0;
  }
  return evec * arma::diagmat(arma::sqrt(eval)) * evec.t();
}

}  // namespace

ChannelRealization generate_taps(const CorrelationSet& corr,
                                 const PowerDelayProfile& pdp, RngStream& rng) {
  const int K = static_cast<int>(corr.R.n_rows);
  const int L = static_cast<int>(corr.R.n_cols);
  const int N = corr.antennas;
  const int taps = static_cast<int>(pdp.p.n_elem);

  ChannelRealization real;
  real.taps.assign(taps, arma::cx_mat(K, L * N, arma::fill::zeros));
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) {
      const arma::cx_mat half = matrix_sqrt_psd(corr.R(k, l));
      for (int t = 0; t < taps; ++t) {
        const arma::cx_vec h = std::sqrt(pdp.p[t]) * (half * rng.cnormal_vec(N));
        real.taps[t].submat(k, l * N, k, (l + 1) * N - 1) = h.st();
      }
    }
  }
  return real;
}

namespace {
constexpr char kDumpMagic[8] = {'C', 'E', 'P', 'C', 'C', 'H', 'A', 'N'};
constexpr std::int64_t kDumpVersion = 1;
}  // namespace

void dump_channel(const std::string& path, const ChannelDumpHeader& header,
                  const ChannelRealization& realization) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write channel dump '" + path + "'");
  out.write(kDumpMagic, sizeof(kDumpMagic));
  auto put = [&](std::int64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
  };
  put(kDumpVersion);
  put(header.ap_count);
  put(header.antennas_per_ap);
  put(header.ue_count);
  put(header.memory);
  put(header.master_seed);
  put(header.setup_id);
  for (const auto& tap : realization.taps) {
    out.write(reinterpret_cast<const char*>(tap.memptr()),
              static_cast<std::streamsize>(tap.n_elem * sizeof(arma::cx_double)));
  }
  if (!out) throw IoError("write failed for channel dump '" + path + "'");
}

ChannelRealization load_channel(const std::string& path,
                                ChannelDumpHeader& header_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open channel dump '" + path + "'");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kDumpMagic, sizeof(magic)) != 0) {
    throw IoError("'" + path + "' is not a channel dump");
  }
  auto get = [&]() {
    std::int64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
  };
  const std::int64_t version = get();
  if (version != kDumpVersion) {
    throw IoError("unsupported channel dump version " + std::to_string(version));
  }
  header_out.ap_count = get();
  header_out.antennas_per_ap = get();
  header_out.ue_count = get();
  header_out.memory = get();
  header_out.master_seed = get();
  header_out.setup_id = get();
  const int K = static_cast<int>(header_out.ue_count);
  const int M = static_cast<int>(header_out.ap_count * header_out.antennas_per_ap);
  ChannelRealization real;
  for (std::int64_t t = 0; t <= header_out.memory; ++t) {
    arma::cx_mat tap(K, M);
    in.read(reinterpret_cast<char*>(tap.memptr()),
            static_cast<std::streamsize>(tap.n_elem * sizeof(arma::cx_double)));
    real.taps.push_back(std::move(tap));
  }
  if (!in) throw IoError("truncated channel dump '" + path + "'");
  return real;
}

FreqChannel frequency_response(const ChannelRealization& realization,
                               int dft_size) {
  const int taps = static_cast<int>(realization.taps.size());
  if (taps == 0) throw EmptyInput("no taps");
  if (taps > dft_size) {
    throw DimensionMismatch("tap count exceeds DFT size");
  }
  const int K = static_cast<int>(realization.taps[0].n_rows);
  const int M = static_cast<int>(realization.taps[0].n_cols);

  FreqChannel freq(dft_size, arma::cx_mat(K, M));
  arma::cx_mat padded(dft_size, M);
  for (int k = 0; k < K; ++k) {
    padded.zeros();
    for (int t = 0; t < taps; ++t) {
      padded.row(t) = realization.taps[t].row(k);
    }
    const arma::cx_mat f = arma::fft(padded);  // column-wise, unnormalized
    for (int nu = 0; nu < dft_size; ++nu) {
      freq[nu].row(k) = f.row(nu);
    }
  }
  return freq;
}

}  // namespace cepc
