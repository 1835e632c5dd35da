#include "cepc/waveform.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

#include "cepc/errors.hpp"

namespace cepc {

namespace {

// Batched 1-D transforms along the rows of a column-major M x S matrix,
// executed in place on the caller's memory. Plans use FFTW_ESTIMATE so the
// chosen algorithm (and hence the exact floating-point result) does not
// depend on runtime measurements.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  void execute(arma::cx_mat& m, int sign) {
    const Key key{static_cast<int>(m.n_rows), static_cast<int>(m.n_cols), sign};
    fftw_plan plan;
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = plans_.find(key);
      if (it == plans_.end()) {
        const int n = key.cols;
        fftw_complex* p = reinterpret_cast<fftw_complex*>(m.memptr());
        plan = fftw_plan_many_dft(1, &n, key.rows, p, nullptr, key.rows, 1, p,
                                  nullptr, key.rows, 1, sign,
                                  FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, plan);
      } else {
        plan = it->second;
      }
    }
    fftw_complex* p = reinterpret_cast<fftw_complex*>(m.memptr());
    fftw_execute_dft(plan, p, p);
  }

 private:
  struct Key {
    int rows, cols, sign;
    bool operator<(const Key& o) const {
      return std::tie(rows, cols, sign) < std::tie(o.rows, o.cols, o.sign);
    }
  };
  std::mutex mutex_;
  std::map<Key, fftw_plan> plans_;
};

void transform_rows(const arma::cx_mat& in, arma::cx_mat& out, int sign) {
  out = in;  // copies, then transforms in place
  PlanCache::instance().execute(out, sign);
  out *= 1.0 / std::sqrt(static_cast<double>(in.n_cols));
}

}  // namespace

arma::cx_vec dft(const arma::cx_vec& time) {
  arma::cx_mat m(time.st());
  arma::cx_mat out;
  transform_rows(m, out, FFTW_FORWARD);
  return out.st();
}

arma::cx_vec idft(const arma::cx_vec& freq) {
  arma::cx_mat m(freq.st());
  arma::cx_mat out;
  transform_rows(m, out, FFTW_BACKWARD);
  return out.st();
}

arma::cx_mat dft_rows(const arma::cx_mat& time) {
  arma::cx_mat out;
  transform_rows(time, out, FFTW_FORWARD);
  return out;
}

arma::cx_mat idft_rows(const arma::cx_mat& freq) {
  arma::cx_mat out;
  transform_rows(freq, out, FFTW_BACKWARD);
  return out;
}

void dft_rows_into(const arma::cx_mat& time, arma::cx_mat& freq) {
  transform_rows(time, freq, FFTW_FORWARD);
}

void idft_rows_into(const arma::cx_mat& freq, arma::cx_mat& time) {
  transform_rows(freq, time, FFTW_BACKWARD);
}

namespace {
void check_row_len(const arma::cx_mat& m, int expected) {
  if (static_cast<int>(m.n_cols) != expected) {
    throw LengthMismatch("row length " + std::to_string(m.n_cols) +
                         " does not match expected " + std::to_string(expected));
  }
}
}  // namespace

arma::cx_mat dft_rows(const arma::cx_mat& time, int expected_len) {
  check_row_len(time, expected_len);
  return dft_rows(time);
}

arma::cx_mat idft_rows(const arma::cx_mat& freq, int expected_len) {
  check_row_len(freq, expected_len);
  return idft_rows(freq);
}

CEAlphabet CEAlphabet::make(int bits, double amplitude) {
  if (bits < 1) throw Error("alphabet needs at least one bit");
  CEAlphabet a;
  a.bits = bits;
  a.amplitude = amplitude;
  const int n = 1 << bits;
  a.points.set_size(n);
  for (int q = 0; q < n; ++q) {
    const double phase = std::numbers::pi * (2.0 * q + 1.0) / static_cast<double>(n);
    a.points[q] = std::polar(amplitude, phase);
  }
  return a;
}

int quantize_ce_index(std::complex<double> value, const CEAlphabet& alphabet) {
  const int n = static_cast<int>(alphabet.points.n_elem);
  if (value.real() == 0.0 && value.imag() == 0.0) return 0;
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  auto consider = [&](int q) {
    const double d = std::norm(value - alphabet.points[q]);
    if (d < best_d) {
      best_d = d;
      best = q;
    }
  };
  if (n <= 8) {
    for (int q = 0; q < n; ++q) consider(q);
    return best;
  }
  // Sector lookup, then exact comparison of the sector and its neighbours
  // in increasing-index order so ties still resolve to the lowest index.
  double theta = std::arg(value);  // (-pi, pi]
  if (theta < 0) theta += 2.0 * std::numbers::pi;
  const double step = 2.0 * std::numbers::pi / static_cast<double>(n);
  int q0 = static_cast<int>(std::floor(theta / step));
  if (q0 >= n) q0 = n - 1;
  std::array<int, 3> cand = {(q0 + n - 1) % n, q0, (q0 + 1) % n};
  std::sort(cand.begin(), cand.end());
  for (int q : cand) consider(q);
  return best;
}

std::complex<double> quantize_ce(std::complex<double> value,
                                 const CEAlphabet& alphabet) {
  return alphabet.points[quantize_ce_index(value, alphabet)];
}

arma::cx_mat quantize_ce(const arma::cx_mat& values, const CEAlphabet& alphabet) {
  arma::cx_mat out(values.n_rows, values.n_cols);
  for (arma::uword i = 0; i < values.n_elem; ++i) {
    out[i] = quantize_ce(values[i], alphabet);
  }
  return out;
}

std::complex<double> qpsk_map(unsigned b0, unsigned b1) {
  const double inv_sqrt2 = std::numbers::sqrt2 / 2.0;
  return {(1.0 - 2.0 * static_cast<double>(b1)) * inv_sqrt2,
          (1.0 - 2.0 * static_cast<double>(b0)) * inv_sqrt2};
}

SymbolGrid grid_from_bits(const arma::Mat<arma::u8>& bits,
                          const std::vector<int>& occupied, int dft_size) {
  const int K = static_cast<int>(bits.n_rows);
  const int s_occ = static_cast<int>(occupied.size());
  if (static_cast<int>(bits.n_cols) != 2 * s_occ) {
    throw DimensionMismatch("bit matrix must have 2*|I| columns");
  }
  SymbolGrid grid;
  grid.occupied = occupied;
  grid.bits = bits;
  grid.s.zeros(K, dft_size);
  for (int i = 0; i < s_occ; ++i) {
    const int nu = occupied[i];
    for (int k = 0; k < K; ++k) {
      grid.s(k, nu) = qpsk_map(bits(k, 2 * i), bits(k, 2 * i + 1));
    }
  }
  return grid;
}

SymbolGrid build_symbol_grid(int ue_count, const std::vector<int>& occupied,
                             int dft_size, RngStream& rng) {
  arma::Mat<arma::u8> bits(ue_count, 2 * occupied.size());
  for (int k = 0; k < ue_count; ++k) {
    for (arma::uword c = 0; c < bits.n_cols; ++c) {
      bits(k, c) = static_cast<arma::u8>(rng.bit());
    }
  }
  return grid_from_bits(bits, occupied, dft_size);
}

}  // namespace cepc
