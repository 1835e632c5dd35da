#pragma once

#include <armadillo>
#include <complex>
#include <utility>
#include <vector>

#include "cepc/rng.hpp"

namespace cepc {

/// Unitary DFT along a vector (time -> frequency), kernel exp(-j2pi n v / S)/sqrt(S).
arma::cx_vec dft(const arma::cx_vec& time);
arma::cx_vec idft(const arma::cx_vec& freq);

/// Row-wise unitary transforms of an M x S matrix: freq = time * F,
/// time = freq * F^H with F the unitary S-point DFT matrix.
arma::cx_mat dft_rows(const arma::cx_mat& time);
arma::cx_mat idft_rows(const arma::cx_mat& freq);

/// Allocation-free variants; out is resized if needed, in and out must be
/// distinct objects.
void dft_rows_into(const arma::cx_mat& time, arma::cx_mat& freq);
void idft_rows_into(const arma::cx_mat& freq, arma::cx_mat& time);

/// As above but checks the row length; throws LengthMismatch.
arma::cx_mat dft_rows(const arma::cx_mat& time, int expected_len);
arma::cx_mat idft_rows(const arma::cx_mat& freq, int expected_len);

/// Phase-quantized constant-envelope alphabet:
/// points[q] = amplitude * exp(j pi (2q+1) / 2^p), q = 0..2^p-1.
struct CEAlphabet {
  int bits = 0;
  double amplitude = 0.0;
  arma::cx_vec points;

  static CEAlphabet make(int bits, double amplitude);
};

/// Index of the nearest alphabet point (Euclidean); ties resolve to the
/// lowest index, zero input maps to index 0.
int quantize_ce_index(std::complex<double> value, const CEAlphabet& alphabet);

/// Nearest alphabet point itself (exact table entry).
std::complex<double> quantize_ce(std::complex<double> value,
                                 const CEAlphabet& alphabet);

/// Element-wise quantization of a complex matrix.
arma::cx_mat quantize_ce(const arma::cx_mat& values, const CEAlphabet& alphabet);

/// Gray-mapped unit-energy QPSK: (0,0)->(1+j)/sqrt2, (0,1)->(-1+j)/sqrt2,
/// (1,1)->(-1-j)/sqrt2, (1,0)->(1-j)/sqrt2.
std::complex<double> qpsk_map(unsigned b0, unsigned b1);

/// Per-subcarrier data symbols, zero on guard subcarriers, plus the
/// generating bits for error accounting. bits is K x (2 S_I): columns
/// (2i, 2i+1) hold the bit pair of the i-th occupied subcarrier.
struct SymbolGrid {
  arma::cx_mat s;               // K x S
  std::vector<int> occupied;    // ordered indices
  arma::Mat<arma::u8> bits;     // K x 2 S_I

  int ue_count() const { return static_cast<int>(s.n_rows); }
  int dft_size() const { return static_cast<int>(s.n_cols); }
  int occupied_count() const { return static_cast<int>(occupied.size()); }
};

SymbolGrid grid_from_bits(const arma::Mat<arma::u8>& bits,
                          const std::vector<int>& occupied, int dft_size);

SymbolGrid build_symbol_grid(int ue_count, const std::vector<int>& occupied,
                             int dft_size, RngStream& rng);

}  // namespace cepc
