#pragma once

#include <armadillo>
#include <complex>
#include <cstdint>
#include <random>
#include <string_view>

namespace cepc {

/// Deterministic pseudo-random stream keyed by (master_seed, setup_index,
/// purpose, lane). Streams with identical keys produce identical sequences
/// on every platform; distinct keys give statistically independent streams.
///
/// All floating-point draws are derived from raw 64-bit engine output with
/// fixed arithmetic (no std::*_distribution), so sequences are reproducible
/// across standard libraries.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t setup_index,
            std::string_view purpose, std::uint64_t lane = 0);

  std::uint64_t raw() { return engine_(); }

  /// Single bit, buffered 64 at a time from the engine.
  unsigned bit();

  /// Uniform on [0, 1).
  double uniform();

  /// Uniform on (0, 1].
  double uniform_pos();

  /// Standard normal via Box-Muller.
  double normal();

  /// Circularly symmetric complex normal, E|z|^2 = 1.
  std::complex<double> cnormal();

  arma::vec uniform_vec(std::size_t n);
  arma::cx_vec cnormal_vec(std::size_t n);

 private:
  std::mt19937_64 engine_;
  std::uint64_t bit_buffer_ = 0;
  int bits_left_ = 0;
  double spare_normal_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace cepc
