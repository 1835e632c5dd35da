#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <complex>
#include <numbers>

#include "cepc/errors.hpp"
#include "cepc/waveform.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace cepc;
using std::complex;

namespace {
arma::cx_vec random_cvec(int n, RngStream& rng) { return rng.cnormal_vec(n); }
}  // namespace

TEST_CASE("impulse transforms to a constant row") {
  arma::cx_vec e0(16, arma::fill::zeros);
  e0[0] = 1.0;
  const arma::cx_vec f = dft(e0);
  for (const auto& z : f) {
    CHECK(z.real() == doctest::Approx(0.25));
    CHECK(std::abs(z.imag()) < 1e-14);
  }
}

TEST_CASE("unitary transforms preserve energy and round-trip") {
  RngStream rng(3, 0, "wave");
  arma::cx_mat X(5, 32);
  for (auto& z : X) z = rng.cnormal();
  const arma::cx_mat F = dft_rows(X);
  CHECK(arma::norm(F, "fro") == doctest::Approx(arma::norm(X, "fro")).epsilon(1e-10));
  const arma::cx_mat back = idft_rows(F);
  CHECK(arma::abs(back - X).max() < 1e-10);
}

TEST_CASE("dft matches the naive oracle") {
  RngStream rng(4, 0, "wave");
  const arma::cx_vec x = random_cvec(64, rng);
  const arma::cx_vec fast = dft(x);
  const arma::cx_vec slow = oracle::naive_dft(x);
  CHECK(arma::abs(fast - slow).max() < 1e-9);
}

TEST_CASE("length mismatch is detected") {
  arma::cx_mat X(3, 8, arma::fill::ones);
  CHECK_THROWS_AS(dft_rows(X, 16), LengthMismatch);
  CHECK_THROWS_AS(idft_rows(X, 4), LengthMismatch);
  CHECK_NOTHROW(dft_rows(X, 8));
}

TEST_CASE("alphabet points sit on the scaled unit circle") {
  const CEAlphabet a = CEAlphabet::make(3, 2.0);
  REQUIRE(a.points.n_elem == 8);
  for (int q = 0; q < 8; ++q) {
    CHECK(std::abs(a.points[q]) == doctest::Approx(2.0));
    const double expected = std::numbers::pi * (2 * q + 1) / 8.0;
    CHECK(std::arg(a.points[q]) ==
          doctest::Approx(expected > std::numbers::pi ? expected - 2 * std::numbers::pi
                                                      : expected));
  }
  CHECK_THROWS(CEAlphabet::make(0, 1.0));
}

TEST_CASE("quantizer picks the nearest phase") {
  const CEAlphabet a2 = CEAlphabet::make(2, 1.0);
  const complex<double> q = quantize_ce(complex<double>{1.0, 0.1}, a2);
  CHECK(q == a2.points[0]);  // exp(j pi/4)
  CHECK(std::arg(q) == doctest::Approx(std::numbers::pi / 4));

  const CEAlphabet a1 = CEAlphabet::make(1, 1.0);
  REQUIRE(a1.points.n_elem == 2);
  CHECK(std::arg(a1.points[0]) == doctest::Approx(std::numbers::pi / 2));
  CHECK(quantize_ce(complex<double>{1.0, 0.01}, a1) == a1.points[0]);  // +j wins
  CHECK(quantize_ce(complex<double>{1.0, -0.01}, a1) == a1.points[1]); // -j wins
}

TEST_CASE("quantizer is idempotent and defaults to index 0") {
  const CEAlphabet a = CEAlphabet::make(4, 0.7);
  for (arma::uword q = 0; q < a.points.n_elem; ++q) {
    CHECK(quantize_ce(a.points[q], a) == a.points[q]);
  }
  CHECK(quantize_ce(complex<double>{0.0, 0.0}, a) == a.points[0]);
}

TEST_CASE("quantizer commutes with alphabet rotations") {
  RngStream rng(6, 0, "wave");
  for (int bits : {1, 2, 3, 6}) {
    const CEAlphabet a = CEAlphabet::make(bits, 1.0);
    const int n = 1 << bits;
    for (int trial = 0; trial < 200; ++trial) {
      const complex<double> v = rng.cnormal();
      if (std::abs(v) < 1e-6) continue;
      const complex<double> w = std::polar(1.0, 2.0 * std::numbers::pi / n) * v;
      const complex<double> qw = quantize_ce(w, a);
      const complex<double> rq =
          std::polar(1.0, 2.0 * std::numbers::pi / n) * quantize_ce(v, a);
      CHECK(std::abs(qw - rq) < 1e-9);
    }
  }
}

TEST_CASE("quantized matrices satisfy the CE energy identity") {
  RngStream rng(7, 0, "wave");
  const CEAlphabet a = CEAlphabet::make(2, 1.3);
  arma::cx_mat X(4, 16);
  for (auto& z : X) z = rng.cnormal();
  const arma::cx_mat Q = quantize_ce(X, a);
  for (const auto& z : Q) CHECK(std::abs(z) == doctest::Approx(1.3));
  CHECK(arma::norm(Q, "fro") * arma::norm(Q, "fro") ==
        doctest::Approx(4 * 16 * 1.3 * 1.3));
}

TEST_CASE("gray QPSK mapping and bit counting") {
  const double r = std::numbers::sqrt2 / 2.0;
  CHECK(qpsk_map(0, 0) == complex<double>{r, r});
  CHECK(qpsk_map(0, 1) == complex<double>{-r, r});
  CHECK(qpsk_map(1, 1) == complex<double>{-r, -r});
  CHECK(qpsk_map(1, 0) == complex<double>{r, -r});

  RngStream rng(8, 0, "symbols");
  const auto occupied = testing::desk_occupied();
  const SymbolGrid grid = build_symbol_grid(4, occupied, 64, rng);
  CHECK(grid.bits.n_elem == 4 * 2 * occupied.size());

  // guard columns are exactly zero, occupied entries unit magnitude
  for (int nu = 0; nu < 64; ++nu) {
    const bool occ = std::find(occupied.begin(), occupied.end(), nu) != occupied.end();
    for (int k = 0; k < 4; ++k) {
      if (occ) {
        CHECK(std::abs(grid.s(k, nu)) == doctest::Approx(1.0));
      } else {
        CHECK(grid.s(k, nu) == complex<double>{0.0, 0.0});
      }
    }
  }
}

TEST_CASE("grid_from_bits rejects bad shapes") {
  arma::Mat<arma::u8> bits(2, 5, arma::fill::zeros);
  CHECK_THROWS_AS(grid_from_bits(bits, {0, 1, 2}, 8), DimensionMismatch);
}
