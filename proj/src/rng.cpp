#include "cepc/rng.hpp"

#include <cmath>
#include <numbers>

namespace cepc {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t setup,
                          std::string_view purpose, std::uint64_t lane) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ (setup * 0xd6e8feb86659fd93ULL));
  for (unsigned char c : purpose) {
    h = splitmix64(h ^ c);
  }
  h = splitmix64(h ^ (lane * 0xa0761d6478bd642fULL));
  return h;
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t setup_index,
                     std::string_view purpose, std::uint64_t lane)
    : engine_(derive_seed(master_seed, setup_index, purpose, lane)) {}

unsigned RngStream::bit() {
  if (bits_left_ == 0) {
    bit_buffer_ = engine_();
    bits_left_ = 64;
  }
  unsigned b = static_cast<unsigned>(bit_buffer_ & 1u);
  bit_buffer_ >>= 1;
  --bits_left_;
  return b;
}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_pos() {
  return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
}

double RngStream::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_normal_;
  }
  const double u1 = uniform_pos();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

std::complex<double> RngStream::cnormal() {
  const double re = normal();
  const double im = normal();
  return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
}

arma::vec RngStream::uniform_vec(std::size_t n) {
  arma::vec v(n);
  for (auto& x : v) x = uniform();
  return v;
}

arma::cx_vec RngStream::cnormal_vec(std::size_t n) {
  arma::cx_vec v(n);
  for (auto& x : v) x = cnormal();
  return v;
}

}  // namespace cepc
