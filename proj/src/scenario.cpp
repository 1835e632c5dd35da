#include "cepc/scenario.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "cepc/errors.hpp"

namespace cepc {

namespace {

bool is_perfect_square(int n) {
  if (n < 1) return false;
  const int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  return r * r == n;
}

}  // namespace

std::vector<std::string> SystemConfig::violations() const {
  std::vector<std::string> v;
  auto req = [&](bool ok, const std::string& msg) {
    if (!ok) v.push_back(msg);
  };
  req(ap_count >= 1, "ap_count must be >= 1");
  req(antennas_per_ap >= 1, "antennas_per_ap must be >= 1");
  req(ue_count >= 1, "ue_count must be >= 1");
  req(dft_size >= 1, "dft_size must be >= 1");
  req(is_perfect_square(ap_count),
      "ap_count must be a perfect square for grid placement");
  req(!occupied.empty(), "occupied subcarrier set must be non-empty");
  req(static_cast<int>(occupied.size()) <= dft_size,
      "occupied set larger than dft_size");
  {
    std::set<int> seen;
    bool in_range = true, distinct = true;
    for (int idx : occupied) {
      if (idx < 0 || idx >= dft_size) in_range = false;
      if (!seen.insert(idx).second) distinct = false;
    }
    req(in_range, "occupied indices must lie in [0, dft_size)");
    req(distinct, "occupied indices must be distinct");
  }
  req(delta_f_hz > 0.0, "subcarrier spacing must be positive");
  req(channel_memory >= 0, "channel_memory must be >= 0");
  req(channel_memory + 1 <= dft_size,
      "channel_memory + 1 must not exceed dft_size (cyclic-prefix validity)");
  req(dac_bits >= 1, "dac_bits must be >= 1");
  req(dac_bits <= 24, "dac_bits above 24 is not supported");
  req(p_ant_watts > 0.0, "max antenna power must be positive");
  req(area_side_m > 0.0, "area side must be positive");
  req(ap_ue_height_m > 0.0, "AP-UE height difference must be positive");
  req(shadow_std_db >= 0.0, "shadow std must be >= 0");
  req(asd_deg >= 0.0, "angular spread must be >= 0");
  req(n_setups >= 1, "setups must be >= 1");
  req(ofdm_symbols_per_setup >= 1, "ofdm_symbols_per_setup must be >= 1");
  req(outer_iters >= 1, "power_control_outer_iters must be >= 1");
  req(solver.max_iters >= 1, "solver.max_iters must be >= 1");
  req(solver.step_size > 0.0, "solver.step_size must be positive");
  req(solver.tol > 0.0, "solver.tol must be positive");
  req(solver.over_relaxation > 0.0 && solver.over_relaxation <= 2.0,
      "solver.over_relaxation must lie in (0, 2]");
  return v;
}

void SystemConfig::validate() const {
  const auto v = violations();
  if (v.empty()) return;
  std::ostringstream oss;
  oss << "invalid configuration:";
  for (const auto& msg : v) oss << "\n  - " << msg;
  throw ConfigError(oss.str());
}

double derive_noise_power(const SystemConfig& config) {
  const double bandwidth = static_cast<double>(config.dft_size) * config.delta_f_hz;
  const double db = -204.0 + 10.0 * std::log10(bandwidth) + config.noise_figure_db;
  return std::pow(10.0, db / 10.0);
}

double derive_gamma(const SystemConfig& config, double sigma2, double p_ant) {
  return sigma2 * static_cast<double>(config.occupied_count()) *
         static_cast<double>(config.ue_count) / p_ant;
}

SetupGeometry build_geometry(const SystemConfig& config, RngStream& rng) {
  const int L = config.ap_count;
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(L))));
  if (side * side != L) {
    throw NonSquareAPCount("ap_count " + std::to_string(L) +
                           " does not admit a square grid");
  }
  SetupGeometry geom;
  geom.height_m = config.ap_ue_height_m;
  geom.ap_xy.set_size(L, 2);
  const double spacing = config.area_side_m / static_cast<double>(side);
  for (int ix = 0; ix < side; ++ix) {
    for (int iy = 0; iy < side; ++iy) {
      const int l = ix * side + iy;
      geom.ap_xy(l, 0) = (ix + 0.5) * spacing;
      geom.ap_xy(l, 1) = (iy + 0.5) * spacing;
    }
  }
  geom.ue_xy.set_size(config.ue_count, 2);
  for (int k = 0; k < config.ue_count; ++k) {
    geom.ue_xy(k, 0) = rng.uniform() * config.area_side_m;
    geom.ue_xy(k, 1) = rng.uniform() * config.area_side_m;
  }
  return geom;
}

}  // namespace cepc
