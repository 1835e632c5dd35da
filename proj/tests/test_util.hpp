#pragma once

#include <vector>

#include "cepc/scenario.hpp"

namespace cepc::testing {

inline std::vector<int> make_range(int first, int last) {
  std::vector<int> v;
  for (int i = first; i <= last; ++i) v.push_back(i);
  return v;
}

inline std::vector<int> desk_occupied() {
  auto v = make_range(1, 20);
  const auto tail = make_range(44, 63);
  v.insert(v.end(), tail.begin(), tail.end());
  return v;
}

/// Small configuration used across tests: 9 APs on a 3x3 grid, 2 antennas
/// each, 4 UEs, 64-point OFDM with 40 occupied subcarriers.
inline SystemConfig desk_config() {
  SystemConfig c;
  c.ap_count = 9;
  c.antennas_per_ap = 2;
  c.ue_count = 4;
  c.dft_size = 64;
  c.occupied = desk_occupied();
  c.delta_f_hz = 15e3;
  c.channel_memory = 2;
  c.dac_bits = 2;
  c.p_ant_watts = 1.0;
  c.noise_figure_db = 5.0;
  c.area_side_m = 150.0;
  c.ap_ue_height_m = 10.0;
  c.shadow_std_db = 4.0;
  c.asd_deg = 15.0;
  c.n_setups = 1;
  c.ofdm_symbols_per_setup = 2;
  c.outer_iters = 5;
  c.master_seed = 12345;
  return c;
}

}  // namespace cepc::testing
