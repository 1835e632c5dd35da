#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cepc/errors.hpp"
#include "cepc/runner.hpp"

namespace cepc {

namespace {

using nlohmann::json;

std::vector<int> parse_occupied(const json& j) {
  if (!j.is_array()) {
    throw ConfigError("occupied_subcarriers must be an array");
  }
  std::vector<int> out;
  for (const auto& item : j) {
    if (item.is_number_integer()) {
      out.push_back(item.get<int>());
    } else if (item.is_string()) {
      const std::string s = item.get<std::string>();
      const auto dash = s.find('-', 1);  // allow a leading minus to fail later
      if (dash == std::string::npos) {
        throw ConfigError("occupied range '" + s + "' must look like \"a-b\"");
      }
      int a = 0, b = 0;
      try {
        a = std::stoi(s.substr(0, dash));
        b = std::stoi(s.substr(dash + 1));
      } catch (const std::exception&) {
        throw ConfigError("cannot parse occupied range '" + s + "'");
      }
      if (b < a) throw ConfigError("occupied range '" + s + "' is reversed");
      for (int v = a; v <= b; ++v) out.push_back(v);
    } else {
      throw ConfigError("occupied_subcarriers entries must be ints or \"a-b\"");
    }
  }
  return out;
}

json occupied_to_json(const std::vector<int>& occupied) {
  // compress consecutive runs back into "a-b" strings
  json arr = json::array();
  std::size_t i = 0;
  while (i < occupied.size()) {
    std::size_t j = i;
    while (j + 1 < occupied.size() && occupied[j + 1] == occupied[j] + 1) ++j;
    if (j > i + 1) {
      arr.push_back(std::to_string(occupied[i]) + "-" + std::to_string(occupied[j]));
    } else {
      for (std::size_t k = i; k <= j; ++k) arr.push_back(occupied[k]);
    }
    i = j + 1;
  }
  return arr;
}

template <typename T>
T take(json& obj, const char* key, std::optional<T> fallback = std::nullopt) {
  if (!obj.contains(key)) {
    if (fallback.has_value()) return *fallback;
    throw ConfigError(std::string("missing required config key '") + key + "'");
  }
  T value;
  try {
    value = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
  obj.erase(key);
  return value;
}

void reject_unknown(const json& obj, const std::string& where) {
  if (obj.empty()) return;
  std::ostringstream oss;
  oss << "unknown config key(s) in " << where << ":";
  for (auto it = obj.begin(); it != obj.end(); ++it) oss << " '" << it.key() << "'";
  throw ConfigError(oss.str());
}

SystemConfig config_from_json(json j) {
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  SystemConfig c;
  c.ap_count = take<int>(j, "ap_count");
  c.antennas_per_ap = take<int>(j, "antennas_per_ap");
  c.ue_count = take<int>(j, "ue_count");
  c.dft_size = take<int>(j, "dft_size");
  if (!j.contains("occupied_subcarriers")) {
    throw ConfigError("missing required config key 'occupied_subcarriers'");
  }
  c.occupied = parse_occupied(j.at("occupied_subcarriers"));
  j.erase("occupied_subcarriers");
  c.delta_f_hz = take<double>(j, "subcarrier_spacing_hz");
  c.channel_memory = take<int>(j, "channel_memory");
  c.dac_bits = take<int>(j, "dac_bits");
  c.p_ant_watts = take<double>(j, "max_antenna_power_w");
  c.noise_figure_db = take<double>(j, "noise_figure_db");
  c.area_side_m = take<double>(j, "area_side_m");
  c.ap_ue_height_m = take<double>(j, "ap_ue_height_m");
  c.shadow_std_db = take<double>(j, "shadow_std_db");
  c.asd_deg = take<double>(j, "angular_spread_deg");
  c.n_setups = take<int>(j, "setups", 1);
  c.ofdm_symbols_per_setup = take<int>(j, "ofdm_symbols_per_setup", 10);
  c.outer_iters = take<int>(j, "power_control_outer_iters", 5);
  c.master_seed = take<std::uint64_t>(j, "master_seed", std::uint64_t{1});
  c.freeze_rho = take<bool>(j, "freeze_rho", false);
  if (j.contains("solver")) {
    json s = j.at("solver");
    j.erase("solver");
    if (!s.is_object()) throw ConfigError("solver section must be an object");
    SolverParams def;
    c.solver.max_iters = take<int>(s, "max_iters", def.max_iters);
    c.solver.step_size = take<double>(s, "step_size", def.step_size);
    c.solver.tol = take<double>(s, "tol", def.tol);
    c.solver.over_relaxation =
        take<double>(s, "over_relaxation", def.over_relaxation);
    reject_unknown(s, "solver");
  }
  reject_unknown(j, "config root");
  return c;
}

}  // namespace

SystemConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(std::move(j));
}

SystemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_json(const SystemConfig& c) {
  json j;
  j["ap_count"] = c.ap_count;
  j["antennas_per_ap"] = c.antennas_per_ap;
  j["ue_count"] = c.ue_count;
  j["dft_size"] = c.dft_size;
  j["occupied_subcarriers"] = occupied_to_json(c.occupied);
  j["subcarrier_spacing_hz"] = c.delta_f_hz;
  j["channel_memory"] = c.channel_memory;
  j["dac_bits"] = c.dac_bits;
  j["max_antenna_power_w"] = c.p_ant_watts;
  j["noise_figure_db"] = c.noise_figure_db;
  j["area_side_m"] = c.area_side_m;
  j["ap_ue_height_m"] = c.ap_ue_height_m;
  j["shadow_std_db"] = c.shadow_std_db;
  j["angular_spread_deg"] = c.asd_deg;
  j["setups"] = c.n_setups;
  j["ofdm_symbols_per_setup"] = c.ofdm_symbols_per_setup;
  j["power_control_outer_iters"] = c.outer_iters;
  j["master_seed"] = c.master_seed;
  j["freeze_rho"] = c.freeze_rho;
  j["solver"] = {{"max_iters", c.solver.max_iters},
                 {"step_size", c.solver.step_size},
                 {"tol", c.solver.tol},
                 {"over_relaxation", c.solver.over_relaxation}};
  return j.dump(2);
}

}  // namespace cepc
