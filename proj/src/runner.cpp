#include "cepc/runner.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cepc/errors.hpp"
#include "cepc/version.hpp"

namespace cepc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

struct Combo {
  Scheme scheme;
  int dac_bits;
};

struct SetupOutcome {
  std::vector<SetupEval> evals;  // one per combo, in combo order
  arma::mat ap_xy;
};

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << body;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(f);
  return fields;
}

}  // namespace

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 0) {
    jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (jobs <= 0) jobs = 1;
  }
  jobs = std::min(jobs, n);
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&]() {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= n) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

FreqChannel build_setup_channel(const SystemConfig& config, int setup_id,
                                SetupGeometry* geometry_out,
                                ChannelRealization* taps_out) {
  const double sigma2 = derive_noise_power(config);
  RngStream geo_rng(config.master_seed, setup_id, "geometry");
  const SetupGeometry geom = build_geometry(config, geo_rng);
  if (geometry_out != nullptr) *geometry_out = geom;

  RngStream shadow_rng(config.master_seed, setup_id, "shadowing");
  LargeScale ls = large_scale_fading(geom, config.shadow_std_db, shadow_rng);
  ls.beta /= sigma2;  // normalized units: unit noise power downstream

  const CorrelationSet corr =
      spatial_correlation(geom, ls, config.asd_deg, config.antennas_per_ap);
  RngStream pdp_rng(config.master_seed, setup_id, "pdp");
  const PowerDelayProfile pdp = generate_pdp(config.channel_memory, pdp_rng);
  RngStream tap_rng(config.master_seed, setup_id, "taps");
  ChannelRealization taps = generate_taps(corr, pdp, tap_rng);
  const FreqChannel freq = frequency_response(taps, config.dft_size);
  if (taps_out != nullptr) *taps_out = std::move(taps);
  return freq;
}

namespace {

struct ResolvedRun {
  SystemConfig config;
  std::vector<Combo> combos;
  std::vector<std::string> scheme_names;
  std::vector<int> dac_bits;
  int power_map_combo = -1;  // combo index feeding power_map.csv
};

ResolvedRun resolve_run(const RunOptions& options) {
  ResolvedRun run;
  if (!options.replay_manifest.empty()) {
    std::ifstream in(options.replay_manifest);
    if (!in) throw MissingManifest("cannot open manifest '" +
                                   options.replay_manifest + "'");
    json m;
    try {
      m = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!m.contains("config")) throw ConfigError("manifest lacks a config snapshot");
    run.config = parse_config(m.at("config").dump());
    for (const auto& s : m.at("schemes")) {
      run.scheme_names.push_back(s.get<std::string>());
    }
    for (const auto& b : m.at("dac_bits")) run.dac_bits.push_back(b.get<int>());
  } else {
    run.config = load_config(options.config_path);
    run.scheme_names = options.schemes;
    if (run.scheme_names.empty()) {
      run.scheme_names = {"baseline", "power_control"};
    }
    run.dac_bits = options.dac_bits;
    if (run.dac_bits.empty()) run.dac_bits = {run.config.dac_bits};
  }

  if (options.seed) run.config.master_seed = *options.seed;
  if (options.setups) run.config.n_setups = *options.setups;
  if (options.symbols) run.config.ofdm_symbols_per_setup = *options.symbols;
  if (options.freeze_rho) run.config.freeze_rho = *options.freeze_rho;

  for (const auto& name : run.scheme_names) {
    for (int p : run.dac_bits) {
      if (p < 1) throw ConfigError("dac bits must be >= 1");
      run.combos.push_back({scheme_from_name(name), p});
    }
  }
  for (std::size_t i = 0; i < run.combos.size(); ++i) {
    if (run.combos[i].scheme == Scheme::PowerControl) {
      run.power_map_combo = static_cast<int>(i);
      break;
    }
  }
  run.config.validate();
  return run;
}

void execute_run(const ResolvedRun& run, const RunOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  const SystemConfig& cfg = run.config;
  const int n_setups = cfg.n_setups;

  std::vector<SetupOutcome> outcomes(n_setups);
  std::mutex log_mutex;
  std::atomic<int> done{0};
  if (options.dump_channels) fs::create_directories(options.out_dir);
  parallel_for(n_setups, options.jobs, [&](int setup) {
    SetupGeometry geom;
    ChannelRealization taps;
    const FreqChannel channel =
        build_setup_channel(cfg, setup, &geom,
                            options.dump_channels ? &taps : nullptr);
    if (options.dump_channels) {
      ChannelDumpHeader header;
      header.ap_count = cfg.ap_count;
      header.antennas_per_ap = cfg.antennas_per_ap;
      header.ue_count = cfg.ue_count;
      header.memory = cfg.channel_memory;
      header.master_seed = static_cast<std::int64_t>(cfg.master_seed);
      header.setup_id = setup;
      dump_channel((fs::path(options.out_dir) /
                    ("channel_setup" + std::to_string(setup) + ".bin"))
                       .string(),
                   header, taps);
    }
    SetupOutcome& out = outcomes[setup];
    out.ap_xy = geom.ap_xy;
    for (const Combo& combo : run.combos) {
      out.evals.push_back(evaluate_setup(channel, cfg, combo.scheme,
                                         combo.dac_bits, setup, 1.0, -1.0,
                                         options.verbose_diag));
    }
    const int d = ++done;
    std::lock_guard<std::mutex> lock(log_mutex);
    std::cerr << "setup " << d << "/" << n_setups << " done\n";
  });

  fs::create_directories(options.out_dir);
  const fs::path dir(options.out_dir);

  // ber_per_ue.csv: per-setup BER sorted worst-first (rank 1 = worst UE)
  {
    std::ostringstream csv;
    csv << "setup_id,scheme,dac_bits,ue_rank,ber\n";
    for (int setup = 0; setup < n_setups; ++setup) {
      for (std::size_t ci = 0; ci < run.combos.size(); ++ci) {
        const BerReport& rep = outcomes[setup].evals[ci].report;
        const arma::vec sorted = arma::sort(rep.ber, "descend");
        for (arma::uword rank = 0; rank < sorted.n_elem; ++rank) {
          csv << setup << ',' << scheme_name(rep.scheme) << ',' << rep.dac_bits
              << ',' << (rank + 1) << ',' << fmt(sorted[rank]) << '\n';
        }
      }
    }
    write_file(dir / "ber_per_ue.csv", csv.str());
  }

  // sorted_curve.csv: rank-wise mean of the sorted per-setup curves
  {
    std::ostringstream csv;
    csv << "scheme,dac_bits,ue_rank,mean_ber\n";
    for (std::size_t ci = 0; ci < run.combos.size(); ++ci) {
      std::vector<BerReport> reports;
      reports.reserve(n_setups);
      for (int setup = 0; setup < n_setups; ++setup) {
        reports.push_back(outcomes[setup].evals[ci].report);
      }
      const SortedBerCurve curve = aggregate_sorted(reports);
      for (arma::uword rank = 0; rank < curve.mean_ber_by_rank.n_elem; ++rank) {
        csv << scheme_name(run.combos[ci].scheme) << ',' << run.combos[ci].dac_bits
            << ',' << (rank + 1) << ',' << fmt(curve.mean_ber_by_rank[rank])
            << '\n';
      }
    }
    write_file(dir / "sorted_curve.csv", csv.str());
  }

  // power_map.csv: normalized per-AP transmit powers of the power-control
  // scheme (first requested DAC resolution), averaged over OFDM symbols
  {
    std::ostringstream csv;
    csv << "setup_id,ap_index,ap_x,ap_y,p_l_over_P_ant\n";
    if (run.power_map_combo >= 0) {
      for (int setup = 0; setup < n_setups; ++setup) {
        const SetupOutcome& out = outcomes[setup];
        const arma::vec& frac = out.evals[run.power_map_combo].power_frac;
        for (arma::uword l = 0; l < frac.n_elem; ++l) {
          csv << setup << ',' << l << ',' << fmt(out.ap_xy(l, 0)) << ','
              << fmt(out.ap_xy(l, 1)) << ',' << fmt(frac[l]) << '\n';
        }
      }
    }
    write_file(dir / "power_map.csv", csv.str());
  }

  // first-symbol objective traces: solver per-iteration objectives and the
  // alternating distortion values, one row per trace point
  if (options.verbose_diag) {
    std::ostringstream csv;
    csv << "setup_id,scheme,dac_bits,kind,outer_iter,step,value\n";
    for (int setup = 0; setup < n_setups; ++setup) {
      for (std::size_t ci = 0; ci < run.combos.size(); ++ci) {
        const SetupEval& eval = outcomes[setup].evals[ci];
        const std::string tag = scheme_name(run.combos[ci].scheme) + "," +
                                std::to_string(run.combos[ci].dac_bits);
        for (std::size_t o = 0; o < eval.solver_traces.size(); ++o) {
          for (std::size_t it = 0; it < eval.solver_traces[o].size(); ++it) {
            csv << setup << ',' << tag << ",solver_objective," << o << ','
                << it << ',' << fmt(eval.solver_traces[o][it]) << '\n';
          }
        }
        for (std::size_t st = 0; st < eval.distortion_trace.size(); ++st) {
          csv << setup << ',' << tag << ",distortion," << st << ",0,"
              << fmt(eval.distortion_trace[st]) << '\n';
        }
      }
    }
    write_file(dir / "diag_traces.csv", csv.str());
  }

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json manifest;
  manifest["schema_version"] = kCsvSchemaVersion;
  manifest["code_version"] = kVersion;
  manifest["config"] = json::parse(config_to_json(cfg));
  manifest["master_seed"] = cfg.master_seed;
  manifest["schemes"] = run.scheme_names;
  manifest["dac_bits"] = run.dac_bits;
  manifest["outputs"] = {{"ber_per_ue", "ber_per_ue.csv"},
                         {"sorted_curve", "sorted_curve.csv"},
                         {"power_map", "power_map.csv"}};
  if (run.power_map_combo >= 0) {
    manifest["power_map_source"] = {
        {"scheme", scheme_name(run.combos[run.power_map_combo].scheme)},
        {"dac_bits", run.combos[run.power_map_combo].dac_bits}};
  } else {
    manifest["power_map_source"] = nullptr;
  }
  manifest["jobs"] = options.jobs;
  manifest["duration_seconds"] = secs;
  manifest["float_contract"] =
      "IEEE-754 double; identical binaries reproduce identical CSV bytes";
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace

int cmd_run(const RunOptions& options) {
  ResolvedRun run;
  try {
    run = resolve_run(options);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  try {
    execute_run(run, options);
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

int cmd_validate(const std::string& config_path) {
  SystemConfig cfg;
  try {
    cfg = load_config(config_path);
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "invalid: " << e.what() << "\n";
    return 1;
  }
  const double sigma2 = derive_noise_power(cfg);
  const double gamma = derive_gamma(cfg, sigma2, cfg.p_ant_watts);
  std::cout << "configuration valid\n";
  std::cout << "  total antennas M      = " << cfg.total_antennas() << "\n";
  std::cout << "  occupied S_I          = " << cfg.occupied_count() << "\n";
  std::cout << "  bandwidth [Hz]        = " << fmt(cfg.dft_size * cfg.delta_f_hz)
            << "\n";
  std::cout << "  noise power [W]       = " << fmt(sigma2) << " ("
            << fmt(10.0 * std::log10(sigma2)) << " dB)\n";
  std::cout << "  gamma                 = " << fmt(gamma) << "\n";
  std::cout << "  grid spacing [m]      = "
            << fmt(cfg.area_side_m /
                   std::sqrt(static_cast<double>(cfg.ap_count)))
            << "\n";
  return 0;
}

int cmd_export_plotdata(const std::string& results_dir,
                        const std::string& out_dir) {
  try {
    const fs::path dir(results_dir);
    const fs::path manifest_path = dir / "manifest.json";
    if (!fs::exists(manifest_path)) {
      throw MissingManifest("no manifest.json in '" + results_dir + "'");
    }
    std::ifstream min(manifest_path);
    json manifest = json::parse(min);

    const fs::path out =
        out_dir.empty() ? (dir / "plotdata") : fs::path(out_dir);
    fs::create_directories(out);

    // sorted-BER curve per (scheme, dac_bits), recomputed from per-setup rows
    std::ifstream ber_in(dir / "ber_per_ue.csv");
    if (!ber_in) throw IoError("missing ber_per_ue.csv");
    std::string line;
    std::getline(ber_in, line);  // header
    struct Key {
      std::string scheme;
      int bits;
      bool operator<(const Key& o) const {
        return std::tie(scheme, bits) < std::tie(o.scheme, o.bits);
      }
    };
    std::map<Key, std::map<int, std::pair<double, int>>> acc;
    while (std::getline(ber_in, line)) {
      if (line.empty()) continue;
      const auto f = split_csv_line(line);
      if (f.size() != 5) throw IoError("malformed ber_per_ue.csv row");
      const Key key{f[1], std::stoi(f[2])};
      auto& cell = acc[key][std::stoi(f[3])];
      cell.first += std::stod(f[4]);
      cell.second += 1;
    }
    for (const auto& [key, ranks] : acc) {
      std::ostringstream csv;
      csv << "ue_rank,mean_ber\n";
      for (const auto& [rank, cell] : ranks) {
        csv << rank << ',' << fmt(cell.first / cell.second) << '\n';
      }
      write_file(out / ("curve_" + key.scheme + "_p" +
                        std::to_string(key.bits) + ".csv"),
                 csv.str());
    }

    // per-setup power maps
    std::ifstream pm_in(dir / "power_map.csv");
    if (pm_in) {
      std::getline(pm_in, line);  // header
      std::map<int, std::ostringstream> maps;
      while (std::getline(pm_in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 5) throw IoError("malformed power_map.csv row");
        const int setup = std::stoi(f[0]);
        auto [it, inserted] = maps.try_emplace(setup);
        if (inserted) it->second << "ap_index,ap_x,ap_y,p_l_over_P_ant\n";
        it->second << f[1] << ',' << f[2] << ',' << f[3] << ',' << f[4] << '\n';
      }
      for (auto& [setup, body] : maps) {
        write_file(out / ("power_map_setup" + std::to_string(setup) + ".csv"),
                   body.str());
      }
    }
    return 0;
  } catch (const MissingManifest& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace cepc
