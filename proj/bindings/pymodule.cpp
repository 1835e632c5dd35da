#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cepc/channel.hpp"
#include "cepc/errors.hpp"
#include "cepc/link_eval.hpp"
#include "cepc/power_control.hpp"
#include "cepc/precoder.hpp"
#include "cepc/runner.hpp"
#include "cepc/scenario.hpp"
#include "cepc/version.hpp"
#include "cepc/waveform.hpp"

namespace py = pybind11;
using cxd = std::complex<double>;

namespace {

using CArray = py::array_t<cxd, py::array::c_style | py::array::forcecast>;
using DArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

arma::cx_mat to_cx_mat(const CArray& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D complex array");
  arma::cx_mat m(a.shape(0), a.shape(1));
  auto r = a.unchecked<2>();
  for (py::ssize_t i = 0; i < a.shape(0); ++i) {
    for (py::ssize_t j = 0; j < a.shape(1); ++j) m(i, j) = r(i, j);
  }
  return m;
}

arma::cx_vec to_cx_vec(const CArray& a) {
  if (a.ndim() != 1) throw py::value_error("expected a 1-D complex array");
  arma::cx_vec v(a.shape(0));
  auto r = a.unchecked<1>();
  for (py::ssize_t i = 0; i < a.shape(0); ++i) v[i] = r(i);
  return v;
}

py::array_t<cxd> from_cx_mat(const arma::cx_mat& m) {
  py::array_t<cxd> out({static_cast<py::ssize_t>(m.n_rows),
                        static_cast<py::ssize_t>(m.n_cols)});
  auto w = out.mutable_unchecked<2>();
  for (arma::uword i = 0; i < m.n_rows; ++i) {
    for (arma::uword j = 0; j < m.n_cols; ++j) w(i, j) = m(i, j);
  }
  return out;
}

py::array_t<cxd> from_cx_vec(const arma::cx_vec& v) {
  py::array_t<cxd> out(static_cast<py::ssize_t>(v.n_elem));
  auto w = out.mutable_unchecked<1>();
  for (arma::uword i = 0; i < v.n_elem; ++i) w(i) = v[i];
  return out;
}

py::array_t<double> from_vec(const arma::vec& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.n_elem));
  auto w = out.mutable_unchecked<1>();
  for (arma::uword i = 0; i < v.n_elem; ++i) w(i) = v[i];
  return out;
}

py::array_t<double> from_mat(const arma::mat& m) {
  py::array_t<double> out({static_cast<py::ssize_t>(m.n_rows),
                           static_cast<py::ssize_t>(m.n_cols)});
  auto w = out.mutable_unchecked<2>();
  for (arma::uword i = 0; i < m.n_rows; ++i) {
    for (arma::uword j = 0; j < m.n_cols; ++j) w(i, j) = m(i, j);
  }
  return out;
}

/// Channel given as an (S, K, M) complex array.
cepc::FreqChannel to_channel(const CArray& a) {
  if (a.ndim() != 3) throw py::value_error("expected an (S, K, M) array");
  cepc::FreqChannel chan(a.shape(0));
  auto r = a.unchecked<3>();
  for (py::ssize_t nu = 0; nu < a.shape(0); ++nu) {
    arma::cx_mat H(a.shape(1), a.shape(2));
    for (py::ssize_t k = 0; k < a.shape(1); ++k) {
      for (py::ssize_t m = 0; m < a.shape(2); ++m) H(k, m) = r(nu, k, m);
    }
    chan[nu] = std::move(H);
  }
  return chan;
}

cepc::SymbolGrid grid_from_symbols(const CArray& s,
                                   const std::vector<int>& occupied) {
  cepc::SymbolGrid grid;
  grid.s = to_cx_mat(s);
  grid.occupied = occupied;
  grid.bits.zeros(grid.s.n_rows, 2 * occupied.size());
  return grid;
}

py::dict precode_to_dict(const cepc::PrecodeResult& res) {
  py::dict d;
  d["B"] = from_cx_mat(res.B);
  d["X"] = from_cx_mat(res.X);
  d["Xf"] = from_cx_mat(res.Xf);
  d["rho"] = from_vec(res.power.rho);
  d["beta"] = res.power.beta;
  d["objective_trace"] = res.objective_trace;
  d["solver_converged"] = res.solver_converged;
  d["fell_back"] = res.fell_back;
  return d;
}

}  // namespace

PYBIND11_MODULE(_cepc, m) {
  m.doc() = "Constant-envelope quantized precoding with per-AP power control "
            "for the cell-free massive MIMO-OFDM downlink";
  m.attr("__version__") = cepc::kVersion;

  py::register_exception<cepc::ConfigError>(m, "ConfigError");

  py::class_<cepc::SolverParams>(m, "SolverParams")
      .def(py::init<>())
      .def_readwrite("max_iters", &cepc::SolverParams::max_iters)
      .def_readwrite("step_size", &cepc::SolverParams::step_size)
      .def_readwrite("tol", &cepc::SolverParams::tol)
      .def_readwrite("over_relaxation", &cepc::SolverParams::over_relaxation);

  py::class_<cepc::SystemConfig>(m, "SystemConfig")
      .def(py::init<>())
      .def_readwrite("ap_count", &cepc::SystemConfig::ap_count)
      .def_readwrite("antennas_per_ap", &cepc::SystemConfig::antennas_per_ap)
      .def_readwrite("ue_count", &cepc::SystemConfig::ue_count)
      .def_readwrite("dft_size", &cepc::SystemConfig::dft_size)
      .def_readwrite("occupied", &cepc::SystemConfig::occupied)
      .def_readwrite("delta_f_hz", &cepc::SystemConfig::delta_f_hz)
      .def_readwrite("channel_memory", &cepc::SystemConfig::channel_memory)
      .def_readwrite("dac_bits", &cepc::SystemConfig::dac_bits)
      .def_readwrite("p_ant_watts", &cepc::SystemConfig::p_ant_watts)
      .def_readwrite("noise_figure_db", &cepc::SystemConfig::noise_figure_db)
      .def_readwrite("area_side_m", &cepc::SystemConfig::area_side_m)
      .def_readwrite("ap_ue_height_m", &cepc::SystemConfig::ap_ue_height_m)
      .def_readwrite("shadow_std_db", &cepc::SystemConfig::shadow_std_db)
      .def_readwrite("asd_deg", &cepc::SystemConfig::asd_deg)
      .def_readwrite("n_setups", &cepc::SystemConfig::n_setups)
      .def_readwrite("ofdm_symbols_per_setup",
                     &cepc::SystemConfig::ofdm_symbols_per_setup)
      .def_readwrite("outer_iters", &cepc::SystemConfig::outer_iters)
      .def_readwrite("solver", &cepc::SystemConfig::solver)
      .def_readwrite("master_seed", &cepc::SystemConfig::master_seed)
      .def_readwrite("freeze_rho", &cepc::SystemConfig::freeze_rho)
      .def("validate", &cepc::SystemConfig::validate)
      .def("violations", &cepc::SystemConfig::violations);

  m.def("load_config", &cepc::load_config, py::arg("path"));
  m.def("parse_config", &cepc::parse_config, py::arg("json_text"));
  m.def("config_to_json", &cepc::config_to_json, py::arg("config"));
  m.def("derive_noise_power", &cepc::derive_noise_power, py::arg("config"));
  m.def("derive_gamma", &cepc::derive_gamma, py::arg("config"),
        py::arg("sigma2"), py::arg("p_ant"));

  m.def(
      "build_geometry",
      [](const cepc::SystemConfig& cfg, std::uint64_t setup_index) {
        cepc::RngStream rng(cfg.master_seed, setup_index, "geometry");
        const cepc::SetupGeometry geom = cepc::build_geometry(cfg, rng);
        py::dict d;
        d["ap_xy"] = from_mat(geom.ap_xy);
        d["ue_xy"] = from_mat(geom.ue_xy);
        d["height_m"] = geom.height_m;
        return d;
      },
      py::arg("config"), py::arg("setup_index") = 0);

  m.def(
      "ce_alphabet",
      [](int bits, double amplitude) {
        return from_cx_vec(cepc::CEAlphabet::make(bits, amplitude).points);
      },
      py::arg("bits"), py::arg("amplitude") = 1.0);

  m.def(
      "quantize_ce",
      [](cxd value, int bits, double amplitude) {
        return cepc::quantize_ce(value, cepc::CEAlphabet::make(bits, amplitude));
      },
      py::arg("value"), py::arg("bits"), py::arg("amplitude") = 1.0);

  m.def(
      "quantize_ce_array",
      [](const CArray& values, int bits, double amplitude) {
        return from_cx_mat(cepc::quantize_ce(
            to_cx_mat(values), cepc::CEAlphabet::make(bits, amplitude)));
      },
      py::arg("values"), py::arg("bits"), py::arg("amplitude") = 1.0);

  m.def("dft_rows",
        [](const CArray& time) { return from_cx_mat(cepc::dft_rows(to_cx_mat(time))); });
  m.def("idft_rows",
        [](const CArray& freq) { return from_cx_mat(cepc::idft_rows(to_cx_mat(freq))); });

  m.def(
      "prox_sq_inf",
      [](const CArray& v, double weight) {
        return from_cx_vec(cepc::prox_sq_inf(to_cx_vec(v), weight));
      },
      py::arg("v"), py::arg("weight"));

  m.def("qpsk_map", &cepc::qpsk_map, py::arg("b0"), py::arg("b1"));
  m.def("demap_qpsk", &cepc::demap_qpsk, py::arg("soft"));

  m.def(
      "relaxed_objective",
      [](const CArray& B, const CArray& channel, const CArray& symbols,
         const std::vector<int>& occupied, double gamma) {
        return cepc::relaxed_objective(to_cx_mat(B), to_channel(channel),
                                       grid_from_symbols(symbols, occupied),
                                       gamma);
      },
      py::arg("B"), py::arg("channel"), py::arg("symbols"),
      py::arg("occupied"), py::arg("gamma"));

  m.def(
      "solve_relaxed",
      [](const CArray& channel, const CArray& symbols,
         const std::vector<int>& occupied, double gamma,
         const cepc::SolverParams& params) {
        const cepc::RelaxedPrecoder sol =
            cepc::solve_relaxed(to_channel(channel),
                                grid_from_symbols(symbols, occupied), gamma,
                                params);
        py::dict d;
        d["B"] = from_cx_mat(sol.B);
        d["objective_trace"] = sol.objective_trace;
        d["converged"] = sol.converged;
        d["iterations"] = sol.iterations;
        return d;
      },
      py::arg("channel"), py::arg("symbols"), py::arg("occupied"),
      py::arg("gamma"), py::arg("params") = cepc::SolverParams{});

  m.def(
      "update_beta",
      [](const CArray& u, const CArray& symbols,
         const std::vector<int>& occupied, double sigma2) {
        const arma::cx_mat U = to_cx_mat(u);
        if (static_cast<std::size_t>(U.n_cols) != occupied.size()) {
          throw py::value_error("u must have one column per occupied index");
        }
        std::vector<arma::cx_vec> cols;
        for (arma::uword c = 0; c < U.n_cols; ++c) cols.push_back(U.col(c));
        return cepc::update_beta(cols, grid_from_symbols(symbols, occupied),
                                 sigma2);
      },
      py::arg("u"), py::arg("symbols"), py::arg("occupied"),
      py::arg("sigma2"));

  m.def(
      "classical_precode",
      [](const CArray& channel, const CArray& symbols,
         const std::vector<int>& occupied, const cepc::SystemConfig& cfg,
         double sigma2) {
        return precode_to_dict(cepc::classical_precode(
            to_channel(channel), grid_from_symbols(symbols, occupied), cfg,
            sigma2));
      },
      py::arg("channel"), py::arg("symbols"), py::arg("occupied"),
      py::arg("config"), py::arg("sigma2") = 1.0);

  m.def(
      "alternating_precode",
      [](const CArray& channel, const CArray& symbols,
         const std::vector<int>& occupied, const cepc::SystemConfig& cfg,
         double sigma2) {
        cepc::AlternatingOptions opt;
        opt.sigma2 = sigma2;
        return precode_to_dict(cepc::alternating_precode(
            to_channel(channel), grid_from_symbols(symbols, occupied), cfg,
            opt));
      },
      py::arg("channel"), py::arg("symbols"), py::arg("occupied"),
      py::arg("config"), py::arg("sigma2") = 1.0);

  m.def(
      "build_setup_channel",
      [](const cepc::SystemConfig& cfg, int setup_id) {
        const cepc::FreqChannel chan = cepc::build_setup_channel(cfg, setup_id);
        py::array_t<cxd> out({static_cast<py::ssize_t>(chan.size()),
                              static_cast<py::ssize_t>(chan[0].n_rows),
                              static_cast<py::ssize_t>(chan[0].n_cols)});
        auto w = out.mutable_unchecked<3>();
        for (std::size_t nu = 0; nu < chan.size(); ++nu) {
          for (arma::uword k = 0; k < chan[nu].n_rows; ++k) {
            for (arma::uword mm = 0; mm < chan[nu].n_cols; ++mm) {
              w(nu, k, mm) = chan[nu](k, mm);
            }
          }
        }
        return out;
      },
      py::arg("config"), py::arg("setup_id") = 0);

  m.def(
      "evaluate_setup",
      [](const CArray& channel, const cepc::SystemConfig& cfg,
         const std::string& scheme, int dac_bits, int setup_id) {
        const cepc::SetupEval eval = cepc::evaluate_setup(
            to_channel(channel), cfg, cepc::scheme_from_name(scheme), dac_bits,
            setup_id);
        py::dict d;
        d["errors"] = from_vec(arma::conv_to<arma::vec>::from(eval.report.errors));
        d["bits"] = from_vec(arma::conv_to<arma::vec>::from(eval.report.bits));
        d["ber"] = from_vec(eval.report.ber);
        d["power_frac"] = from_vec(eval.power_frac);
        return d;
      },
      py::arg("channel"), py::arg("config"), py::arg("scheme"),
      py::arg("dac_bits"), py::arg("setup_id") = 0);

  m.def(
      "run_experiment",
      [](const std::string& config_path, const std::string& out_dir,
         const std::vector<std::string>& schemes,
         const std::vector<int>& dac_bits, int jobs) {
        cepc::RunOptions opts;
        opts.config_path = config_path;
        opts.out_dir = out_dir;
        opts.schemes = schemes;
        opts.dac_bits = dac_bits;
        opts.jobs = jobs;
        return cepc::cmd_run(opts);
      },
      py::arg("config_path"), py::arg("out_dir"),
      py::arg("schemes") = std::vector<std::string>{},
      py::arg("dac_bits") = std::vector<int>{}, py::arg("jobs") = 0);
}
