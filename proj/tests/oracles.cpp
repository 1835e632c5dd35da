#include "oracles.hpp"

#include <cmath>
#include <numbers>

namespace cepc::oracle {

arma::cx_vec naive_dft(const arma::cx_vec& time) {
  const arma::uword S = time.n_elem;
  arma::cx_vec out(S, arma::fill::zeros);
  const double scale = 1.0 / std::sqrt(static_cast<double>(S));
  for (arma::uword nu = 0; nu < S; ++nu) {
    std::complex<double> acc = 0.0;
    for (arma::uword n = 0; n < S; ++n) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(n) *
                           static_cast<double>(nu) / static_cast<double>(S);
      acc += time[n] * std::polar(1.0, angle);
    }
    out[nu] = scale * acc;
  }
  return out;
}

arma::cx_vec prox_sq_inf_search(const arma::cx_vec& v, double weight) {
  const arma::vec a = arma::abs(v);
  auto clipped = [&](double t) {
    arma::cx_vec u(v.n_elem);
    for (arma::uword i = 0; i < v.n_elem; ++i) {
      u[i] = (a[i] > t && a[i] > 0.0) ? v[i] * (t / a[i]) : v[i];
    }
    return u;
  };
  auto objective = [&](double t) {
    const arma::cx_vec u = clipped(t);
    double inf = 0.0;
    for (const auto& z : u) inf = std::max(inf, std::abs(z));
    return 0.5 * arma::accu(arma::square(arma::abs(u - v))) + weight * inf * inf;
  };
  double lo = 0.0, hi = a.is_empty() ? 0.0 : a.max();
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (objective(m1) <= objective(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  return clipped((lo + hi) / 2.0);
}

namespace {

double data_fit(const FreqChannel& channel, const SymbolGrid& grid,
                const arma::cx_mat& B) {
  double fit = 0.0;
  for (int nu : grid.occupied) {
    fit += arma::accu(
        arma::square(arma::abs(grid.s.col(nu) - channel[nu] * B.col(nu))));
  }
  return fit;
}

/// Projected FISTA for min data_fit subject to max |time entry| <= cap.
double constrained_fit(const FreqChannel& channel, const SymbolGrid& grid,
                       double cap, double lipschitz, int iters,
                       arma::cx_mat& x_time) {
  auto project = [&](arma::cx_mat& m) {
    for (auto& z : m) {
      const double mag = std::abs(z);
      if (mag > cap) z *= cap / mag;
    }
  };
  auto gradient = [&](const arma::cx_mat& xt) {
    const arma::cx_mat B = dft_rows(xt);
    arma::cx_mat G(B.n_rows, B.n_cols, arma::fill::zeros);
    for (int nu : grid.occupied) {
      G.col(nu) =
          2.0 * (channel[nu].t() * (channel[nu] * B.col(nu) - grid.s.col(nu)));
    }
    return idft_rows(G);
  };
  project(x_time);
  arma::cx_mat x_prev = x_time;
  arma::cx_mat y = x_time;
  double momentum = 1.0;
  const double step = 1.0 / lipschitz;
  for (int k = 0; k < iters; ++k) {
    arma::cx_mat x = y - step * gradient(y);
    project(x);
    const double m_next = (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum)) / 2.0;
    y = x + ((momentum - 1.0) / m_next) * (x - x_prev);
    momentum = m_next;
    x_prev = std::move(x);
  }
  x_time = x_prev;
  return data_fit(channel, grid, dft_rows(x_time));
}

}  // namespace

double relaxed_objective_oracle(const FreqChannel& channel,
                                const SymbolGrid& grid, double gamma,
                                int fista_iters, int golden_iters) {
  double lipschitz = 0.0;
  double s_energy = 0.0;
  for (int nu : grid.occupied) {
    const double op = arma::norm(arma::cx_mat(channel[nu]), 2);
    lipschitz = std::max(lipschitz, 2.0 * op * op);
    s_energy += arma::accu(arma::square(arma::abs(grid.s.col(nu))));
  }
  if (lipschitz <= 0.0) lipschitz = 1.0;
  const int M = static_cast<int>(channel[grid.occupied.front()].n_cols);
  const int S = grid.dft_size();

  arma::cx_mat warm(M, S, arma::fill::zeros);
  auto total = [&](double cap) {
    const double fit =
        constrained_fit(channel, grid, cap, lipschitz, fista_iters, warm);
    return fit + gamma * cap * cap;
  };

  // F(cap) is convex; golden-section search over the cap.
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0;
  double hi = std::sqrt(s_energy / gamma) + 1e-12;
  double x1 = hi - golden * (hi - lo);
  double x2 = lo + golden * (hi - lo);
  double f1 = total(x1);
  double f2 = total(x2);
  double best = std::min(f1, f2);
  for (int it = 0; it < golden_iters; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - golden * (hi - lo);
      f1 = total(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + golden * (hi - lo);
      f2 = total(x2);
    }
    best = std::min({best, f1, f2});
  }
  // final polish at the midpoint with a longer inner run
  const double mid = (lo + hi) / 2.0;
  const double fit =
      constrained_fit(channel, grid, mid, lipschitz, 4 * fista_iters, warm);
  best = std::min(best, fit + gamma * mid * mid);
  return best;
}

namespace {

double beta_distortion(const std::vector<arma::cx_vec>& u,
                       const SymbolGrid& grid, double sigma2, double beta) {
  double fit = 0.0;
  for (int i = 0; i < grid.occupied_count(); ++i) {
    fit += arma::accu(arma::square(
        arma::abs(grid.s.col(grid.occupied[i]) - beta * u[i])));
  }
  return fit + sigma2 * grid.occupied_count() * grid.ue_count() * beta * beta;
}

}  // namespace

double beta_grid_search(const std::vector<arma::cx_vec>& u_occupied,
                        const SymbolGrid& grid, double sigma2, double hi,
                        double step) {
  auto J = [&](double b) { return beta_distortion(u_occupied, grid, sigma2, b); };
  const int coarse_n = 1000;
  const double coarse_step = hi / coarse_n;
  double best_b = 0.0, best_v = J(0.0);
  for (int i = 1; i <= coarse_n; ++i) {
    const double b = i * coarse_step;
    const double v = J(b);
    if (v < best_v) {
      best_v = v;
      best_b = b;
    }
  }
  const double lo2 = std::max(0.0, best_b - 2.0 * coarse_step);
  const double hi2 = std::min(hi, best_b + 2.0 * coarse_step);
  for (double b = lo2; b <= hi2 + step / 2.0; b += step) {
    const double v = J(b);
    if (v < best_v) {
      best_v = v;
      best_b = b;
    }
  }
  return best_b;
}

double distortion_from_contributions(const std::vector<arma::cx_mat>& contribs,
                                     const arma::vec& rho, double beta,
                                     const SymbolGrid& grid, double sigma2) {
  double fit = 0.0;
  for (int i = 0; i < grid.occupied_count(); ++i) {
    const arma::cx_vec r = contribs[i] * rho;
    fit += arma::accu(arma::square(
        arma::abs(grid.s.col(grid.occupied[i]) - beta * r)));
  }
  return fit + sigma2 * grid.occupied_count() * grid.ue_count() * beta * beta;
}

double rho_grid_search(int l, const std::vector<arma::cx_mat>& contributions,
                       const arma::vec& rho, double beta,
                       const SymbolGrid& grid, double sigma2, double p_ant,
                       double step) {
  arma::vec candidate = rho;
  auto J = [&](double r) {
    candidate[l] = r;
    return distortion_from_contributions(contributions, candidate, beta, grid,
                                         sigma2);
  };
  const double hi = std::sqrt(p_ant);
  const int coarse_n = 1000;
  const double coarse_step = hi / coarse_n;
  double best_r = 0.0, best_v = J(0.0);
  for (int i = 1; i <= coarse_n; ++i) {
    const double r = i * coarse_step;
    const double v = J(r);
    if (v < best_v) {
      best_v = v;
      best_r = r;
    }
  }
  const double lo2 = std::max(0.0, best_r - 2.0 * coarse_step);
  const double hi2 = std::min(hi, best_r + 2.0 * coarse_step);
  for (double r = lo2; r <= hi2 + step / 2.0; r += step) {
    const double v = J(r);
    if (v < best_v) {
      best_v = v;
      best_r = r;
    }
  }
  return best_r;
}

arma::cx_mat cp_convolution_receive(const std::vector<arma::cx_mat>& taps,
                                    const arma::cx_mat& x_time, int cp_len) {
  const int S = static_cast<int>(x_time.n_cols);
  const int K = static_cast<int>(taps[0].n_rows);
  arma::cx_mat x_cp(x_time.n_rows, S + cp_len);
  if (cp_len > 0) {
    x_cp.cols(0, cp_len - 1) = x_time.cols(S - cp_len, S - 1);
  }
  x_cp.cols(cp_len, cp_len + S - 1) = x_time;

  arma::cx_mat y(K, S + cp_len, arma::fill::zeros);
  for (int n = 0; n < S + cp_len; ++n) {
    for (std::size_t t = 0; t < taps.size(); ++t) {
      const int m = n - static_cast<int>(t);
      if (m < 0) continue;
      y.col(n) += taps[t] * x_cp.col(m);
    }
  }
  return dft_rows(arma::cx_mat(y.cols(cp_len, cp_len + S - 1)));
}

arma::cx_mat mc_ula_correlation(double bearing_rad, double sigma_phi_rad,
                                int antennas, double beta, int draws,
                                RngStream& rng) {
  arma::cx_vec lags(antennas, arma::fill::zeros);
  for (int d = 0; d < draws; ++d) {
    const double phi = bearing_rad + sigma_phi_rad * rng.normal();
    const double s = std::sin(phi);
    for (int m = 0; m < antennas; ++m) {
      lags[m] += std::polar(1.0, std::numbers::pi * m * s);
    }
  }
  lags /= static_cast<double>(draws);
  arma::cx_mat R(antennas, antennas);
  for (int m = 0; m < antennas; ++m) {
    for (int n = 0; n < antennas; ++n) {
      R(m, n) = (m >= n) ? lags[m - n] : std::conj(lags[n - m]);
    }
  }
  return beta * R;
}

FreqChannel random_channel(int ue_count, int total_antennas, int dft_size,
                           RngStream& rng) {
  FreqChannel chan(dft_size);
  for (auto& H : chan) {
    H.set_size(ue_count, total_antennas);
    for (auto& z : H) z = rng.cnormal();
  }
  return chan;
}

SymbolGrid random_grid(int ue_count, const std::vector<int>& occupied,
                       int dft_size, RngStream& rng) {
  return build_symbol_grid(ue_count, occupied, dft_size, rng);
}

}  // namespace cepc::oracle
