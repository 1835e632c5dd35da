#include "cepc/precoder.hpp"

#include <cmath>
#include <limits>

#include "cepc/errors.hpp"

namespace cepc {

namespace {

void check_dims(const arma::cx_mat& B_freq, const FreqChannel& channel,
                const SymbolGrid& grid) {
  const int S = grid.dft_size();
  if (static_cast<int>(channel.size()) != S) {
    throw DimensionMismatch("channel has " + std::to_string(channel.size()) +
                            " subcarriers, grid has " + std::to_string(S));
  }
  if (static_cast<int>(B_freq.n_cols) != S) {
    throw DimensionMismatch("precoder column count does not match grid");
  }
  for (int nu : grid.occupied) {
    if (static_cast<int>(channel[nu].n_cols) != static_cast<int>(B_freq.n_rows) ||
        static_cast<int>(channel[nu].n_rows) != grid.ue_count()) {
      throw DimensionMismatch("channel matrix shape mismatch at subcarrier " +
                              std::to_string(nu));
    }
  }
}

double max_abs_sq(const arma::cx_mat& m) {
  double best = 0.0;
  for (const auto& z : m) best = std::max(best, std::norm(z));
  return best;
}

using cxd = std::complex<double>;

// y = A x for a column-major rows x cols matrix, all raw pointers.
inline void gemv(const cxd* A, int rows, int cols, const cxd* x, cxd* y) {
  for (int r = 0; r < rows; ++r) y[r] = 0.0;
  for (int c = 0; c < cols; ++c) {
    const cxd xc = x[c];
    const cxd* col = A + static_cast<std::size_t>(c) * rows;
    for (int r = 0; r < rows; ++r) y[r] += col[r] * xc;
  }
}

// ||s - A x||^2 for a column-major K x M matrix.
inline double residual_norm_sq(const cxd* A, int K, int M, const cxd* x,
                               const cxd* s) {
  double acc = 0.0;
  for (int k = 0; k < K; ++k) {
    cxd r = s[k];
    const cxd* row = A + k;
    for (int m = 0; m < M; ++m) r -= row[static_cast<std::size_t>(m) * K] * x[m];
    acc += std::norm(r);
  }
  return acc;
}

}  // namespace

double relaxed_objective(const arma::cx_mat& B_freq, const FreqChannel& channel,
                         const SymbolGrid& grid, double gamma) {
  check_dims(B_freq, channel, grid);
  double fit = 0.0;
  for (int nu : grid.occupied) {
    fit += arma::accu(arma::square(
        arma::abs(grid.s.col(nu) - channel[nu] * B_freq.col(nu))));
  }
  const arma::cx_mat time = idft_rows(B_freq);
  return fit + gamma * max_abs_sq(time);
}

namespace {

/// Shared magnitude-threshold core of the squared-infinity-norm prox:
/// returns the cap t and leaves |v| in work_abs, sorted copy in work_sorted.
double prox_sq_inf_threshold(const cxd* v, std::size_t n, double weight,
                             arma::vec& work_abs, arma::vec& work_sorted) {
  work_abs.set_size(n);
  for (std::size_t i = 0; i < n; ++i) work_abs[i] = std::abs(v[i]);
  work_sorted = arma::sort(work_abs, "descend");
  double cumsum = 0.0;
  double t = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    cumsum += work_sorted[k - 1];
    t = cumsum / (2.0 * weight + static_cast<double>(k));
    if (k == n || t >= work_sorted[k]) break;
  }
  return t;
}

}  // namespace

arma::cx_vec prox_sq_inf(const arma::cx_vec& v, double weight) {
  if (weight <= 0.0) return v;
  const std::size_t n = v.n_elem;
  if (n == 0) return v;
  arma::vec work_abs, work_sorted;
  const double t =
      prox_sq_inf_threshold(v.memptr(), n, weight, work_abs, work_sorted);
  arma::cx_vec out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = (work_abs[i] > t) ? v[i] * (t / work_abs[i]) : v[i];
  }
  return out;
}

RelaxedPrecoder solve_relaxed(const FreqChannel& channel, const SymbolGrid& grid,
                              double gamma, const SolverParams& params,
                              const arma::cx_mat* warm_start) {
  if (gamma < 0.0) throw Error("gamma must be nonnegative");
  const int S = grid.dft_size();
  const int K = grid.ue_count();
  if (channel.empty() || grid.occupied.empty()) {
    throw DimensionMismatch("empty channel or occupied set");
  }
  const int M = static_cast<int>(channel[grid.occupied.front()].n_cols);
  const int s_occ = grid.occupied_count();

  // Exact change of variables U = c * B with c the RMS channel entry keeps
  // the iteration well scaled; objective values are unchanged.
  double energy = 0.0;
  for (int nu : grid.occupied) {
    energy += arma::accu(arma::square(arma::abs(channel[nu])));
  }
  double c = std::sqrt(energy / (static_cast<double>(s_occ) * K * M));
  if (!(c > 0.0)) c = 1.0;
  const double gamma_s = gamma / (c * c);
  const double tau = params.step_size;

  // prox of tau * ||s - H' u||^2: (I + 2 tau H'^H H') u = v + 2 tau H'^H s,
  // reduced through the K x K Gram system when K < M:
  //   u = v~ - H'^H G^{-1} H' v~,  G = H' H'^H + I / (2 tau).
  // Folded into  u = v - P1 (W1 v) + c0  with precomputed P1, W1, c0.
  struct SubcarrierSolve {
    int nu;
    arma::cx_mat Hs;  // K x M scaled channel
    arma::cx_mat P1;  // M x K
    arma::cx_mat W1;  // K x M
    arma::cx_vec c0;  // M
    arma::cx_mat inv_primal;  // M x M direct inverse when K >= M
    bool dual = false;
  };
  std::vector<SubcarrierSolve> solves;
  solves.reserve(s_occ);
  for (int nu : grid.occupied) {
    SubcarrierSolve sc;
    sc.nu = nu;
    sc.Hs = channel[nu] / c;
    const arma::cx_vec rhs = 2.0 * tau * (sc.Hs.t() * grid.s.col(nu));
    sc.dual = K < M;
    if (sc.dual) {
      const arma::cx_mat G =
          sc.Hs * sc.Hs.t() + (1.0 / (2.0 * tau)) * arma::eye<arma::cx_mat>(K, K);
      arma::cx_mat Ginv;
      if (!arma::inv_sympd(Ginv, G)) {
        throw FactorizationFailure("prox system inversion failed");
      }
      sc.P1 = sc.Hs.t();
      sc.W1 = Ginv * sc.Hs;
      sc.c0 = rhs - sc.P1 * (sc.W1 * rhs);
    } else {
      const arma::cx_mat A =
          arma::eye<arma::cx_mat>(M, M) + 2.0 * tau * sc.Hs.t() * sc.Hs;
      if (!arma::inv_sympd(sc.inv_primal, A)) {
        throw FactorizationFailure("prox system inversion failed");
      }
      sc.c0 = sc.inv_primal * rhs;
    }
    solves.push_back(std::move(sc));
  }

  std::vector<cxd> work_k(K), work_m(M);
  auto prox_data = [&](const arma::cx_mat& Z, arma::cx_mat& X) {
    X = Z;  // guard columns pass through unchanged
    for (const auto& sc : solves) {
      const cxd* v = Z.colptr(sc.nu);
      cxd* x = X.colptr(sc.nu);
      if (sc.dual) {
        gemv(sc.W1.memptr(), K, M, v, work_k.data());
        gemv(sc.P1.memptr(), M, K, work_k.data(), work_m.data());
        const cxd* c0 = sc.c0.memptr();
        for (int m = 0; m < M; ++m) x[m] = v[m] - work_m[m] + c0[m];
      } else {
        gemv(sc.inv_primal.memptr(), M, M, v, work_m.data());
        const cxd* c0 = sc.c0.memptr();
        for (int m = 0; m < M; ++m) x[m] = work_m[m] + c0[m];
      }
    }
  };

  arma::cx_mat obj_buf;
  auto objective_scaled = [&](const arma::cx_mat& U) {
    double fit = 0.0;
    for (const auto& sc : solves) {
      fit += residual_norm_sq(sc.Hs.memptr(), K, M, U.colptr(sc.nu),
                              grid.s.colptr(sc.nu));
    }
    idft_rows_into(U, obj_buf);
    return fit + gamma_s * max_abs_sq(obj_buf);
  };

  arma::cx_mat Z(M, S, arma::fill::zeros);
  if (warm_start != nullptr) {
    if (static_cast<int>(warm_start->n_rows) != M ||
        static_cast<int>(warm_start->n_cols) != S) {
      throw DimensionMismatch("warm start shape mismatch");
    }
    Z = c * (*warm_start);
  }

  RelaxedPrecoder result;
  arma::cx_mat best;
  double best_obj = std::numeric_limits<double>::infinity();
  double prev_obj = std::numeric_limits<double>::infinity();
  result.converged = false;

  const double shrink_weight = tau * gamma_s;
  arma::cx_mat X1(M, S), R(M, S), time(M, S), X2(M, S);
  arma::vec work_abs, work_sorted;
  const std::size_t n_total = static_cast<std::size_t>(M) * S;
  const double lambda = params.over_relaxation;

  for (int iter = 0; iter < params.max_iters; ++iter) {
    prox_data(Z, X1);
    // reflected point, then the time-domain squared-infinity-norm prox
    R = 2.0 * X1 - Z;
    idft_rows_into(R, time);
    if (shrink_weight > 0.0) {
      cxd* t = time.memptr();
      const double cap =
          prox_sq_inf_threshold(t, n_total, shrink_weight, work_abs, work_sorted);
      for (std::size_t i = 0; i < n_total; ++i) {
        if (work_abs[i] > cap) t[i] *= cap / work_abs[i];
      }
    }
    dft_rows_into(time, X2);
    Z += lambda * (X2 - X1);

    const double obj = objective_scaled(X1);
    if (obj < best_obj) {
      best_obj = obj;
      best = X1;
    }
    result.objective_trace.push_back(best_obj);
    result.iterations = iter + 1;
    if (iter > 0 &&
        std::abs(obj - prev_obj) <= params.tol * (1.0 + std::abs(obj))) {
      result.converged = true;
      break;
    }
    prev_obj = obj;
  }

  result.B = best / c;
  return result;
}

}  // namespace cepc
