#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "locsk/enumerate.hpp"
#include "locsk/errors.hpp"
#include "locsk/kernel.hpp"
#include "locsk/model.hpp"
#include "locsk/quadrature.hpp"
#include "locsk/rng.hpp"

namespace locsk {

// Sampled path on a time grid 0 = t_0 < ... < t_L = 1.
//   B[l][p]: Brownian coupling of pair p at t_l, B[0] = 0.
//   X[l][i]: reversed-time Brownian field of site i at t_l, X[0] = eta,
//            X[L] = 0.
struct PathState {
  LatticeBox box;
  std::vector<double> t_grid;
  std::vector<std::vector<double>> B;
  std::vector<std::vector<double>> X;
  std::vector<double> eta;
};

inline std::vector<double> uniform_grid(std::size_t points) {
  if (points < 2) throw InvalidGrid("time grid needs at least two points");
  std::vector<double> t(points);
  for (std::size_t l = 0; l < points; ++l) t[l] = static_cast<double>(l) / static_cast<double>(points - 1);
  t.back() = 1.0;
  return t;
}

inline void validate_grid(std::span<const double> t) {
  if (t.size() < 2) throw InvalidGrid("time grid needs at least two points");
  if (t.front() != 0.0 || t.back() != 1.0) throw InvalidGrid("time grid must start at 0 and end at 1");
  for (std::size_t l = 1; l < t.size(); ++l)
    if (!(t[l] > t[l - 1])) throw InvalidGrid("time grid must be strictly increasing");
}

// Seed mapping:
//   B(1)   = sample_disorder(box, seed).g   (identical to the direct disorder)
//   B(t_l) for 0 < t_l < 1: Brownian bridge from 0 to B(1), drawn time-major
//          from Rng(derive_seed(seed, "bridge"))
//   eta    from Rng(derive_seed(seed, "eta")), one per site
//   X(t_l) by the exact transition of dX = -X/(1-t) dt + dW, drawn
//          time-major from Rng(derive_seed(seed, "reverse"))
inline PathState sample_path(const LatticeBox& box, std::vector<double> t_grid, std::uint64_t seed) {
  validate_grid(t_grid);
  const std::size_t L = t_grid.size() - 1;
  const std::size_t pairs = box.pair_count();
  const std::size_t n = box.site_count();
  PathState ps{box, std::move(t_grid), {}, {}, {}};
  const auto& t = ps.t_grid;

  ps.B.assign(L + 1, std::vector<double>(pairs, 0.0));
  ps.B[L] = sample_disorder(box, seed).g;
  Rng bridge(derive_seed(seed, "bridge"));
  for (std::size_t l = 1; l < L; ++l) {
    const double frac = (t[l] - t[l - 1]) / (1.0 - t[l - 1]);
    const double sd = std::sqrt((t[l] - t[l - 1]) * (1.0 - t[l]) / (1.0 - t[l - 1]));
    for (std::size_t p = 0; p < pairs; ++p) {
      const double prev = ps.B[l - 1][p];
      ps.B[l][p] = prev + frac * (ps.B[L][p] - prev) + sd * bridge.normal();
    }
  }

  ps.eta.resize(n);
  Rng eta_rng(derive_seed(seed, "eta"));
  for (double& e : ps.eta) e = eta_rng.normal();

  ps.X.assign(L + 1, std::vector<double>(n, 0.0));
  ps.X[0] = ps.eta;
  Rng rev(derive_seed(seed, "reverse"));
  for (std::size_t l = 1; l < L; ++l) {
    const double shrink = (1.0 - t[l]) / (1.0 - t[l - 1]);
    const double sd = std::sqrt((1.0 - t[l]) * (t[l] - t[l - 1]) / (1.0 - t[l - 1]));
    for (std::size_t i = 0; i < n; ++i) ps.X[l][i] = ps.X[l - 1][i] * shrink + sd * rev.normal();
  }
  return ps;
}

// log Z_N(t_l) for the interpolated energy
//   beta side^{-d/2} sum B_ij(t) q_N(i-j) s_i s_j + sum (h + beta sqrt(gamma0 r) X_i(t)) s_i.
inline double log_partition_at(const PathState& path, std::size_t t_index, const KernelSpec& kernel, double beta,
                               double h, double r, std::size_t site_limit = kLogZSiteLimit) {
  if (t_index >= path.t_grid.size()) throw ValidationError("time index outside the grid");
  check_enumeration_size(path.box, site_limit);
  const std::size_t n = path.box.site_count();
  const CouplingMatrix J = path.box.pair_count()
                               ? coupling_matrix(path.box, path.B[t_index], pair_kernel(path.box, kernel), beta)
                               : CouplingMatrix(n);
  const double c = beta * std::sqrt(kernel.gamma0() * r);
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = h + c * path.X[t_index][i];
  return log_partition(J, f);
}

// log Z_N(0) = n log 2 + sum_i log cosh(beta sqrt(r_hat) eta_i + h).
inline double initial_closed_form(std::span<const double> eta, double beta, double h, double r_hat) {
  if (!(r_hat >= 0.0)) throw ValidationError("r_hat must be >= 0");
  const double c = beta * std::sqrt(r_hat);
  double acc = static_cast<double>(eta.size()) * std::numbers::ln2;
  for (double e : eta) acc += log_cosh(c * e + h);
  return acc;
}

// Y_N(t) = side^{d/2} (logZ(t) / side^d - p_{beta,h,t}).
inline double fluctuation(const LatticeBox& box, double logZ, double p_t) {
  const double n = static_cast<double>(box.site_count());
  return std::sqrt(n) * (logZ / n - p_t);
}

}  // namespace locsk
