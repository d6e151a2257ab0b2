#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <vector>

#include "locsk/enumerate.hpp"
#include "locsk/errors.hpp"
#include "locsk/model.hpp"
#include "locsk/rng.hpp"

namespace locsk {

// Spins plus cached cavity fields
//   local_field[i] = sum_{j != i} J_ij sigma_j + h
// and the current -H.
struct ChainState {
  SpinConfiguration sigma;
  std::vector<double> local_field;
  double energy = 0.0;
};

inline ChainState make_chain_state(const CouplingMatrix& J, double h, SpinConfiguration sigma) {
  const std::size_t n = J.size();
  ChainState st{std::move(sigma), std::vector<double>(n, h), 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = J.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += row[j] * st.sigma.spins[j];
    st.local_field[i] += s;
  }
  const std::vector<double> f(n, h);
  st.energy = energy_of(J, f, st.sigma.spins);
  return st;
}

// Recomputes fields and energy from scratch; returns the largest
// discrepancy found against the incrementally maintained values.
inline double resync(ChainState& st, const CouplingMatrix& J, double h) {
  const ChainState fresh = make_chain_state(J, h, st.sigma);
  double drift = std::abs(fresh.energy - st.energy);
  for (std::size_t i = 0; i < fresh.local_field.size(); ++i)
    drift = std::max(drift, std::abs(fresh.local_field[i] - st.local_field[i]));
  st.local_field = fresh.local_field;
  st.energy = fresh.energy;
  return drift;
}

// One heat-bath sweep in site order 0, 1, ..., n-1:
//   sigma_i <- +1 with probability e^{L_i} / (2 cosh L_i).
inline void heat_bath_sweep(ChainState& st, const CouplingMatrix& J, Rng& rng) {
  const std::size_t n = J.size();
  auto& s = st.sigma.spins;
  for (std::size_t i = 0; i < n; ++i) {
    const double L = st.local_field[i];
    const double p_plus = 1.0 / (1.0 + std::exp(-2.0 * L));
    const std::int8_t next = rng.uniform() < p_plus ? 1 : -1;
    if (next != s[i]) {
      st.energy += 2.0 * next * L;
      s[i] = next;
      const double delta = 2.0 * next;
      const double* row = J.row(i).data();
      for (std::size_t j = 0; j < n; ++j) st.local_field[j] += delta * row[j];
    }
  }
}

class HeatBathChain {
 public:
  HeatBathChain(CouplingMatrix J, double h, std::uint64_t seed) : J_(std::move(J)), h_(h), rng_(seed) {
    SpinConfiguration s{std::vector<std::int8_t>(J_.size())};
    for (auto& x : s.spins) x = rng_.uniform() < 0.5 ? 1 : -1;
    state_ = make_chain_state(J_, h_, std::move(s));
  }

  void sweep() { heat_bath_sweep(state_, J_, rng_); }
  double resync() { return locsk::resync(state_, J_, h_); }
  const ChainState& state() const { return state_; }
  const CouplingMatrix& couplings() const { return J_; }

 private:
  CouplingMatrix J_;
  double h_;
  Rng rng_;
  ChainState state_;
};

inline constexpr std::size_t kBatchCount = 32;
inline constexpr std::size_t kResyncInterval = 1000;

struct BatchMeans {
  double mean = 0.0;
  double se = 0.0;
};

// Mean with a batch-means standard error (up to kBatchCount batches of
// equal size; trailing records that do not fill a batch only enter the mean).
inline BatchMeans batch_means(const std::vector<double>& xs, std::size_t batches = kBatchCount) {
  BatchMeans out;
  if (xs.empty()) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(xs.size());
  const std::size_t b = std::min(batches, xs.size());
  if (b < 2) return out;
  const std::size_t size = xs.size() / b;
  std::vector<double> bm(b, 0.0);
  for (std::size_t k = 0; k < b; ++k) {
    for (std::size_t i = 0; i < size; ++i) bm[k] += xs[k * size + i];
    bm[k] /= static_cast<double>(size);
  }
  double mu = 0.0;
  for (double x : bm) mu += x;
  mu /= static_cast<double>(b);
  double var = 0.0;
  for (double x : bm) var += (x - mu) * (x - mu);
  var /= static_cast<double>(b - 1);
  out.se = std::sqrt(var / static_cast<double>(b));
  return out;
}

struct ReplicaChainResult {
  OverlapMoments moments;  // means and batch-means SE
  std::size_t records = 0;
  double max_drift = 0.0;
};

// Two independent heat-bath chains on the same disorder, seeded with
// derive_seed(seed, "replica", 0) and derive_seed(seed, "replica", 1).
// After burn_in sweeps every thin-th sweep records R, R^2, |R_k|^2 and the
// weighted moment (recentred by r).
inline ReplicaChainResult run_replica_chain(const DisorderSample& dis, const KernelSpec& kernel, double beta, double h,
                                            double r, std::size_t sweeps, std::size_t burn_in, std::size_t thin,
                                            std::uint64_t seed) {
  if (burn_in >= sweeps) throw InvalidSchedule("burn_in must be smaller than sweeps");
  if (thin < 1) throw InvalidSchedule("thin must be >= 1");
  const LatticeBox& box = dis.box;
  const auto J = coupling_matrix(dis, kernel, beta);
  HeatBathChain a(J, h, derive_seed(seed, "replica", 0));
  HeatBathChain b(J, h, derive_seed(seed, "replica", 1));

  const std::size_t n = box.site_count();
  const auto modes = kernel.nonzero_modes();
  std::vector<std::vector<double>> cosv(modes.size(), std::vector<double>(n, 1.0));
  std::vector<std::vector<double>> sinv(modes.size(), std::vector<double>(n, 0.0));
  if (box.radius() > 0) {
    for (std::size_t m = 0; m < modes.size(); ++m) {
      for (std::size_t i = 0; i < n; ++i) {
        const Coord c = box.coord(i);
        long dot = 0;
        for (std::size_t l = 0; l < c.size(); ++l) dot += static_cast<long>(c[l]) * modes[m].k[l];
        const double th = std::numbers::pi * static_cast<double>(dot) / box.radius();
        cosv[m][i] = std::cos(th);
        sinv[m][i] = std::sin(th);
      }
    }
  }

  std::vector<double> rec_r, rec_r2, rec_w;
  std::vector<std::vector<double>> rec_k(modes.size());
  std::vector<double> tau(n);
  ReplicaChainResult out;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t t = 1; t <= sweeps; ++t) {
    a.sweep();
    b.sweep();
    if (t % kResyncInterval == 0) out.max_drift = std::max({out.max_drift, a.resync(), b.resync()});
    if (t <= burn_in || (t - burn_in) % thin != 0) continue;
    const auto& s1 = a.state().sigma.spins;
    const auto& s2 = b.state().sigma.spins;
    double R = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      tau[i] = s1[i] * s2[i];
      R += tau[i];
    }
    R *= inv_n;
    double w = kernel.gamma0() * (R - r) * (R - r);
    for (std::size_t m = 0; m < modes.size(); ++m) {
      double re = 0.0, im = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        re += tau[i] * cosv[m][i];
        im += tau[i] * sinv[m][i];
      }
      const double v = (re * re + im * im) * inv_n * inv_n;
      rec_k[m].push_back(v);
      w += 2.0 * modes[m].gamma * v;
    }
    rec_r.push_back(R);
    rec_r2.push_back(R * R);
    rec_w.push_back(w);
  }

  out.records = rec_r.size();
  const auto br = batch_means(rec_r), br2 = batch_means(rec_r2), bw = batch_means(rec_w);
  out.moments.overlap = br.mean;
  out.moments.overlap_se = br.se;
  out.moments.overlap_sq = br2.mean;
  out.moments.overlap_sq_se = br2.se;
  out.moments.weighted = bw.mean;
  out.moments.weighted_se = bw.se;
  for (std::size_t m = 0; m < modes.size(); ++m) {
    const auto bk = batch_means(rec_k[m]);
    out.moments.modes.push_back({modes[m].k, modes[m].gamma, bk.mean, bk.se});
  }
  return out;
}

}  // namespace locsk
