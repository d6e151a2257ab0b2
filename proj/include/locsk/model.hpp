#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "locsk/enumerate.hpp"
#include "locsk/errors.hpp"
#include "locsk/kernel.hpp"
#include "locsk/lattice.hpp"
#include "locsk/rng.hpp"

namespace locsk {

inline constexpr std::size_t kLogZSiteLimit = 24;
inline constexpr std::size_t kOverlapSiteLimit = 13;

// One realization of the IID standard normal couplings g_(i,j), stored
// unscaled in canonical pair order (see LatticeBox::pair_index).
struct DisorderSample {
  LatticeBox box;
  std::uint64_t seed = 0;
  std::vector<double> g;
};

// g is the first pair_count() normals of Rng(seed), in pair order.
inline DisorderSample sample_disorder(const LatticeBox& box, std::uint64_t seed) {
  DisorderSample d{box, seed, {}};
  d.g.resize(box.pair_count());
  Rng rng(seed);
  for (double& x : d.g) x = rng.normal();
  return d;
}

struct SpinConfiguration {
  std::vector<std::int8_t> spins;

  static SpinConfiguration all_plus(const LatticeBox& box) {
    return {std::vector<std::int8_t>(box.site_count(), 1)};
  }
};

// q_N(i - j) for every pair, in canonical pair order.
inline std::vector<double> pair_kernel(const LatticeBox& box, const KernelSpec& kernel) {
  if (kernel.dim() != box.dim()) throw ValidationError("kernel and box dimensions differ");
  std::vector<double> out;
  out.reserve(box.pair_count());
  const std::size_t n = box.site_count();
  std::vector<Coord> coords = enumerate_sites(box);
  Coord disp(static_cast<std::size_t>(box.dim()));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      for (std::size_t l = 0; l < disp.size(); ++l) disp[l] = coords[a][l] - coords[b][l];
      out.push_back(evaluate_qN(kernel, box, disp));
    }
  }
  return out;
}

// J_ij = beta side^{-d/2} q_N(i - j) g_(i,j).
inline CouplingMatrix coupling_matrix(const LatticeBox& box, std::span<const double> g, std::span<const double> qn,
                                      double beta) {
  const std::size_t n = box.site_count();
  if (g.size() != box.pair_count() || qn.size() != box.pair_count())
    throw ValidationError("coupling array has wrong length");
  CouplingMatrix J(n);
  const double scale = beta / std::pow(static_cast<double>(box.side()), box.dim() / 2.0);
  std::size_t p = 0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b, ++p) J.set(a, b, scale * qn[p] * g[p]);
  return J;
}

inline CouplingMatrix coupling_matrix(const DisorderSample& dis, const KernelSpec& kernel, double beta) {
  if (dis.box.pair_count() == 0) return CouplingMatrix(dis.box.site_count());
  return coupling_matrix(dis.box, dis.g, pair_kernel(dis.box, kernel), beta);
}

// -H_N(sigma).
inline double energy(const SpinConfiguration& sigma, const DisorderSample& dis, const KernelSpec& kernel,
                     double beta, double h) {
  if (sigma.spins.size() != dis.box.site_count()) throw ValidationError("configuration has wrong length");
  const auto J = coupling_matrix(dis, kernel, beta);
  std::vector<double> f(dis.box.site_count(), h);
  return energy_of(J, f, sigma.spins);
}

struct LogPartition {
  double logZ = 0.0;
  double pN = 0.0;
};

inline void check_enumeration_size(const LatticeBox& box, std::size_t limit) {
  if (box.site_count() > limit) throw TooLarge("box has more sites than the enumeration limit");
}

inline LogPartition exact_log_partition(const DisorderSample& dis, const KernelSpec& kernel, double beta, double h,
                                        std::size_t site_limit = kLogZSiteLimit) {
  check_enumeration_size(dis.box, site_limit);
  const auto J = coupling_matrix(dis, kernel, beta);
  std::vector<double> f(dis.box.site_count(), h);
  const double lz = log_partition(J, f);
  return {lz, lz / static_cast<double>(dis.box.site_count())};
}

// cos(pi k.(i - j) / N) for all site pairs (i, j), row major. For N = 0 the
// single site has phase 1.
inline std::vector<double> phase_cosines(const LatticeBox& box, const Coord& k) {
  const std::size_t n = box.site_count();
  std::vector<double> out(n * n, 1.0);
  if (box.radius() == 0) return out;
  const auto coords = enumerate_sites(box);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      long dot = 0;
      for (std::size_t l = 0; l < k.size(); ++l) dot += static_cast<long>(k[l]) * (coords[i][l] - coords[j][l]);
      out[i * n + j] = std::cos(std::numbers::pi * static_cast<double>(dot) / box.radius());
    }
  }
  return out;
}

struct ModeMoment {
  Coord k;
  double gamma = 0.0;
  double value = 0.0;  // nu(|R_k|^2)
  double se = 0.0;
};

// Two-replica Gibbs averages of the overlaps. `weighted` is
//   gamma_0 nu((R - r)^2) + sum_{k != 0 in Z^d} gamma_k nu(|R_k|^2),
// i.e. the k = 0 term is recentred by r and each canonical mode counts
// twice (for k and -k).
struct OverlapMoments {
  std::vector<ModeMoment> modes;  // canonical k != 0
  double overlap = 0.0;           // nu(R)
  double overlap_sq = 0.0;        // nu(R^2)
  double weighted = 0.0;
  double overlap_se = 0.0;
  double overlap_sq_se = 0.0;
  double weighted_se = 0.0;
};

inline double weighted_moment(const KernelSpec& kernel, double overlap, double overlap_sq,
                              std::span<const ModeMoment> modes, double r) {
  double w = kernel.gamma0() * (overlap_sq - 2.0 * r * overlap + r * r);
  for (const auto& m : modes) w += 2.0 * m.gamma * m.value;
  return w;
}

// R^{1,2} and R_k^{1,2} of two fixed configurations.
inline double overlap_of(const SpinConfiguration& s1, const SpinConfiguration& s2) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s1.spins.size(); ++i) acc += s1.spins[i] * s2.spins[i];
  return acc / static_cast<double>(s1.spins.size());
}

inline std::complex<double> mode_overlap_of(const LatticeBox& box, const Coord& k, const SpinConfiguration& s1,
                                            const SpinConfiguration& s2) {
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t i = 0; i < box.site_count(); ++i) {
    double phase = 0.0;
    if (box.radius() > 0) {
      const Coord c = box.coord(i);
      long dot = 0;
      for (std::size_t l = 0; l < c.size(); ++l) dot += static_cast<long>(c[l]) * k[l];
      phase = std::numbers::pi * static_cast<double>(dot) / box.radius();
    }
    acc += std::polar(static_cast<double>(s1.spins[i] * s2.spins[i]), phase);
  }
  return acc / static_cast<double>(box.site_count());
}

// Single-replica Gibbs averages rho(sigma_i) and rho(sigma_i sigma_j).
struct GibbsCorrelations {
  std::vector<double> magnetization;  // n
  std::vector<double> correlation;    // n x n, row major, unit diagonal
};

inline GibbsCorrelations gibbs_correlations(const CouplingMatrix& J, std::span<const double> fields) {
  const std::size_t n = J.size();
  const double lz = log_partition(J, fields);
  GibbsCorrelations c{std::vector<double>(n, 0.0), std::vector<double>(n * n, 0.0)};
  enumerate_gray(J, fields, [&](std::span<const std::int8_t> s, double e) {
    const double w = std::exp(e - lz);
    for (std::size_t i = 0; i < n; ++i) {
      const double wi = w * s[i];
      c.magnetization[i] += wi;
      for (std::size_t j = i + 1; j < n; ++j) c.correlation[i * n + j] += wi * s[j];
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    c.correlation[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) c.correlation[j * n + i] = c.correlation[i * n + j];
  }
  return c;
}

// Exact rho x rho averages using rho(s_i^1 s_i^2 s_j^1 s_j^2) = rho(s_i s_j)^2,
// so a single 2^n sweep suffices.
inline OverlapMoments overlap_moments_from_correlations(const LatticeBox& box, const KernelSpec& kernel,
                                                        const GibbsCorrelations& c, double r) {
  const std::size_t n = box.site_count();
  const double inv_n = 1.0 / static_cast<double>(n);
  OverlapMoments out;
  double m2 = 0.0;
  for (double m : c.magnetization) m2 += m * m;
  out.overlap = m2 * inv_n;
  std::vector<double> c2(n * n);
  double s2 = 0.0;
  for (std::size_t p = 0; p < n * n; ++p) {
    c2[p] = c.correlation[p] * c.correlation[p];
    s2 += c2[p];
  }
  out.overlap_sq = s2 * inv_n * inv_n;
  for (const auto& mode : kernel.nonzero_modes()) {
    const auto cosines = phase_cosines(box, mode.k);
    double acc = 0.0;
    for (std::size_t p = 0; p < n * n; ++p) acc += cosines[p] * c2[p];
    out.modes.push_back({mode.k, mode.gamma, acc * inv_n * inv_n, 0.0});
  }
  out.weighted = weighted_moment(kernel, out.overlap, out.overlap_sq, out.modes, r);
  return out;
}

inline OverlapMoments overlap_moments_exact(const DisorderSample& dis, const KernelSpec& kernel, double beta,
                                            double h, double r, std::size_t site_limit = kOverlapSiteLimit) {
  check_enumeration_size(dis.box, site_limit);
  const auto J = coupling_matrix(dis, kernel, beta);
  std::vector<double> f(dis.box.site_count(), h);
  return overlap_moments_from_correlations(dis.box, kernel, gibbs_correlations(J, f), r);
}

// side^{-2d} sum_{(i,j)} q_N^2(i - j).
inline double pair_kernel_square_sum(const LatticeBox& box, const KernelSpec& kernel) {
  if (box.pair_count() == 0) return 0.0;
  double acc = 0.0;
  for (double q : pair_kernel(box, kernel)) acc += q * q;
  const double n = static_cast<double>(box.site_count());
  return acc / (n * n);
}

// Gaussian integration-by-parts form of the beta derivative of E[p_N]:
//   beta side^{-2d} sum_{(i,j)} q_N^2(i-j) - beta/2 sum_{k != 0} gamma_k nu(|R_k|^2)
//   - beta/2 gamma_0 nu(R^2) + beta Gamma / (2 side^d).
inline double derivative_rhs(const LatticeBox& box, const KernelSpec& kernel, double beta, double q2_sum,
                             const OverlapMoments& m) {
  double modes = 0.0;
  for (const auto& mm : m.modes) modes += 2.0 * mm.gamma * mm.value;
  const double n = static_cast<double>(box.site_count());
  return beta * q2_sum - 0.5 * beta * modes - 0.5 * beta * kernel.gamma0() * m.overlap_sq +
         beta * kernel.Gamma() / (2.0 * n);
}

inline constexpr double kDerivativeStep = 1e-3;

struct DerivativeResidual {
  double residual = 0.0;
  double std_error = 0.0;
  double lhs = 0.0;  // finite-difference estimate of d/dbeta E[p_N]
  double rhs = 0.0;
  std::size_t samples = 0;
};

// Estimates d/dbeta E[p_N] two ways on the same disorder and returns the
// mean difference with its standard error. The left side is a central
// finite difference of p_N in beta with common disorder at beta +- step;
// the right side is derivative_rhs() with exact overlap moments. Each of
// the `samples` draws g = sample_disorder(box, derive_seed(seed,
// "derivative", s)) is used together with its mirror -g and the two are
// averaged; this removes the part of p_N that is odd in beta exactly,
// which dominates the noise near beta = 0.
inline DerivativeResidual beta_derivative_residual(const LatticeBox& box, const KernelSpec& kernel, double beta,
                                                   double h, std::size_t samples, std::uint64_t seed,
                                                   double step = kDerivativeStep) {
  if (!(beta > 0.0)) throw ValidationError("beta must be positive");
  if (samples < 1000) throw ValidationError("need at least 1000 disorder samples");
  check_enumeration_size(box, kOverlapSiteLimit);
  const double q2_sum = pair_kernel_square_sum(box, kernel);
  const std::vector<double> qn = box.pair_count() ? pair_kernel(box, kernel) : std::vector<double>{};
  const std::vector<double> f(box.site_count(), h);
  const double n = static_cast<double>(box.site_count());

  auto one = [&](std::span<const double> g, double& lhs, double& rhs) {
    auto build = [&](double b) {
      return box.pair_count() ? coupling_matrix(box, g, qn, b) : CouplingMatrix(box.site_count());
    };
    const double up = log_partition(build(beta + step), f) / n;
    const double down = log_partition(build(beta - step), f) / n;
    lhs = (up - down) / (2.0 * step);
    const auto mom = overlap_moments_from_correlations(box, kernel, gibbs_correlations(build(beta), f), 0.0);
    rhs = derivative_rhs(box, kernel, beta, q2_sum, mom);
  };

  double mean = 0.0, m2 = 0.0, lhs_mean = 0.0, rhs_mean = 0.0;
  std::vector<double> mirror(box.pair_count());
  for (std::size_t s = 0; s < samples; ++s) {
    const auto dis = sample_disorder(box, derive_seed(seed, "derivative", s));
    for (std::size_t p = 0; p < mirror.size(); ++p) mirror[p] = -dis.g[p];
    double l1, r1, l2, r2;
    one(dis.g, l1, r1);
    one(mirror, l2, r2);
    const double lhs = 0.5 * (l1 + l2);
    const double rhs = 0.5 * (r1 + r2);
    const double d = lhs - rhs;
    const double k = static_cast<double>(s + 1);
    const double delta = d - mean;
    mean += delta / k;
    m2 += delta * (d - mean);
    lhs_mean += (lhs - lhs_mean) / k;
    rhs_mean += (rhs - rhs_mean) / k;
  }
  DerivativeResidual out;
  out.samples = samples;
  out.residual = mean;
  out.std_error = std::sqrt(m2 / static_cast<double>(samples - 1) / static_cast<double>(samples));
  out.lhs = lhs_mean;
  out.rhs = rhs_mean;
  return out;
}

}  // namespace locsk
