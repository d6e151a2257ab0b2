#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "locsk/errors.hpp"
#include "locsk/lattice.hpp"

namespace locsk {

// Tolerances on negativity of the squared kernel.
inline constexpr double kCoefficientNegTol = 1e-8;
inline constexpr double kPointwiseNegTol = 1e-10;
// Fitted coefficients with magnitude below this are treated as round-off
// and dropped from the mode list.
inline constexpr double kFitDropTol = 1e-12;

struct Mode {
  Coord k;
  double gamma = 0.0;
};

// Number of nonzero components of k.
inline int nonzero_count(const Coord& k) {
  return static_cast<int>(std::count_if(k.begin(), k.end(), [](int v) { return v != 0; }));
}

inline bool is_zero_mode(const Coord& k) { return nonzero_count(k) == 0; }

// A mode vector is canonical if it is zero or its first nonzero entry is
// positive. Every +-k pair has exactly one canonical member.
inline bool is_canonical(const Coord& k) {
  for (int v : k) {
    if (v != 0) return v > 0;
  }
  return true;
}

inline Coord canonicalize(Coord k) {
  if (!is_canonical(k)) {
    for (int& v : k) v = -v;
  }
  return k;
}

// Squared localization kernel as a finite cosine series
//
//   q^2(x) = gamma_0 + sum_{canonical k != 0} 2 gamma_k cos(pi k.x),
//
// i.e. the symmetric exponential series with gamma_{-k} = gamma_k folded
// onto canonical modes. The kernel q itself is taken as +sqrt(q^2); only q^2
// enters the law of the couplings, so the sign choice is immaterial.
class KernelSpec {
 public:
  KernelSpec(int dim, std::vector<Mode> modes) : dim_(dim), modes_(std::move(modes)) {
    if (dim < 1) throw ValidationError("kernel dimension must be >= 1");
    std::set<Coord> seen;
    for (const auto& m : modes_) {
      if (m.k.size() != static_cast<std::size_t>(dim)) throw ValidationError("mode vector has wrong dimension");
      if (!is_canonical(m.k)) throw ValidationError("mode vector is not canonical");
      if (!seen.insert(m.k).second) throw ValidationError("duplicate mode vector");
      if (!std::isfinite(m.gamma)) throw ValidationError("mode coefficient is not finite");
      if (m.gamma < 0.0) throw NotPositiveType("negative Fourier coefficient");
    }
    std::sort(modes_.begin(), modes_.end(), [](const Mode& a, const Mode& b) { return a.k < b.k; });
    // zero vector sorts after negative entries; move it to the front
    std::stable_partition(modes_.begin(), modes_.end(), [](const Mode& m) { return is_zero_mode(m.k); });

    gamma0_ = 0.0;
    Gamma_ = 0.0;
    for (const auto& m : modes_) {
      if (is_zero_mode(m.k)) {
        gamma0_ = m.gamma;
        Gamma_ += m.gamma;
      } else {
        Gamma_ += 2.0 * m.gamma;
      }
    }
    validate_pointwise();
  }

  int dim() const { return dim_; }
  const std::vector<Mode>& modes() const { return modes_; }
  double gamma0() const { return gamma0_; }
  // Sum of gamma_k over all of Z^d.
  double Gamma() const { return Gamma_; }

  // Canonical nonzero modes only.
  std::vector<Mode> nonzero_modes() const {
    std::vector<Mode> out;
    for (const auto& m : modes_)
      if (!is_zero_mode(m.k)) out.push_back(m);
    return out;
  }

  int max_abs_mode() const {
    int mx = 0;
    for (const auto& m : modes_)
      for (int v : m.k) mx = std::max(mx, std::abs(v));
    return mx;
  }

  double q2(std::span<const double> x) const {
    double v = 0.0;
    for (const auto& m : modes_) {
      if (is_zero_mode(m.k)) {
        v += m.gamma;
        continue;
      }
      double phase = 0.0;
      for (std::size_t l = 0; l < m.k.size(); ++l) phase += m.k[l] * x[l];
      v += 2.0 * m.gamma * std::cos(std::numbers::pi * phase);
    }
    return v;
  }

  double q2(std::initializer_list<double> x) const {
    return q2(std::span<const double>(x.begin(), x.size()));
  }

  // Smallest q^2 value seen on a uniform periodic validation grid.
  double min_on_grid(int per_dim) const {
    std::vector<double> x(static_cast<std::size_t>(dim_));
    std::size_t total = 1;
    for (int l = 0; l < dim_; ++l) total *= static_cast<std::size_t>(per_dim);
    double mn = INFINITY;
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::size_t r = idx;
      for (int l = dim_ - 1; l >= 0; --l) {
        x[static_cast<std::size_t>(l)] = -1.0 + 2.0 * static_cast<double>(r % static_cast<std::size_t>(per_dim)) / per_dim;
        r /= static_cast<std::size_t>(per_dim);
      }
      mn = std::min(mn, q2(x));
    }
    return mn;
  }

 private:
  void validate_pointwise() const {
    // dense enough to resolve the highest mode; capped to keep d >= 3 cheap
    int per_dim = std::max(16, 8 * max_abs_mode() + 1);
    std::size_t total = 1;
    for (int l = 0; l < dim_; ++l) total *= static_cast<std::size_t>(per_dim);
    while (total > 2'000'000 && per_dim > 4) {
      --per_dim;
      total = 1;
      for (int l = 0; l < dim_; ++l) total *= static_cast<std::size_t>(per_dim);
    }
    if (min_on_grid(per_dim) < -kPointwiseNegTol) throw NotPositiveType("q^2 takes negative values");
  }

  int dim_;
  std::vector<Mode> modes_;
  double gamma0_ = 0.0;
  double Gamma_ = 0.0;
};

// q^2(x) = 1 + cos(pi x) in d = 1. For d > 1 the single mode (1, ..., 1)
// is used so that every active mode has all components nonzero.
inline KernelSpec default_kernel(int dim = 1) {
  return KernelSpec(dim, {{Coord(static_cast<std::size_t>(dim), 0), 1.0},
                          {Coord(static_cast<std::size_t>(dim), 1), 0.5}});
}

// S_k = side^-d sum_{i in C_N} exp(i pi i.k / N), by direct summation.
inline std::complex<double> structure_sum(const LatticeBox& box, const Coord& k) {
  if (k.size() != static_cast<std::size_t>(box.dim())) throw ValidationError("mode vector has wrong dimension");
  if (is_zero_mode(k)) return {1.0, 0.0};
  if (box.radius() == 0) throw ValidationError("structure sum with k != 0 is undefined for N = 0");
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t s = 0; s < box.site_count(); ++s) {
    const Coord c = box.coord(s);
    long dot = 0;
    for (std::size_t l = 0; l < c.size(); ++l) dot += static_cast<long>(c[l]) * k[l];
    acc += std::polar(1.0, std::numbers::pi * static_cast<double>(dot) / box.radius());
  }
  return acc / static_cast<double>(box.site_count());
}

// Product form: side^-d prod_l [(-1)^{k_l} if k_l != 0 else side]. A
// component that is a multiple of 2N aliases to zero (every phase is 1) and
// contributes side, not (-1)^{k_l}.
inline double structure_sum_closed_form(const LatticeBox& box, const Coord& k) {
  if (k.size() != static_cast<std::size_t>(box.dim())) throw ValidationError("mode vector has wrong dimension");
  double v = 1.0;
  for (int kl : k) {
    if (kl != 0) {
      if (box.radius() == 0) throw ValidationError("structure sum with k != 0 is undefined for N = 0");
      if (kl % (2 * box.radius()) == 0) continue;
      v *= (kl % 2 == 0) ? 1.0 : -1.0;
      v /= box.side();
    }
  }
  return v;
}

struct Hypothesis2 {
  int max_valid_dhat = 0;
  bool satisfied = false;
};

inline Hypothesis2 check_hypothesis2(const KernelSpec& spec) {
  int mn = spec.dim();
  for (const auto& m : spec.modes()) {
    if (!is_zero_mode(m.k) && m.gamma > 0.0) mn = std::min(mn, nonzero_count(m.k));
  }
  // d-hat > d/2  <=>  2 d-hat > d
  return {mn, 2 * mn > spec.dim()};
}

inline int dhat_max(const KernelSpec& spec) {
  const auto h = check_hypothesis2(spec);
  return h.satisfied ? h.max_valid_dhat : 0;
}

// q_N at a lattice displacement: sqrt(max(q^2(displacement / N), 0)).
inline double evaluate_qN(const KernelSpec& spec, const LatticeBox& box, const Coord& displacement) {
  if (box.radius() < 1) throw ValidationError("q_N needs N >= 1");
  std::vector<double> x(displacement.size());
  for (std::size_t l = 0; l < x.size(); ++l) x[l] = static_cast<double>(displacement[l]) / box.radius();
  return std::sqrt(std::max(spec.q2(x), 0.0));
}

struct KernelFit {
  KernelSpec spec;
  double residual;  // max |reconstruction - sample| over the grid
};

// Fit q^2 sampled on the periodic grid x_j = -1 + 2 j / g (per dimension,
// lexicographic with last dimension fastest) by its discrete cosine
// coefficients, truncated at |k_l| <= max_mode.
inline KernelFit fit_from_grid(int dim, std::span<const double> values, int grid_per_dim, int max_mode,
                               double residual_tol = 1e-6) {
  if (dim < 1) throw ValidationError("dimension must be >= 1");
  if (max_mode < 0) throw ValidationError("max_mode must be >= 0");
  if (grid_per_dim < 4 * max_mode || grid_per_dim < 1)
    throw ValidationError("grid_per_dim must be >= 4 * max_mode");
  std::size_t total = 1;
  for (int l = 0; l < dim; ++l) total *= static_cast<std::size_t>(grid_per_dim);
  if (values.size() != total) throw ValidationError("grid size does not match grid_per_dim^d");

  const auto g = static_cast<std::size_t>(grid_per_dim);
  std::vector<std::vector<double>> points(total, std::vector<double>(static_cast<std::size_t>(dim)));
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t r = idx;
    for (int l = dim - 1; l >= 0; --l) {
      points[idx][static_cast<std::size_t>(l)] = -1.0 + 2.0 * static_cast<double>(r % g) / grid_per_dim;
      r /= g;
    }
  }

  // canonical mode vectors in the truncation window
  std::vector<Coord> ks;
  const int w = 2 * max_mode + 1;
  std::size_t window = 1;
  for (int l = 0; l < dim; ++l) window *= static_cast<std::size_t>(w);
  for (std::size_t idx = 0; idx < window; ++idx) {
    Coord k(static_cast<std::size_t>(dim));
    std::size_t r = idx;
    for (int l = dim - 1; l >= 0; --l) {
      k[static_cast<std::size_t>(l)] = static_cast<int>(r % static_cast<std::size_t>(w)) - max_mode;
      r /= static_cast<std::size_t>(w);
    }
    if (is_canonical(k)) ks.push_back(std::move(k));
  }

  std::vector<Mode> modes;
  for (const auto& k : ks) {
    double acc = 0.0;
    for (std::size_t idx = 0; idx < total; ++idx) {
      double phase = 0.0;
      for (std::size_t l = 0; l < k.size(); ++l) phase += k[l] * points[idx][l];
      acc += values[idx] * std::cos(std::numbers::pi * phase);
    }
    const double gamma = acc / static_cast<double>(total);
    if (gamma < -kCoefficientNegTol) throw NotPositiveType("fitted Fourier coefficient is negative");
    if (std::abs(gamma) > kFitDropTol) modes.push_back({k, std::max(gamma, 0.0)});
  }

  KernelSpec spec(dim, std::move(modes));
  double residual = 0.0;
  for (std::size_t idx = 0; idx < total; ++idx)
    residual = std::max(residual, std::abs(spec.q2(points[idx]) - values[idx]));
  if (residual > residual_tol) throw TruncationError("kernel fit residual exceeds tolerance");
  return {std::move(spec), residual};
}

inline KernelFit fit_from_function(int dim, const std::function<double(std::span<const double>)>& q2,
                                   int grid_per_dim, int max_mode, double residual_tol = 1e-6) {
  std::size_t total = 1;
  for (int l = 0; l < dim; ++l) total *= static_cast<std::size_t>(grid_per_dim);
  std::vector<double> values(total);
  std::vector<double> x(static_cast<std::size_t>(dim));
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t r = idx;
    for (int l = dim - 1; l >= 0; --l) {
      x[static_cast<std::size_t>(l)] =
          -1.0 + 2.0 * static_cast<double>(r % static_cast<std::size_t>(grid_per_dim)) / grid_per_dim;
      r /= static_cast<std::size_t>(grid_per_dim);
    }
    values[idx] = q2(x);
  }
  return fit_from_grid(dim, values, grid_per_dim, max_mode, residual_tol);
}

// --- kernel file: {"d": int, "modes": [{"k": [int...], "gamma": float}, ...]}

inline nlohmann::json to_json(const KernelSpec& spec) {
  nlohmann::json modes = nlohmann::json::array();
  for (const auto& m : spec.modes()) modes.push_back({{"k", m.k}, {"gamma", m.gamma}});
  return {{"d", spec.dim()}, {"modes", modes}};
}

inline KernelSpec kernel_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object() || !j.contains("d") || !j.contains("modes"))
      throw ValidationError("kernel JSON needs keys \"d\" and \"modes\"");
    const int d = j.at("d").get<int>();
    std::vector<Mode> modes;
    for (const auto& m : j.at("modes")) {
      modes.push_back({m.at("k").get<Coord>(), m.at("gamma").get<double>()});
    }
    return KernelSpec(d, std::move(modes));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed kernel JSON: ") + e.what());
  }
}

inline KernelSpec load_kernel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open kernel file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("kernel file is not valid JSON: ") + e.what());
  }
  return kernel_from_json(j);
}

inline void save_kernel(const KernelSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write kernel file " + path);
  out << to_json(spec).dump(2) << '\n';
}

}  // namespace locsk
