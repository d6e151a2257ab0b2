#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "locsk/errors.hpp"

namespace locsk {

// Gauss-Hermite rule for expectations over a standard normal z:
//   E[f(z)] ~= sum_i w_i f(x_i).
// Nodes are found by Newton iteration on orthonormal Hermite polynomials
// (physicists' weight e^{-x^2}) and rescaled to the normal density.
class GaussHermite {
 public:
  explicit GaussHermite(int n = 61) {
    if (n < 1) throw ValidationError("Gauss-Hermite rule needs at least one node");
    const auto un = static_cast<std::size_t>(n);
    std::vector<double> x(un), w(un);
    const double pim4 = 1.0 / std::pow(std::numbers::pi, 0.25);
    const std::size_t half = (un + 1) / 2;
    double z = 0.0;
    for (std::size_t i = 0; i < half; ++i) {
      if (i == 0) {
        z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
      } else if (i == 1) {
        z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
      } else if (i == 2) {
        z = 1.86 * z - 0.86 * x[0];
      } else if (i == 3) {
        z = 1.91 * z - 0.91 * x[1];
      } else {
        z = 2.0 * z - x[i - 2];
      }
      double pp = 0.0;
      bool converged = false;
      for (int it = 0; it < 100; ++it) {
        double p1 = pim4, p2 = 0.0;
        for (int j = 0; j < n; ++j) {
          const double p3 = p2;
          p2 = p1;
          p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
        }
        pp = std::sqrt(2.0 * n) * p2;
        const double z1 = z;
        z = z1 - p1 / pp;
        if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) {
          converged = true;
          break;
        }
      }
      if (!converged) throw NoConvergence("Gauss-Hermite node iteration did not converge");
      x[i] = z;
      x[un - 1 - i] = -z;
      w[i] = w[un - 1 - i] = 2.0 / (pp * pp);
    }
    nodes_.resize(un);
    weights_.resize(un);
    const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
    for (std::size_t i = 0; i < un; ++i) {
      nodes_[i] = std::numbers::sqrt2 * x[i];
      weights_[i] = w[i] * inv_sqrt_pi;
    }
  }

  std::size_t size() const { return nodes_.size(); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }

  template <class F>
  double expect(F&& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) acc += weights_[i] * f(nodes_[i]);
    return acc;
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

inline const GaussHermite& default_rule() {
  static const GaussHermite rule(61);
  return rule;
}

template <class F>
double expect_gauss(F&& f, int nodes = 61) {
  if (nodes == 61) return default_rule().expect(f);
  return GaussHermite(nodes).expect(f);
}

// log cosh without overflow.
inline double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

}  // namespace locsk
