#pragma once

#include <cmath>
#include <numbers>

#include "locsk/errors.hpp"
#include "locsk/quadrature.hpp"

namespace locsk {

struct AnalyticOptions {
  int quad_nodes = 61;
  double tol = 1e-12;
  int max_iter = 10'000;
};

struct FixedPoint {
  double value = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool bisection = false;
  // h = 0: the root r = 0 is returned by convention.
  bool zero_field = false;
};

// Replica-symmetric overlap: the root in [0, 1] of
//   r = E[tanh^2(beta sqrt(gamma0 r) z + h)].
// Plain iteration from tanh^2(h); bisection on the residual if the
// iteration stalls or leaves [0, 1].
inline FixedPoint solve_r(double beta, double h, double gamma0, const AnalyticOptions& opt = {}) {
  if (!(beta >= 0.0) || !(h >= 0.0) || !(gamma0 >= 0.0)) throw ValidationError("beta, h, gamma0 must be >= 0");
  if (!(opt.tol > 0.0)) throw ValidationError("tolerance must be positive");
  if (h == 0.0) return {0.0, 0.0, 0, false, true};

  const GaussHermite local(opt.quad_nodes);
  const GaussHermite& rule = opt.quad_nodes == 61 ? default_rule() : local;
  auto F = [&](double r) {
    const double a = beta * std::sqrt(gamma0 * r);
    return rule.expect([&](double z) {
      const double t = std::tanh(a * z + h);
      return t * t;
    });
  };

  FixedPoint fp;
  double r = std::tanh(h) * std::tanh(h);
  double prev_step = INFINITY;
  int growing = 0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    const double next = F(r);
    const double step = std::abs(next - r);
    fp.iterations = it;
    if (step <= opt.tol) {
      fp.value = next;
      fp.residual = std::abs(F(next) - next);
      if (fp.residual <= opt.tol) return fp;
    }
    if (!(next >= 0.0 && next <= 1.0)) break;
    growing = step >= prev_step ? growing + 1 : 0;
    if (growing > 20) break;
    prev_step = step;
    r = next;
  }

  // F(0) - 0 = tanh^2(h) > 0 and F(1) - 1 <= 0.
  fp.bisection = true;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double g = F(mid) - mid;
    fp.iterations++;
    if (std::abs(g) <= opt.tol) {
      fp.value = mid;
      fp.residual = std::abs(g);
      return fp;
    }
    (g > 0.0 ? lo : hi) = mid;
    if (hi - lo < 1e-17) break;
  }
  throw NoConvergence("fixed point for r did not converge");
}

// Replica-symmetric SK free energy
//   beta^2 (1 - s)^2 / 4 + log 2 + E[log cosh(beta z sqrt(s) + h)],
// s the overlap fixed point at gamma0 = 1.
inline double sk_value(double beta, double h, const AnalyticOptions& opt = {}) {
  const double s = solve_r(beta, h, 1.0, opt).value;
  const GaussHermite rule(opt.quad_nodes);
  const double a = beta * std::sqrt(s);
  const double e = rule.expect([&](double z) { return log_cosh(a * z + h); });
  return beta * beta * (1.0 - s) * (1.0 - s) / 4.0 + std::numbers::ln2 + e;
}

struct CltVariance {
  double tau_hat = 0.0;  // Var[log cosh(beta sqrt(gamma0 r) z + h)]
  double tau = 0.0;      // tau_hat - beta^2 gamma0 r^2 / 2; may be negative
};

inline CltVariance clt_variance(double beta, double h, double gamma0, const AnalyticOptions& opt = {}) {
  const double r = solve_r(beta, h, gamma0, opt).value;
  const GaussHermite rule(opt.quad_nodes);
  const double a = beta * std::sqrt(gamma0 * r);
  const double m1 = rule.expect([&](double z) { return log_cosh(a * z + h); });
  const double m2 = rule.expect([&](double z) {
    const double v = log_cosh(a * z + h);
    return v * v;
  });
  CltVariance out;
  out.tau_hat = std::max(m2 - m1 * m1, 0.0);
  out.tau = out.tau_hat - beta * beta * gamma0 * r * r / 2.0;
  return out;
}

// p_{beta,h,t} = beta^2 gamma0 t (1 - r)^2 / 4 + log 2 + E[log cosh(beta sqrt(gamma0 r) z + h)].
inline double interpolated_free_energy(double beta, double h, double gamma0, double t,
                                       const AnalyticOptions& opt = {}) {
  if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("t must lie in [0, 1]");
  const double r = solve_r(beta, h, gamma0, opt).value;
  const GaussHermite rule(opt.quad_nodes);
  const double a = beta * std::sqrt(gamma0 * r);
  const double e = rule.expect([&](double z) { return log_cosh(a * z + h); });
  return beta * beta * gamma0 * t * (1.0 - r) * (1.0 - r) / 4.0 + std::numbers::ln2 + e;
}

struct AnalyticSolution {
  double beta = 0.0;
  double h = 0.0;
  double gamma0 = 0.0;
  double r = 0.0;
  double s = 0.0;
  double sk_value = 0.0;  // SK(sqrt(gamma0) beta, h)
  double p_value = 0.0;   // p(beta, h), identical to sk_value
  double tau_hat = 0.0;
  double tau = 0.0;
  bool zero_field = false;
  bool tau_negative = false;
};

inline AnalyticSolution solve_analytic(double beta, double h, double gamma0, const AnalyticOptions& opt = {}) {
  AnalyticSolution a;
  a.beta = beta;
  a.h = h;
  a.gamma0 = gamma0;
  const auto fp = solve_r(beta, h, gamma0, opt);
  a.r = fp.value;
  a.zero_field = fp.zero_field;
  const double eff = std::sqrt(gamma0) * beta;
  a.s = solve_r(eff, h, 1.0, opt).value;
  a.sk_value = sk_value(eff, h, opt);
  a.p_value = a.sk_value;
  const auto cv = clt_variance(beta, h, gamma0, opt);
  a.tau_hat = cv.tau_hat;
  a.tau = cv.tau;
  a.tau_negative = cv.tau < 0.0;
  return a;
}

}  // namespace locsk
