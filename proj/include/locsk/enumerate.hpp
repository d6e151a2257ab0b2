#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "locsk/errors.hpp"
#include "locsk/logsumexp.hpp"

namespace locsk {

// Dense symmetric coupling matrix with zero diagonal. An energy function
//   -H(sigma) = sum_{i<j} J_ij sigma_i sigma_j + sum_i f_i sigma_i
// is described by a CouplingMatrix together with the field vector f.
class CouplingMatrix {
 public:
  explicit CouplingMatrix(std::size_t n) : n_(n), a_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, double v) {
    a_[i * n_ + j] = v;
    a_[j * n_ + i] = v;
  }
  std::span<const double> row(std::size_t i) const { return {a_.data() + i * n_, n_}; }

 private:
  std::size_t n_;
  std::vector<double> a_;
};

inline double energy_of(const CouplingMatrix& J, std::span<const double> fields, std::span<const std::int8_t> sigma) {
  const std::size_t n = J.size();
  double e = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double pair = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) pair += J(i, j) * sigma[j];
    e += sigma[i] * (pair + fields[i]);
  }
  return e;
}

inline constexpr std::uint64_t kGrayResyncMask = 1023;

// Visits all 2^n configurations in reflected Gray-code order, calling
// visit(sigma, energy) with energy = -H(sigma). Starts from all spins +1;
// each step flips one spin and updates energy and local fields in O(n),
// with an exact recomputation every 1024 steps.
template <class Visitor>
void enumerate_gray(const CouplingMatrix& J, std::span<const double> fields, Visitor&& visit) {
  const std::size_t n = J.size();
  if (fields.size() != n) throw ValidationError("field vector size does not match couplings");
  if (n >= 63) throw TooLarge("too many sites to enumerate");
  std::vector<std::int8_t> sigma(n, 1);
  std::vector<double> local(n);
  double energy = 0.0;
  // Recomputes local fields and energy from scratch, bounding the rounding
  // drift of the incremental updates.
  auto resync = [&] {
    energy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += J(i, j) * sigma[j];
      local[i] = s + fields[i];
      energy += sigma[i] * (0.5 * s + fields[i]);
    }
  };
  resync();
  visit(std::span<const std::int8_t>(sigma), energy);
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t step = 1; step < total; ++step) {
    const auto i = static_cast<std::size_t>(std::countr_zero(step));
    const double old = sigma[i];
    energy -= 2.0 * old * local[i];
    sigma[i] = static_cast<std::int8_t>(-sigma[i]);
    const double delta = -2.0 * old;
    const double* row = J.row(i).data();
    if ((step & kGrayResyncMask) == 0) {
      resync();
    } else {
      for (std::size_t j = 0; j < n; ++j) local[j] += delta * row[j];
    }
    visit(std::span<const std::int8_t>(sigma), energy);
  }
}

// log sum_sigma exp(-H(sigma) + offset).
inline double log_partition(const CouplingMatrix& J, std::span<const double> fields, double offset = 0.0) {
  StreamingLogSumExp lse;
  enumerate_gray(J, fields, [&](std::span<const std::int8_t>, double e) { lse.add(e + offset); });
  return lse.value();
}

}  // namespace locsk
