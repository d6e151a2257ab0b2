#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "locsk/errors.hpp"

namespace locsk {

using Coord = std::vector<int>;

// The box [-N, N]^d.
//
// Sites are numbered lexicographically with the last coordinate running
// fastest: site s has coordinates (c_1, ..., c_d) with
//   s = sum_l (c_l + N) * side^(d - l).
// Unordered pairs (a, b), a < b, are numbered in the order
//   (0,1), (0,2), ..., (0,n-1), (1,2), ..., (n-2,n-1),
// see pair_index().
class LatticeBox {
 public:
  LatticeBox(int dim, int radius) : dim_(dim), radius_(radius) {
    if (dim < 1) throw ValidationError("lattice dimension must be >= 1");
    if (radius < 0) throw ValidationError("box radius must be >= 0");
    side_ = 2 * radius + 1;
    std::size_t n = 1;
    for (int l = 0; l < dim; ++l) {
      n *= static_cast<std::size_t>(side_);
      if (n > (std::size_t{1} << 40)) throw ValidationError("lattice box too large");
    }
    sites_ = n;
  }

  int dim() const { return dim_; }
  int radius() const { return radius_; }
  int side() const { return side_; }
  std::size_t site_count() const { return sites_; }
  std::size_t pair_count() const { return sites_ * (sites_ - 1) / 2; }

  Coord coord(std::size_t site) const {
    Coord c(static_cast<std::size_t>(dim_));
    for (int l = dim_ - 1; l >= 0; --l) {
      c[static_cast<std::size_t>(l)] = static_cast<int>(site % static_cast<std::size_t>(side_)) - radius_;
      site /= static_cast<std::size_t>(side_);
    }
    return c;
  }

  std::size_t index(const Coord& c) const {
    if (c.size() != static_cast<std::size_t>(dim_)) throw ValidationError("coordinate has wrong dimension");
    std::size_t s = 0;
    for (int x : c) {
      if (x < -radius_ || x > radius_) throw ValidationError("coordinate outside the box");
      s = s * static_cast<std::size_t>(side_) + static_cast<std::size_t>(x + radius_);
    }
    return s;
  }

  // Index of the unordered pair {a, b}, a != b.
  std::size_t pair_index(std::size_t a, std::size_t b) const {
    if (a > b) std::swap(a, b);
    return a * sites_ - a * (a + 1) / 2 + (b - a - 1);
  }

  friend bool operator==(const LatticeBox&, const LatticeBox&) = default;

 private:
  int dim_;
  int radius_;
  int side_;
  std::size_t sites_;
};

inline std::vector<Coord> enumerate_sites(const LatticeBox& box) {
  std::vector<Coord> out;
  out.reserve(box.site_count());
  for (std::size_t s = 0; s < box.site_count(); ++s) out.push_back(box.coord(s));
  return out;
}

}  // namespace locsk
