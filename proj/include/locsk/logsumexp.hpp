#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace locsk {

// Running log(sum_i exp(x_i)) with a moving reference point, so that no
// intermediate exp() overflows regardless of the magnitude of x_i. The sum
// is Neumaier-compensated; 2^24 terms otherwise lose about 1e-10.
class StreamingLogSumExp {
 public:
  void add(double x) {
    if (x <= ref_) {
      plus(std::exp(x - ref_));
    } else {
      const double scale = std::exp(ref_ - x);
      acc_ *= scale;
      comp_ *= scale;
      ref_ = x;
      plus(1.0);
    }
  }

  double value() const {
    const double total = acc_ + comp_;
    if (total == 0.0) return -std::numeric_limits<double>::infinity();
    return ref_ + std::log(total);
  }

 private:
  void plus(double v) {
    const double t = acc_ + v;
    comp_ += std::abs(acc_) >= std::abs(v) ? (acc_ - t) + v : (v - t) + acc_;
    acc_ = t;
  }

  double ref_ = -std::numeric_limits<double>::infinity();
  double acc_ = 0.0;
  double comp_ = 0.0;
};

inline double log_sum_exp(std::span<const double> xs) {
  StreamingLogSumExp s;
  for (double x : xs) s.add(x);
  return s.value();
}

}  // namespace locsk
