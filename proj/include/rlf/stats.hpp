#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "errors.hpp"

namespace rlf {

/**
 * @brief Exact running sum of doubles as non-overlapping partials (Shewchuk).
 *
 * The represented value is the exact sum of everything added, so the rounded
 * result does not depend on insertion order or on how sums are merged.
 */
class ExactSum {
 public:
  void add(double x) {
    if (!std::isfinite(x)) throw InvalidConfig("ExactSum accepts finite values only");
    std::size_t k = 0;
    for (double y : partials_) {
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials_[k++] = lo;
      x = hi;
    }
    partials_.resize(k);
    partials_.push_back(x);
  }

  void merge(const ExactSum& other) {
    for (double p : other.partials_) add(p);
  }

  /// Correctly rounded (half-even) value of the exact sum.
  double value() const {
    if (partials_.empty()) return 0.0;
    auto i = partials_.size();
    double hi = partials_[--i];
    double lo = 0.0;
    while (i > 0) {
      const double x = hi, y = partials_[--i];
      hi = x + y;
      lo = y - (hi - x);
      if (lo != 0.0) break;
    }
    if (i > 0 && ((lo < 0.0 && partials_[i - 1] < 0.0) || (lo > 0.0 && partials_[i - 1] > 0.0))) {
      const double y = lo * 2.0;
      const double x = hi + y;
      if (y == x - hi) hi = x;
    }
    return hi;
  }

 private:
  std::vector<double> partials_;
};

/// Count, sum and sum of squares, all exact; statistics are functions of the
/// exact sums only, so merging batches reproduces a single pass bit-for-bit.
class MomentAccumulator {
 public:
  void add(double x) {
    ++n_;
    sum_.add(x);
    const double sq = x * x;
    sumsq_.add(sq);
    sumsq_.add(std::fma(x, x, -sq));  // rounding error of x*x, exact
  }

  void merge(const MomentAccumulator& other) {
    n_ += other.n_;
    sum_.merge(other.sum_);
    sumsq_.merge(other.sumsq_);
  }

  std::int64_t count() const { return n_; }
  double sum() const { return sum_.value(); }
  double mean() const { return n_ ? sum_.value() / static_cast<double>(n_) : 0.0; }

  /// Unbiased sample variance.
  double variance() const {
    if (n_ < 2) return 0.0;
    const double n = static_cast<double>(n_);
    const double s = sum_.value();
    // sumsq - s^2/n with s^2 split exactly so only the final roundings remain.
    const double s2 = s * s;
    const double s2_err = std::fma(s, s, -s2);
    ExactSum centered = sumsq_;
    centered.add(-s2 / n);
    centered.add(-(s2_err + std::fma(-s2 / n, n, s2)) / n);
    return std::max(0.0, centered.value() / (n - 1.0));
  }

  double std_error() const { return n_ < 2 ? 0.0 : std::sqrt(variance() / static_cast<double>(n_)); }

 private:
  std::int64_t n_ = 0;
  ExactSum sum_, sumsq_;
};

}  // namespace rlf
