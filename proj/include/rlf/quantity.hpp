#pragma once

#include <cmath>
#include <limits>
#include <ostream>

namespace rlf {

/**
 * @brief A real number that may instead be marked Divergent.
 *
 * Closed forms have simple poles on the phase boundaries. Dividing by an
 * exact zero yields Divergent, and Divergent absorbs every later operation
 * (including multiplication by zero), so a pole anywhere in a formula marks
 * the whole result.
 */
class Quantity {
 public:
  constexpr Quantity() = default;
  constexpr Quantity(double v) : value_(v) {}  // NOLINT: implicit on purpose

  static constexpr Quantity divergent() {
    Quantity q;
    q.divergent_ = true;
    return q;
  }

  constexpr bool is_divergent() const { return divergent_; }
  constexpr bool is_finite() const { return !divergent_; }

  /// Finite value; +inf when divergent.
  constexpr double value() const {
    return divergent_ ? std::numeric_limits<double>::infinity() : value_;
  }

  friend constexpr Quantity operator+(Quantity a, Quantity b) {
    if (a.divergent_ || b.divergent_) return divergent();
    return a.value_ + b.value_;
  }
  friend constexpr Quantity operator-(Quantity a, Quantity b) {
    if (a.divergent_ || b.divergent_) return divergent();
    return a.value_ - b.value_;
  }
  friend constexpr Quantity operator*(Quantity a, Quantity b) {
    if (a.divergent_ || b.divergent_) return divergent();
    return a.value_ * b.value_;
  }
  friend constexpr Quantity operator/(Quantity a, Quantity b) {
    if (a.divergent_ || b.divergent_ || b.value_ == 0.0) return divergent();
    return a.value_ / b.value_;
  }
  constexpr Quantity operator-() const {
    return divergent_ ? divergent() : Quantity(-value_);
  }
  Quantity& operator+=(Quantity o) { return *this = *this + o; }
  Quantity& operator-=(Quantity o) { return *this = *this - o; }
  Quantity& operator*=(Quantity o) { return *this = *this * o; }
  Quantity& operator/=(Quantity o) { return *this = *this / o; }

  friend constexpr bool operator==(Quantity a, Quantity b) {
    if (a.divergent_ || b.divergent_) return a.divergent_ == b.divergent_;
    return a.value_ == b.value_;
  }

  friend std::ostream& operator<<(std::ostream& os, Quantity q) {
    if (q.divergent_) return os << "inf";
    return os << q.value_;
  }

 private:
  double value_ = 0.0;
  bool divergent_ = false;
};

}  // namespace rlf
