// Independent reference values used by the tests.
#pragma once

#include <cmath>
#include <algorithm>
#include <limits>
#include <vector>

namespace oracle {

struct Errors {
  double train, test, bias2, variance;
};

/// Ridge-less train/test/bias/variance written directly from the three-branch
/// error formulas (not from the squared averages the library goes through).
inline Errors main_text_errors(double f, double p, double sb2, double sx2, double se2, double sdy2) {
  const double S = se2 + sdy2;
  const double B = sb2 * sx2;
  if (f < std::min(p, 1.0)) {
    return {S * (1 - f), S / (1 - f), sdy2, S * f / (1 - f)};
  }
  if (p < std::min(f, 1.0)) {
    return {B * (1 - p) * (f - p) / f + S * (1 - p),
            B * (f - p) / (f * (1 - p)) + S / (1 - p),
            B * (f - p) / f + sdy2,
            B * p * (f - p) / (f * (1 - p)) + S * p / (1 - p)};
  }
  return {0.0,
          B * p * (f - 1) / (f * (p - 1)) + S * (f * p - 1) / ((f - 1) * (p - 1)),
          B * p * (f - 1) * (f - 1) / (f * (f * p - 1)) + sdy2,
          B * p * (f - 1) * (f - 1 + p - 1) / (f * (p - 1) * (f * p - 1)) +
              S * (f - 1 + p - 1) / ((f - 1) * (p - 1))};
}

/// Root of the chi cubic in (lo, 1] by plain long-double bisection.
inline double chi_bisection(double f, double p, double lb) {
  auto P = [&](long double x) {
    return x * x * x + (f + p - 2.0L) * x * x + ((f - 1.0L) * (p - 1.0L) + f * p * lb) * x - f * p * lb;
  };
  long double lo = std::max({0.0, 1.0 - f, 1.0 - p}), hi = 1.0L;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    (P(mid) < 0 ? lo : hi) = mid;
  }
  return static_cast<double>(0.5L * (lo + hi));
}

inline std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return g;
}

}  // namespace oracle
