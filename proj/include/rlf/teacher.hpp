#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "errors.hpp"
#include "quadrature.hpp"

namespace rlf {

struct TeacherMoments {
  double mean_f = 0.0;   ///< E[f(h)], must vanish
  double mean_f2 = 0.0;  ///< <f^2>
  double mean_fp = 0.0;  ///< <f'>, via the Stein identity E[h f(h)]
  double delta_f = 0.0;  ///< (<f^2> - <f'>^2) / <f'>^2
  double agreement = 0.0;  ///< max deviation between order n and 2n rules
};

inline constexpr double kCenteringTol = 1e-8;
inline constexpr double kDegenerateTol = 1e-12;

/**
 * @brief Gaussian moments of a teacher nonlinearity.
 *
 * Uses E[f'(h)] = E[h f(h)] so f need not be differentiable. The rule of the
 * requested order is compared against one of twice the order; the larger rule
 * supplies the returned values and the gap is reported in `agreement`.
 */
template <class F>
TeacherMoments teacher_moments(F&& f, int quadrature_order = 128) {
  if (quadrature_order < 32) throw InvalidConfig("quadrature_order must be >= 32");

  auto moments = [&](const GaussHermiteRule& rule) {
    TeacherMoments m;
    m.mean_f = gaussian_expectation(rule, [&](double h) { return f(h); });
    m.mean_f2 = gaussian_expectation(rule, [&](double h) { const double v = f(h); return v * v; });
    m.mean_fp = gaussian_expectation(rule, [&](double h) { return h * f(h); });
    return m;
  };
  const TeacherMoments lo = moments(gauss_hermite_rule(quadrature_order));
  TeacherMoments hi = moments(gauss_hermite_rule(2 * quadrature_order));
  hi.agreement = std::max({std::abs(hi.mean_f - lo.mean_f), std::abs(hi.mean_f2 - lo.mean_f2),
                           std::abs(hi.mean_fp - lo.mean_fp)});

  // A kinked f converges slowly under Gauss-Hermite; judge centering against the
  // rule's own resolution as measured by the order-doubling gap.
  const double centering_tol = std::max(kCenteringTol * std::max(1.0, std::sqrt(hi.mean_f2)), 10.0 * hi.agreement);
  if (std::abs(hi.mean_f) > centering_tol)
    throw NotCentered("teacher has nonzero Gaussian mean " + std::to_string(hi.mean_f));
  if (std::abs(hi.mean_fp) < kDegenerateTol)
    throw DegenerateTeacher("teacher has <f'> = 0; labels carry no linear signal");
  hi.delta_f = std::max(0.0, (hi.mean_f2 - hi.mean_fp * hi.mean_fp) / (hi.mean_fp * hi.mean_fp));
  return hi;
}

enum class TeacherKind { Linear, ReLU, Tanh, Custom };

/// Teacher nonlinearity f with cached Gaussian moments.
struct TeacherActivation {
  TeacherKind kind = TeacherKind::Linear;
  std::function<double(double)> f = [](double h) { return h; };
  double mean_f2 = 1.0;
  double mean_fp = 1.0;

  double operator()(double h) const { return f(h); }

  double delta_f() const {
    if (kind == TeacherKind::Linear) return 0.0;
    return std::max(0.0, (mean_f2 - mean_fp * mean_fp) / (mean_fp * mean_fp));
  }

  static TeacherActivation linear() { return {}; }

  /// Centered ReLU, max(0,h) - 1/sqrt(2pi). Moments are exact Gaussian integrals.
  static TeacherActivation relu() {
    const double shift = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    TeacherActivation t;
    t.kind = TeacherKind::ReLU;
    t.f = [shift](double h) { return std::max(0.0, h) - shift; };
    t.mean_f2 = 0.5 - 1.0 / (2.0 * std::numbers::pi);
    t.mean_fp = 0.5;
    return t;
  }

  static TeacherActivation tanh() {
    return custom([](double h) { return std::tanh(h); }, 128, TeacherKind::Tanh);
  }

  static TeacherActivation custom(std::function<double(double)> fn, int order = 128,
                                  TeacherKind kind = TeacherKind::Custom) {
    const TeacherMoments m = teacher_moments(fn, order);
    TeacherActivation t;
    t.kind = kind;
    t.f = std::move(fn);
    t.mean_f2 = m.mean_f2;
    t.mean_fp = m.mean_fp;
    return t;
  }
};

inline std::string to_string(TeacherKind k) {
  switch (k) {
    case TeacherKind::Linear: return "linear";
    case TeacherKind::ReLU: return "relu";
    case TeacherKind::Tanh: return "tanh";
    case TeacherKind::Custom: return "custom";
  }
  return "custom";
}

}  // namespace rlf
