#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss.hpp>

#include "errors.hpp"
#include "model.hpp"
#include "theory.hpp"

namespace rlf {

using cplx = std::complex<double>;

/// Monic cubic y^3 + a2 y^2 + a1 y + a0 in y = alpha_p lambda_bar nu_bar, with
/// its discriminant pieces (meaningful for real lambda_bar).
struct CubicCoeffs {
  double a0 = 0, a1 = 0, a2 = 0;
  double Q = 0, R = 0, D = 0;
};

inline CubicCoeffs cubic_coeffs(const ModelConfig& cfg, double lambda_bar) {
  const double f = cfg.alpha_f, p = cfg.alpha_p;
  CubicCoeffs c;
  c.a2 = 1.0 - p + f - p;
  c.a1 = (1.0 - p) * (f - p) + f * p * lambda_bar;
  c.a0 = -f * p * p * lambda_bar;
  c.Q = (c.a2 * c.a2 - 3.0 * c.a1) / 9.0;
  c.R = (9.0 * c.a2 * c.a1 - 27.0 * c.a0 - 2.0 * c.a2 * c.a2 * c.a2) / 54.0;
  c.D = c.R * c.R - c.Q * c.Q * c.Q;
  return c;
}

/// Discriminant D at lambda = -x; D > 0 exactly inside the bulk.
inline double discriminant_at(const ModelConfig& cfg, double x) { return cubic_coeffs(cfg, -x / cfg.s()).D; }

inline double f_zero(const ModelConfig& cfg) {
  return std::max({0.0, 1.0 - cfg.alpha_f / cfg.alpha_p, 1.0 - 1.0 / cfg.alpha_p});
}

namespace detail {

struct ComplexCubic {
  cplx a0, a1, a2;
  cplx operator()(cplx y) const { return ((y + a2) * y + a1) * y + a0; }
  cplx derivative(cplx y) const { return (3.0 * y + 2.0 * a2) * y + a1; }
  double term_scale(cplx y) const {
    const double r = std::abs(y);
    return r * r * r + std::abs(a2) * r * r + std::abs(a1) * r + std::abs(a0);
  }
};

inline ComplexCubic resolvent_cubic(const ModelConfig& cfg, cplx lambda_bar) {
  const double f = cfg.alpha_f, p = cfg.alpha_p;
  return {-f * p * p * lambda_bar, (1.0 - p) * (f - p) + f * p * lambda_bar, cplx(1.0 - p + f - p)};
}

/// All three roots: companion-matrix eigenvalues, then Newton polish.
inline std::array<cplx, 3> cubic_roots(const ComplexCubic& c) {
  Eigen::Matrix3cd comp = Eigen::Matrix3cd::Zero();
  comp(0, 0) = -c.a2;
  comp(0, 1) = -c.a1;
  comp(0, 2) = -c.a0;
  comp(1, 0) = 1.0;
  comp(2, 1) = 1.0;
  Eigen::ComplexEigenSolver<Eigen::Matrix3cd> es(comp, false);
  if (es.info() != Eigen::Success) throw EigenFailure("companion eigenproblem did not converge");
  std::array<cplx, 3> roots;
  for (int i = 0; i < 3; ++i) {
    cplx y = es.eigenvalues()[i];
    for (int it = 0; it < 4; ++it) {
      const cplx d = c.derivative(y);
      if (d == cplx(0.0)) break;
      const cplx next = y - c(y) / d;
      if (!(std::abs(c(next)) < std::abs(c(y)))) break;
      y = next;
    }
    roots[i] = y;
  }
  return roots;
}

}  // namespace detail

struct ResolventPoint {
  cplx nu_bar;           ///< sigma_w2 sigma_x2 nu
  cplx nu;               ///< normalized trace of the resolvent
  cplx nu_bulk;          ///< nu - f_zero / lambda, the part without the delta at zero
  double residual = 0;   ///< |cubic| / sum of |terms| at the returned root
  bool in_support = true;  ///< false when no root has Im nu < 0 beyond tolerance
};

/**
 * @brief nu_bar(lambda) at lambda = -x + i eps, eps in units of sigma_w2 sigma_x2.
 *
 * Inside the bulk the cubic has a complex-conjugate pair of roots and the
 * physical one is the root with the most negative Im nu. Off the support all
 * roots are real up to O(eps); the point is then flagged and the root nearest
 * `seed` (when given) is returned, so a sweep can follow one branch.
 */
inline ResolventPoint resolvent_nu(double x, double eps, const ModelConfig& cfg, std::optional<cplx> seed = {}) {
  if (!(eps > 0.0)) throw InvalidConfig("resolvent_nu needs eps > 0");
  const double s = cfg.s(), p = cfg.alpha_p;
  const cplx lambda_bar = cplx(-x, eps * s) / s;
  const detail::ComplexCubic cubic = detail::resolvent_cubic(cfg, lambda_bar);
  const auto roots = detail::cubic_roots(cubic);

  std::array<cplx, 3> nus;
  for (int i = 0; i < 3; ++i) nus[i] = roots[i] / (p * lambda_bar) / s;

  int best = 0;
  for (int i = 1; i < 3; ++i)
    if (nus[i].imag() < nus[best].imag()) best = i;
  // Im nu of an off-support root scales like eps; a bulk root is O(1). The
  // delta at zero is removed first so small x is judged on the bulk alone.
  const cplx lambda = lambda_bar * s;
  const double zero_weight = f_zero(cfg);
  const double support_tol = 1e3 * eps * (1.0 + std::abs(nus[best]));
  const bool in_support = -(nus[best] - zero_weight / lambda).imag() > support_tol;
  if (!in_support && seed) {
    for (int i = 0; i < 3; ++i)
      if (std::abs(nus[i] * s - *seed) < std::abs(nus[best] * s - *seed)) best = i;
  }
  if (nus[best].imag() > support_tol) throw NoAdmissibleRoot("no root with Im nu <= 0");

  ResolventPoint r;
  r.nu = nus[best];
  r.nu_bar = nus[best] * s;
  r.nu_bulk = nus[best] - zero_weight / lambda;
  r.residual = std::abs(cubic(roots[best])) / std::max(cubic.term_scale(roots[best]), 1e-300);
  r.in_support = in_support;
  return r;
}

inline constexpr std::array<double, 3> kEpsLadder = {1e-6, 1e-7, 1e-8};

struct DensityPoint {
  double rho = 0;          ///< eps -> 0 extrapolation
  double rho_eps7 = 0;     ///< value at eps = 1e-7
  double rho_eps8 = 0;     ///< value at eps = 1e-8
  double extrapolation_gap = 0;  ///< |extrapolation from (1e-6,1e-7) - from (1e-7,1e-8)|
  double max_residual = 0;
  bool in_support = false;
};

/// Bulk density -Im nu(-x + i eps)/pi with linear Richardson extrapolation in
/// eps. The delta at zero is subtracted exactly, so small x stays clean.
inline DensityPoint density_at(double x, const ModelConfig& cfg) {
  DensityPoint d;
  std::array<double, 3> rho{};
  // Below x = s the ladder shrinks with x: a hard edge at zero makes rho grow
  // like x^(-2/3), which a fixed eps would smear out.
  const double scale = std::min(1.0, x / cfg.s());
  for (std::size_t k = 0; k < kEpsLadder.size(); ++k) {
    const ResolventPoint r = resolvent_nu(x, kEpsLadder[k] * scale, cfg);
    rho[k] = std::max(0.0, -r.nu_bulk.imag() / std::numbers::pi);
    d.max_residual = std::max(d.max_residual, r.residual);
    d.in_support = d.in_support || r.in_support;
  }
  // rho(eps) = rho0 + c eps: extrapolate each adjacent pair to eps = 0.
  auto extrap = [&](int i, int j) {  // the common scale cancels
    return (kEpsLadder[i] * rho[j] - kEpsLadder[j] * rho[i]) / (kEpsLadder[i] - kEpsLadder[j]);
  };
  const double fine = extrap(1, 2), coarse = extrap(0, 1);
  d.rho = std::max(0.0, fine);
  d.rho_eps7 = rho[1];
  d.rho_eps8 = rho[2];
  d.extrapolation_gap = std::abs(fine - coarse);
  return d;
}

struct SupportEdges {
  double edge_min = 0, edge_max = 0;
};

/**
 * @brief Smallest and largest positive roots of D(x), the bulk edges.
 *
 * D(0) <= 0 (three real roots at lambda = 0, repeated only on a boundary) and
 * D -> -inf as x -> inf, so the bulk is the single interval where D > 0.
 */
inline SupportEdges support_edges(const ModelConfig& cfg) {
  cfg.validate();
  const double s = cfg.s(), f = cfg.alpha_f, p = cfg.alpha_p;
  auto D = [&](double x) { return discriminant_at(cfg, x); };

  auto bisect = [&](double lo, double hi) {
    const bool lo_neg = D(lo) <= 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      ((D(mid) <= 0.0) == lo_neg ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };

  // Largest eigenvalue of Z^T Z is O(s (1 + 1/sqrt(p))^2 (1 + sqrt(f))^2 / f); start above it.
  double x_hi = 4.0 * s * (1.0 + 1.0 / p) * (1.0 + 1.0 / f) * (1.0 + f);
  constexpr int kScan = 4096;
  for (int attempt = 0; attempt < 40; ++attempt, x_hi *= 4.0) {
    const double x_lo = 1e-14 * x_hi;
    std::vector<double> xs(kScan), ds(kScan);
    for (int i = 0; i < kScan; ++i) {
      xs[i] = x_lo * std::pow(x_hi / x_lo, static_cast<double>(i) / (kScan - 1));
      ds[i] = D(xs[i]);
    }
    if (ds.back() > 0.0) continue;  // bracket too small

    std::optional<double> lo_edge, hi_edge;
    if (ds.front() > 0.0) lo_edge = bisect(0.0, xs.front());
    for (int i = 1; i < kScan; ++i) {
      if (ds[i - 1] <= 0.0 && ds[i] > 0.0 && !lo_edge) lo_edge = bisect(xs[i - 1], xs[i]);
      if (ds[i - 1] > 0.0 && ds[i] <= 0.0) hi_edge = bisect(xs[i - 1], xs[i]);
    }
    if (!hi_edge) continue;
    SupportEdges e;
    e.edge_max = *hi_edge;
    e.edge_min = lo_edge.value_or(0.0);
    if (classify_regime(cfg).kind == RegimeKind::Boundary) e.edge_min = 0.0;
    return e;
  }
  throw NoEdgeFound("no sign change of the discriminant found");
}

namespace detail {

/// Map t in [0, pi] onto the bulk. A soft lower edge uses x = a + (b-a)(1 - cos t)/2,
/// which cancels square-root edges. A hard or nearly closed edge near zero can carry
/// rho ~ x^(-2/3), so there x = b ((1 - cos t)/2)^3 instead.
struct EdgeMap {
  double a, b;
  bool hard;
  double x(double t) const {
    const double u = 0.5 * (1.0 - std::cos(t));
    return hard ? b * u * u * u : a + (b - a) * u;
  }
  double jacobian(double t) const {
    const double u = 0.5 * (1.0 - std::cos(t)), du = 0.5 * std::sin(t);
    return hard ? 3.0 * b * u * u * du : (b - a) * du;
  }
  double t(double x) const {
    const double u = hard ? std::cbrt(std::max(x, 0.0) / b) : (x - a) / (b - a);
    return std::acos(std::clamp(1.0 - 2.0 * u, -1.0, 1.0));
  }
};

inline EdgeMap edge_map(const SupportEdges& e) { return {e.edge_min, e.edge_max, e.edge_min < 1e-4 * e.edge_max}; }

}  // namespace detail

/// Integrates g(x) rho(x) over the bulk in the edge-adapted variable of
/// detail::EdgeMap; the integrand vanishes at both ends of [0, pi].
template <class G>
double bulk_integral(const ModelConfig& cfg, const SupportEdges& e, G&& g, int n = 4000) {
  const detail::EdgeMap map = detail::edge_map(e);
  double acc = 0.0;
  for (int i = 1; i < n; ++i) {
    const double t = std::numbers::pi * i / n;
    const double x = map.x(t);
    if (x <= e.edge_min || x >= e.edge_max) continue;
    acc += g(x) * density_at(x, cfg).rho * map.jacobian(t);
  }
  return acc * std::numbers::pi / n;
}

/// Integral of rho over [a, b], Gauss-Legendre in the same variable as
/// bulk_integral so that an interval touching an edge stays smooth.
inline double bulk_mass_between(const ModelConfig& cfg, const SupportEdges& e, double a, double b) {
  const double lo = std::max(a, e.edge_min), hi = std::min(b, e.edge_max);
  if (!(hi > lo)) return 0.0;
  const detail::EdgeMap map = detail::edge_map(e);
  auto integrand = [&](double t) {
    const double x = map.x(t);
    if (x <= e.edge_min || x >= e.edge_max) return 0.0;
    return density_at(x, cfg).rho * map.jacobian(t);
  };
  return boost::math::quadrature::gauss<double, 20>::integrate(integrand, map.t(lo), map.t(hi));
}

struct SpectrumGrid {
  int points = 512;
  std::optional<double> x_max;  ///< defaults to 1.1 * edge_max
};

struct SpectrumResult {
  std::vector<double> xs;   ///< eigenvalue abscissae
  std::vector<double> rho;  ///< bulk density at xs (zero off the support)
  std::vector<bool> in_support;
  double edge_min = 0, edge_max = 0;
  double f_zero = 0;
  double bulk_mass = 0;     ///< integral of rho over the bulk
  double first_moment = 0;  ///< integral of x rho over the bulk
  double max_residual = 0;
};

/**
 * @brief Bulk density on a uniform grid over [0, x_max].
 *
 * Grid points outside [edge_min, edge_max] are labelled off-support and carry
 * rho = 0; inside, rho is the eps -> 0 extrapolation from density_at.
 */
inline SpectrumResult spectral_density(const ModelConfig& cfg, const SpectrumGrid& grid = {}) {
  if (grid.points < 2) throw InvalidConfig("spectrum grid needs at least 2 points");
  const SupportEdges e = support_edges(cfg);
  SpectrumResult r;
  r.edge_min = e.edge_min;
  r.edge_max = e.edge_max;
  r.f_zero = f_zero(cfg);
  const double x_max = grid.x_max.value_or(1.1 * e.edge_max);
  r.xs.resize(grid.points);
  r.rho.assign(grid.points, 0.0);
  r.in_support.assign(grid.points, false);
  for (int i = 0; i < grid.points; ++i) {
    const double x = x_max * i / (grid.points - 1);
    r.xs[i] = x;
    if (x <= e.edge_min || x >= e.edge_max) continue;
    const DensityPoint d = density_at(x, cfg);
    r.rho[i] = d.rho;
    r.in_support[i] = true;
    r.max_residual = std::max(r.max_residual, d.max_residual);
  }
  r.bulk_mass = bulk_integral(cfg, e, [](double) { return 1.0; });
  r.first_moment = bulk_integral(cfg, e, [](double x) { return x; });
  return r;
}

}  // namespace rlf
