#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "model.hpp"
#include "quantity.hpp"

namespace rlf {

// ============================================================================
// Regimes
// ============================================================================

enum class RegimeKind { NfSmallest, NpSmallest, MSmallest, Boundary };

enum class BoundaryKind {
  None,
  AlphaPOne,    ///< alpha_p = 1 with alpha_f >= 1 (interpolation threshold)
  AlphaFOne,    ///< alpha_f = 1 with alpha_p >= 1
  Diagonal,     ///< alpha_f = alpha_p <= 1
  TriplePoint,  ///< alpha_f = alpha_p = 1
};

struct Regime {
  RegimeKind kind = RegimeKind::MSmallest;
  BoundaryKind boundary = BoundaryKind::None;
  friend bool operator==(const Regime&, const Regime&) = default;
};

inline constexpr double kBoundaryTol = 1e-9;

inline Regime classify_regime(double alpha_f, double alpha_p, double tol = kBoundaryTol) {
  const double lo = std::min({alpha_f, alpha_p, 1.0});
  const bool f = alpha_f - lo < tol;
  const bool p = alpha_p - lo < tol;
  const bool one = 1.0 - lo < tol;
  if (f && p && one) return {RegimeKind::Boundary, BoundaryKind::TriplePoint};
  if (p && one) return {RegimeKind::Boundary, BoundaryKind::AlphaPOne};
  if (f && one) return {RegimeKind::Boundary, BoundaryKind::AlphaFOne};
  if (f && p) return {RegimeKind::Boundary, BoundaryKind::Diagonal};
  if (f) return {RegimeKind::NfSmallest, BoundaryKind::None};
  if (p) return {RegimeKind::NpSmallest, BoundaryKind::None};
  return {RegimeKind::MSmallest, BoundaryKind::None};
}

inline Regime classify_regime(const ModelConfig& cfg, double tol = kBoundaryTol) {
  return classify_regime(cfg.alpha_f, cfg.alpha_p, tol);
}

inline std::string to_string(Regime r) {
  switch (r.kind) {
    case RegimeKind::NfSmallest: return "NfSmallest";
    case RegimeKind::NpSmallest: return "NpSmallest";
    case RegimeKind::MSmallest: return "MSmallest";
    case RegimeKind::Boundary: break;
  }
  switch (r.boundary) {
    case BoundaryKind::AlphaPOne: return "Boundary(alpha_p=1)";
    case BoundaryKind::AlphaFOne: return "Boundary(alpha_f=1)";
    case BoundaryKind::Diagonal: return "Boundary(alpha_f=alpha_p)";
    case BoundaryKind::TriplePoint: return "Boundary(alpha_f=alpha_p=1)";
    case BoundaryKind::None: break;
  }
  return "Boundary";
}

// ============================================================================
// Result types
// ============================================================================

/// c0 + c1 * lambda_bar
struct TaylorPair {
  Quantity c0, c1;
};

/// c_minus1 / lambda_bar + c0
struct LaurentPair {
  Quantity c_minus1, c0;
};

/// Small-lambda_bar expansions of the five susceptibilities.
struct RidgelessSusceptibilities {
  TaylorPair chi, kappa, omega;
  LaurentPair nu, phi;
};

/// Susceptibilities at a fixed lambda_bar > 0.
struct Susceptibilities {
  double chi = 0, nu = 0, kappa = 0, omega = 0, phi = 0;
};

struct SquaredAverages {
  double w2 = 0, u2 = 0, dy2 = 0, dbeta2 = 0;
};

struct Covariances {
  double cov_w = 0, cov_u = 0, cov_dbeta = 0;
};

/**
 * @brief Ridge-less closed forms.
 *
 * Errors are in label-variance units. The *_l2 fields hold the coefficient of
 * lambda_bar^2 and are present only for quantities whose leading term is zero
 * in the current branch.
 */
struct TheoryResult {
  Regime regime;
  Quantity train_error, test_error, bias2, variance;
  Quantity w2, u2, dy2, dbeta2;
  Quantity cov_w, cov_u, cov_dbeta;
  std::optional<Quantity> u2_l2, dy2_l2, cov_u_l2, cov_dbeta_l2;
  std::optional<Quantity> train_error_l2, bias2_l2;
  Quantity sigma_dy2;
  RidgelessSusceptibilities susceptibilities;
};

struct FiniteLambdaResult {
  double train_error = 0, test_error = 0, bias2 = 0, variance = 0;
  double sigma_dy2 = 0;
  Susceptibilities susceptibilities;
  SquaredAverages squared;
  Covariances covariances;
};

inline double sigma_dy2(const ModelConfig& cfg) {
  return cfg.sigma_beta2 * cfg.sigma_x2 * cfg.teacher.delta_f();
}

// ============================================================================
// Ridge-less branches
// ============================================================================

namespace detail {

struct BranchValues {
  Quantity w2, u2, dy2, dbeta2, cov_w, cov_u, cov_dbeta;
  std::optional<Quantity> u2_l2, dy2_l2, cov_u_l2, cov_dbeta_l2;
  RidgelessSusceptibilities sus;
};

inline BranchValues evaluate_branch(RegimeKind kind, double alpha_f, double alpha_p, const ModelConfig& cfg) {
  const Quantity f = alpha_f, p = alpha_p;
  const Quantity B = cfg.sigma_beta2, X = cfg.sigma_x2, W = cfg.sigma_w2;
  const Quantity s = X * W;
  const Quantity S = cfg.sigma_eps2 + sigma_dy2(cfg);  // effective noise
  const Quantity one = 1.0;
  auto cube = [](Quantity a) { return a * a * a; };

  BranchValues v;
  Quantity chi0, chi1, nu_m1, nu0;
  switch (kind) {
    case RegimeKind::NfSmallest: {
      v.w2 = B / W * f / (p - f) + S / s * f * f / ((one - f) * (p - f));
      v.u2 = 0.0;
      v.u2_l2 = B * X * X * cube(p) / cube(p - f) + X * S * f * cube(p) / ((one - f) * cube(p - f));
      v.dy2 = S * (one - f);
      v.dbeta2 = S / X * f / (one - f);
      v.cov_w = B / W * f / (p - f);
      v.cov_u = 0.0;
      v.cov_u_l2 = B * X * X * cube(p) / cube(p - f);
      v.cov_dbeta = 0.0;
      v.cov_dbeta_l2 = B * f * f * cube(p) / ((one - f) * (one - f) * cube(p - f));
      chi0 = one - f;
      chi1 = f * f * p / ((one - f) * (p - f));
      nu_m1 = (p - f) / p;
      nu0 = f * f / ((one - f) * (p - f)) / s;
      break;
    }
    case RegimeKind::NpSmallest: {
      v.w2 = B / W * p * (one - p + f - p) / ((one - p) * (f - p)) + S / s * f * p / ((one - p) * (f - p));
      v.u2 = B * X * X * (one - p) * (f - p) * (one - p + f - p) / cube(f) + X * S * (one - p) * (f - p) / (f * f);
      v.dy2 = B * X * (one - p) * (f - p) / f + S * (one - p);
      v.dbeta2 = B * (f - p) / (f * (one - p)) + S / X * p / (one - p);
      v.cov_w = B / W * p / (f - p);
      v.cov_u = B * X * X * (one - p) * (one - p) * (f - p) / cube(f);
      v.cov_dbeta = B * (f - p) / f;
      chi0 = one - p;
      chi1 = f * p * p / ((one - p) * (f - p));
      nu_m1 = 0.0;
      nu0 = f * p / ((one - p) * (f - p)) / s;
      break;
    }
    case RegimeKind::MSmallest:
    case RegimeKind::Boundary: {
      v.w2 = B / W / (p - one) + S / s * f / ((f - one) * (p - one));
      v.u2 = 0.0;
      v.u2_l2 = B * X * X * cube(p) / (f * cube(p - one)) + X * S * cube(p) / ((f - one) * cube(p - one));
      v.dy2 = 0.0;
      v.dy2_l2 = B * X * f * cube(p) / ((f - one) * cube(p - one)) +
                 S * f * f * p * p * (f * p - one) / (cube(f - one) * cube(p - one));
      v.dbeta2 = B * p * (f - one) / (f * (p - one)) + S / X * (f - one + p - one) / ((f - one) * (p - one));
      v.cov_w = B / W / (f * p - one);
      v.cov_u = 0.0;
      v.cov_u_l2 = B * X * X * cube(p) / (f * (p - one) * (p - one) * (f * p - one));
      v.cov_dbeta = B * p * (f - one) * (f - one) / (f * (f * p - one));
      chi0 = 0.0;
      chi1 = f * p / ((f - one) * (p - one));
      nu_m1 = (p - one) / p;
      nu0 = f / ((f - one) * (p - one)) / s;
      break;
    }
  }

  // kappa = (chi + alpha_f - 1) / alpha_f, omega = sigma_x2 chi kappa / alpha_f,
  // phi = -sigma_w2 nu kappa; nu_m1 is converted to the lambda_bar convention.
  const Quantity kappa0 = (chi0 + f - one) / f;
  const Quantity kappa1 = chi1 / f;
  const Quantity c_m1 = nu_m1 / s;
  v.sus.chi = {chi0, chi1};
  v.sus.kappa = {kappa0, kappa1};
  v.sus.omega = {X * chi0 * kappa0 / f, X * (chi0 * kappa1 + chi1 * kappa0) / f};
  v.sus.nu = {c_m1, nu0};
  v.sus.phi = {-W * c_m1 * kappa0, -W * (c_m1 * kappa1 + nu0 * kappa0)};
  return v;
}

// The branch formulas are exact in the interior, so kappa0 for the Nf branch is
// identically zero but (chi0 + f - 1) can round; pin it.
inline void pin_branch_zeros(RegimeKind kind, BranchValues& v) {
  if (kind == RegimeKind::NfSmallest && v.sus.kappa.c0.is_finite()) {
    v.sus.kappa.c0 = 0.0;
    v.sus.omega.c0 = 0.0;
    v.sus.phi.c_minus1 = 0.0;
  }
}

}  // namespace detail

/**
 * @brief Ridge-less (lambda -> 0) closed forms for every TheoryResult field.
 *
 * On a boundary the ratios are snapped onto it and the formulas of one adjacent
 * branch are evaluated there; poles show up as Divergent. lambda_bar^2
 * coefficients on a boundary come from whichever adjacent branch carries one.
 */
inline TheoryResult closed_form(const ModelConfig& cfg) {
  cfg.validate();
  const Regime regime = classify_regime(cfg);
  double f = cfg.alpha_f, p = cfg.alpha_p;

  RegimeKind lead = regime.kind;
  std::vector<RegimeKind> adjacent;
  switch (regime.boundary) {
    case BoundaryKind::None: break;
    case BoundaryKind::AlphaPOne:
      p = 1.0;
      lead = RegimeKind::NpSmallest;
      adjacent = {RegimeKind::NpSmallest, RegimeKind::MSmallest};
      break;
    case BoundaryKind::AlphaFOne:
      f = 1.0;
      lead = RegimeKind::NfSmallest;
      adjacent = {RegimeKind::NfSmallest, RegimeKind::MSmallest};
      break;
    case BoundaryKind::Diagonal:
      p = f;
      lead = RegimeKind::NpSmallest;
      adjacent = {RegimeKind::NfSmallest, RegimeKind::NpSmallest};
      break;
    case BoundaryKind::TriplePoint:
      f = p = 1.0;
      lead = RegimeKind::NpSmallest;
      adjacent = {RegimeKind::NfSmallest, RegimeKind::NpSmallest, RegimeKind::MSmallest};
      break;
  }

  detail::BranchValues v = detail::evaluate_branch(lead, f, p, cfg);
  detail::pin_branch_zeros(lead, v);

  if (regime.kind == RegimeKind::Boundary) {
    using V = detail::BranchValues;
    const std::array<std::pair<std::optional<Quantity> V::*, Quantity V::*>, 4> fields = {{
        {&V::u2_l2, &V::u2},
        {&V::dy2_l2, &V::dy2},
        {&V::cov_u_l2, &V::cov_u},
        {&V::cov_dbeta_l2, &V::cov_dbeta},
    }};
    for (const auto& [l2, leading] : fields) {
      v.*l2 = std::nullopt;
      if (!(v.*leading == Quantity(0.0))) continue;
      for (RegimeKind k : adjacent) {
        const V other = detail::evaluate_branch(k, f, p, cfg);
        if (other.*l2) {
          v.*l2 = other.*l2;
          break;
        }
      }
    }
  }

  TheoryResult r;
  r.regime = regime;
  r.sigma_dy2 = sigma_dy2(cfg);
  const Quantity X = cfg.sigma_x2;
  r.w2 = v.w2;
  r.u2 = v.u2;
  r.dy2 = v.dy2;
  r.dbeta2 = v.dbeta2;
  r.cov_w = v.cov_w;
  r.cov_u = v.cov_u;
  r.cov_dbeta = v.cov_dbeta;
  r.u2_l2 = v.u2_l2;
  r.dy2_l2 = v.dy2_l2;
  r.cov_u_l2 = v.cov_u_l2;
  r.cov_dbeta_l2 = v.cov_dbeta_l2;
  r.susceptibilities = v.sus;

  r.train_error = r.dy2;
  r.test_error = X * r.dbeta2 + r.sigma_dy2 + cfg.sigma_eps2;
  r.bias2 = X * r.cov_dbeta + r.sigma_dy2;
  r.variance = X * (r.dbeta2 - r.cov_dbeta);
  if (r.dy2_l2) r.train_error_l2 = r.dy2_l2;
  if (r.cov_dbeta_l2) r.bias2_l2 = X * *r.cov_dbeta_l2;
  return r;
}

/// The four errors at small finite lambda: ridge-less values plus
/// lambda_bar^2 times the reported coefficient wherever one is reported
/// (train error in the interpolating regime, bias with a zero ridge-less
/// covariance). Divergent coefficients are left out.
struct ErrorValues {
  Quantity train, test, bias2, variance;
};

inline ErrorValues errors_at_lambda(const TheoryResult& r, double lambda_bar) {
  auto complete = [&](Quantity lead, const std::optional<Quantity>& l2) {
    if (lead.is_divergent() || !l2 || l2->is_divergent()) return lead;
    return lead + Quantity(lambda_bar * lambda_bar) * *l2;
  };
  return {complete(r.train_error, r.train_error_l2), r.test_error, complete(r.bias2, r.bias2_l2), r.variance};
}

struct RidgelessCovariances {
  Quantity cov_w, cov_u, cov_dbeta;
  Quantity cov_dy = 0.0;  ///< <dy_1 dy_2>, identically zero
  std::optional<Quantity> cov_u_l2, cov_dbeta_l2;
};

inline RidgelessCovariances covariances_ridgeless(const ModelConfig& cfg) {
  const TheoryResult r = closed_form(cfg);
  return {r.cov_w, r.cov_u, r.cov_dbeta, 0.0, r.cov_u_l2, r.cov_dbeta_l2};
}

/// nu ~ nu_minus1 / lambda + nu_0 (physical lambda, not lambda_bar).
struct NuCoefficients {
  Quantity nu_minus1, nu_0;
};

inline NuCoefficients nu_coefficients(const ModelConfig& cfg) {
  cfg.validate();
  const double f = cfg.alpha_f, p = cfg.alpha_p;
  const double nu_m1 = std::max({0.0, 1.0 - f / p, 1.0 - 1.0 / p});
  if (classify_regime(cfg).kind == RegimeKind::Boundary) return {nu_m1, Quantity::divergent()};
  return {nu_m1, closed_form(cfg).susceptibilities.nu.c0};
}

// ============================================================================
// Finite lambda
// ============================================================================

/// Physical root of the chi cubic together with the shifted factors, which
/// are needed to full relative precision when chi sits near a zero factor.
struct ChiRoot {
  double chi = 0;    ///< chi
  double chi_f = 0;  ///< chi + alpha_f - 1
  double chi_p = 0;  ///< chi + alpha_p - 1
  double residual = 0;
};

/**
 * @brief Solve chi (chi + alpha_f - 1)(chi + alpha_p - 1) = alpha_f alpha_p lambda_bar (1 - chi).
 *
 * Works in t = chi - chi0 with chi0 = max(0, 1 - alpha_f, 1 - alpha_p), the
 * lambda_bar -> 0 root. The polynomial is negative at t = 0, equals
 * alpha_f alpha_p at chi = 1 and is increasing in between, so a safeguarded
 * Newton iteration on that bracket finds the unique physical root.
 */
inline ChiRoot chi_root(double alpha_f, double alpha_p, double lambda_bar) {
  if (!(lambda_bar > 0.0) || !std::isfinite(lambda_bar))
    throw NoPhysicalRoot("chi cubic needs a finite lambda_bar > 0");
  const double f = alpha_f, p = alpha_p;
  const double c = f * p * lambda_bar;

  // Offsets of the three factors at chi0; the one that selects chi0 is exactly 0.
  double d0, df, dp, headroom;
  if (1.0 - f >= 1.0 - p && 1.0 - f > 0.0) {
    d0 = 1.0 - f, df = 0.0, dp = p - f, headroom = f;
  } else if (1.0 - p > 0.0) {
    d0 = 1.0 - p, df = f - p, dp = 0.0, headroom = p;
  } else {
    d0 = 0.0, df = f - 1.0, dp = p - 1.0, headroom = 1.0;
  }

  auto g = [&](double t, double& dg) {
    const double a = d0 + t, b = df + t, e = dp + t;
    dg = b * e + a * e + a * b + c;
    return a * b * e - c * (headroom - t);
  };

  double lo = 0.0, hi = headroom;
  double dg = 0.0;
  // Linear estimate t ~ c * headroom / (d0 df + d0 dp + df dp) when that is positive.
  const double slope0 = d0 * df + d0 * dp + df * dp;
  double t = slope0 > 0 ? std::min(c * headroom / slope0, 0.5 * hi) : 0.5 * hi;
  if (!(t > lo && t < hi)) t = 0.5 * hi;
  for (int it = 0; it < 400; ++it) {
    const double gt = g(t, dg);
    if (gt == 0.0) {
      lo = hi = t;
      break;
    }
    (gt < 0 ? lo : hi) = t;
    double next = t - gt / dg;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - t);
    t = next;
    if (step <= 4e-16 * t || hi - lo <= 4e-16 * hi) break;
  }
  if (!(t > 0.0) || !(t <= headroom) || !std::isfinite(t))
    throw NoPhysicalRoot("no root of the chi cubic in (chi0, 1]");

  ChiRoot r;
  r.chi = d0 + t;
  r.chi_f = df + t;
  r.chi_p = dp + t;
  const double chi = r.chi;
  r.residual = chi * chi * chi + (f + p - 2.0) * chi * chi + ((f - 1.0) * (p - 1.0) + c) * chi - c;
  return r;
}

inline double chi_finite_lambda(const ModelConfig& cfg) {
  cfg.validate();
  return chi_root(cfg.alpha_f, cfg.alpha_p, cfg.lambda_bar()).chi;
}

inline Susceptibilities susceptibilities_finite_lambda(const ModelConfig& cfg) {
  cfg.validate();
  const ChiRoot root = chi_root(cfg.alpha_f, cfg.alpha_p, cfg.lambda_bar());
  Susceptibilities sus;
  sus.chi = root.chi;
  sus.kappa = root.chi_f / cfg.alpha_f;
  sus.nu = 1.0 / (cfg.lambda + cfg.s() * sus.chi * sus.kappa / cfg.alpha_p);
  sus.omega = cfg.sigma_x2 * sus.chi * sus.kappa / cfg.alpha_f;
  sus.phi = -cfg.sigma_w2 * sus.nu * sus.kappa;
  return sus;
}

/**
 * @brief Solve the 4x4 system for (w2, u2, dy2, dbeta2).
 *
 *   w2     = a u2                      a  = sigma_w2 (alpha_f/alpha_p) nu^2
 *   u2     = b1 w2 + b2 dy2 + r2       b1 = sigma_w2 omega^2, b2 = sigma_x2 kappa^2 / alpha_f
 *   dy2    = c dbeta2 + r3             c  = sigma_x2 chi^2
 *   dbeta2 = d1 w2 + d2 dy2 + r4       d1 = sigma_w2 kappa^2, d2 = sigma_x2 phi^2 / alpha_f
 *
 * The coefficients span many decades as lambda_bar -> 0 (nu ~ 1/lambda_bar), which
 * defeats pivoting LU. Eliminating w2 and dy2 leaves a 2x2 system in (u2, dbeta2)
 * whose Cramer numerators are sums of non-negative terms, so only the
 * determinant can lose digits, and that only near a phase boundary.
 */
inline SquaredAverages squared_averages_finite_lambda(const ModelConfig& cfg, const Susceptibilities& sus) {
  const double f = cfg.alpha_f, p = cfg.alpha_p;
  const double X = cfg.sigma_x2, W = cfg.sigma_w2, B = cfg.sigma_beta2;
  const double noise = cfg.sigma_eps2 + sigma_dy2(cfg);

  const double a = W * (f / p) * sus.nu * sus.nu;
  const double b1 = W * sus.omega * sus.omega, b2 = X * sus.kappa * sus.kappa / f;
  const double c = X * sus.chi * sus.chi;
  const double d1 = W * sus.kappa * sus.kappa, d2 = X * sus.phi * sus.phi / f;
  const double r2 = B * sus.omega * sus.omega, r3 = noise * sus.chi * sus.chi, r4 = B * sus.kappa * sus.kappa;

  //  (1 - a b1) u2 -       b2 c dbeta2 = b2 r3 + r2
  //     - d1 a  u2 + (1 - d2 c) dbeta2 = d2 r3 + r4
  const double m11 = 1.0 - a * b1, m12 = b2 * c, m21 = d1 * a, m22 = 1.0 - d2 * c;
  const double g1 = b2 * r3 + r2, g2 = d2 * r3 + r4;
  const double det = m11 * m22 - m12 * m21;
  const double scale = std::abs(m11 * m22) + std::abs(m12 * m21);
  if (!(std::abs(det) > 1e-13 * scale) || !std::isfinite(det))
    throw SingularSystem("squared-average system is singular");

  SquaredAverages q;
  q.u2 = (g1 * m22 + m12 * g2) / det;
  q.dbeta2 = (m11 * g2 + m21 * g1) / det;
  q.w2 = a * q.u2;
  q.dy2 = c * q.dbeta2 + r3;
  if (!std::isfinite(q.w2) || !std::isfinite(q.u2) || !std::isfinite(q.dy2) || !std::isfinite(q.dbeta2))
    throw SingularSystem("squared-average system produced non-finite values");
  return q;
}

inline SquaredAverages squared_averages_finite_lambda(const ModelConfig& cfg) {
  return squared_averages_finite_lambda(cfg, susceptibilities_finite_lambda(cfg));
}

/// <w1 w2>, <u1 u2>, <dbeta1 dbeta2> at finite lambda; <dy1 dy2> = 0.
inline Covariances covariances_finite_lambda(const ModelConfig& cfg, const Susceptibilities& sus) {
  const double f = cfg.alpha_f, p = cfg.alpha_p, W = cfg.sigma_w2, B = cfg.sigma_beta2;
  // cov_w = a cov_u, cov_u = omega^2 (B + W cov_w)
  const double a = sus.nu * sus.nu * W * f / p;
  const double denom = 1.0 - sus.omega * sus.omega * W * a;
  if (denom == 0.0 || !std::isfinite(denom)) throw SingularSystem("covariance system is singular");
  Covariances c;
  c.cov_u = sus.omega * sus.omega * B / denom;
  c.cov_w = a * c.cov_u;
  c.cov_dbeta = sus.kappa * sus.kappa * (B + W * c.cov_w);
  return c;
}

inline Covariances covariances_finite_lambda(const ModelConfig& cfg) {
  return covariances_finite_lambda(cfg, susceptibilities_finite_lambda(cfg));
}

inline FiniteLambdaResult finite_lambda(const ModelConfig& cfg) {
  FiniteLambdaResult r;
  r.susceptibilities = susceptibilities_finite_lambda(cfg);
  r.squared = squared_averages_finite_lambda(cfg, r.susceptibilities);
  r.covariances = covariances_finite_lambda(cfg, r.susceptibilities);
  r.sigma_dy2 = sigma_dy2(cfg);
  const double X = cfg.sigma_x2;
  r.train_error = r.squared.dy2;
  r.test_error = X * r.squared.dbeta2 + r.sigma_dy2 + cfg.sigma_eps2;
  r.bias2 = X * r.covariances.cov_dbeta + r.sigma_dy2;
  r.variance = X * (r.squared.dbeta2 - r.covariances.cov_dbeta);
  return r;
}

}  // namespace rlf
