#include <gtest/gtest.h>

#include <cmath>

#include "rlf/spectrum.hpp"

namespace {

rlf::ModelConfig make(double f, double p, double sx2 = 1.0, double sw2 = 1.0) {
  rlf::ModelConfig c;
  c.alpha_f = f;
  c.alpha_p = p;
  c.sigma_x2 = sx2;
  c.sigma_w2 = sw2;
  return c;
}

const std::vector<std::pair<double, double>> kPoints = {
    {4.0, 2.0}, {0.5, 2.0}, {2.0, 0.5}, {0.25, 0.125}, {0.25, 8.0}, {4.0, 8.0}, {4.0, 0.125}, {1.5, 3.0}};

}  // namespace

TEST(Spectrum, FZeroExamples) {
  EXPECT_DOUBLE_EQ(rlf::f_zero(make(0.5, 2.0)), 0.75);
  EXPECT_DOUBLE_EQ(rlf::f_zero(make(2.0, 0.5)), 0.0);
  EXPECT_DOUBLE_EQ(rlf::f_zero(make(4.0, 8.0)), 7.0 / 8.0);
}

TEST(Spectrum, CubicCoeffsDiscriminant) {
  const auto c = rlf::cubic_coeffs(make(4.0, 2.0), -0.3);
  EXPECT_DOUBLE_EQ(c.Q, (c.a2 * c.a2 - 3 * c.a1) / 9);
  EXPECT_DOUBLE_EQ(c.R, (9 * c.a2 * c.a1 - 27 * c.a0 - 2 * c.a2 * c.a2 * c.a2) / 54);
  EXPECT_DOUBLE_EQ(c.D, c.R * c.R - c.Q * c.Q * c.Q);
  for (auto [f, p] : kPoints) EXPECT_LT(rlf::discriminant_at(make(f, p), 0.0), 0.0);
  EXPECT_NEAR(rlf::discriminant_at(make(4.0, 1.0), 0.0), 0.0, 1e-15);
  EXPECT_NEAR(rlf::discriminant_at(make(0.5, 0.5), 0.0), 0.0, 1e-15);
}

TEST(Spectrum, ResolventResidualsAndOffSupportDecay) {
  for (auto [f, p] : kPoints) {
    const auto cfg = make(f, p, 1.3, 0.8);
    const auto e = rlf::support_edges(cfg);
    for (int i = 0; i <= 200; ++i) {
      const double x = 1.2 * e.edge_max * i / 200.0;
      for (double eps : rlf::kEpsLadder) EXPECT_LT(rlf::resolvent_nu(x, eps, cfg).residual, 1e-10);
    }
    const auto far = rlf::resolvent_nu(100.0 * e.edge_max, 1e-8, cfg);
    EXPECT_FALSE(far.in_support);
    EXPECT_LT(std::abs(far.nu.imag()), 1e-9);
    const auto mid = rlf::resolvent_nu(0.5 * (e.edge_min + e.edge_max), 1e-8, cfg);
    EXPECT_TRUE(mid.in_support);
    EXPECT_LT(mid.nu.imag(), 0.0);
  }
}

TEST(Spectrum, FarFieldBranchIsOneOverLambda) {
  // Tracking from large x: nu(-x) ~ -1/x (1 + m1/x), m1 the mean eigenvalue.
  const auto cfg = make(4.0, 2.0);
  const double x = 1e4;
  const auto r = rlf::resolvent_nu(x, 1e-8, cfg, std::complex<double>(-1.0 / x, 0.0));
  EXPECT_NEAR(r.nu.real(), -1.0 / x * (1.0 + 0.5 / x), 1e-12);
}

TEST(Spectrum, NormalizationAndMoments) {
  for (auto [f, p] : kPoints) {
    const auto cfg = make(f, p, 1.3, 0.8);
    const double s = cfg.s();
    const auto r = rlf::spectral_density(cfg, {256, {}});
    EXPECT_NEAR(r.bulk_mass + r.f_zero, 1.0, 1e-3) << f << ' ' << p;
    EXPECT_NEAR(r.first_moment, s / p, 1e-3 * s / p) << f << ' ' << p;
    // Free-probability oracle for the second moment of Z^T Z.
    const auto e = rlf::support_edges(cfg);
    const double m2 = rlf::bulk_integral(cfg, e, [](double x) { return x * x; });
    EXPECT_NEAR(m2, s * s * (1.0 + 1.0 / f + 1.0 / p) / p, 2e-3 * m2) << f << ' ' << p;
    EXPECT_LT(r.max_residual, 1e-10);
  }
}

TEST(Spectrum, DensityNonNegativeAndVanishesOffSupport) {
  for (auto [f, p] : kPoints) {
    const auto cfg = make(f, p);
    const auto e = rlf::support_edges(cfg);
    for (int i = 0; i <= 400; ++i) {
      const double x = 1.3 * e.edge_max * i / 400.0 + 1e-9;
      const auto d = rlf::density_at(x, cfg);
      EXPECT_GE(d.rho, 0.0);
      if (x < 0.99 * e.edge_min || x > 1.01 * e.edge_max) EXPECT_LT(d.rho, 1e-6) << f << ' ' << p << ' ' << x;
    }
  }
}

TEST(Spectrum, EpsLadderStableAwayFromEdges) {
  for (auto [f, p] : kPoints) {
    const auto cfg = make(f, p);
    const auto e = rlf::support_edges(cfg);
    const double w = e.edge_max - e.edge_min;
    double sup = 0.0;
    for (int i = 0; i <= 200; ++i) {
      const double x = e.edge_min + w * (0.02 + 0.96 * i / 200.0);
      const auto d = rlf::density_at(x, cfg);
      sup = std::max(sup, std::abs(d.rho_eps7 - d.rho_eps8));
    }
    EXPECT_LT(sup, 1e-4) << f << ' ' << p;
  }
}

TEST(Spectrum, EdgesAtBoundaries) {
  EXPECT_EQ(rlf::support_edges(make(0.5, 0.5)).edge_min, 0.0);
  EXPECT_EQ(rlf::support_edges(make(4.0, 1.0)).edge_min, 0.0);
  EXPECT_GT(rlf::support_edges(make(4.0, 2.0)).edge_min, 0.0);
  // gap closes monotonically from both sides of alpha_p = 1
  for (double sign : {-1.0, 1.0}) {
    double prev = rlf::support_edges(make(4.0, 1.0 + sign * 0.4)).edge_min;
    for (double d : {0.2, 0.1, 0.05, 0.02, 0.01}) {
      const double cur = rlf::support_edges(make(4.0, 1.0 + sign * d)).edge_min;
      EXPECT_LT(cur, prev);
      EXPECT_GT(cur, 0.0);
      prev = cur;
    }
    EXPECT_LT(prev, 1e-3);
  }
}

TEST(Spectrum, DensityGridLabelsSupport) {
  const auto r = rlf::spectral_density(make(4.0, 2.0), {101, {}});
  ASSERT_EQ(r.xs.size(), 101u);
  EXPECT_EQ(r.xs.front(), 0.0);
  EXPECT_NEAR(r.xs.back(), 1.1 * r.edge_max, 1e-12);
  for (std::size_t i = 0; i < r.xs.size(); ++i) {
    const bool inside = r.xs[i] > r.edge_min && r.xs[i] < r.edge_max;
    EXPECT_EQ(static_cast<bool>(r.in_support[i]), inside);
    if (!inside) EXPECT_EQ(r.rho[i], 0.0);
  }
}
