#include <gtest/gtest.h>

#include <cmath>

#include "snlp/scale.hpp"

using namespace snlp;

namespace {

// Brownian oracle: W = (2/sigma^2) e^{-mu x / sigma^2} sinh(delta x) / delta
double bm_W(double mu, double s, double q, double x) {
  const double s2 = s * s;
  const double delta = std::sqrt(mu * mu + 2 * q * s2) / s2;
  if (delta == 0.0) return 2.0 / s2 * x;
  return 2.0 / s2 * std::exp(-mu * x / s2) * std::sinh(delta * x) / delta;
}

// Cramer-Lundberg oracle by partial fractions: sum_i (theta_i + beta) / P'(theta_i) e^{theta_i x}
template <class T>
T cl_W(double c, double lam, double mean, T q, double x) {
  const double beta = 1.0 / mean;
  const T A = c, B = c * beta - lam - q, C = -q * beta;
  const T disc = std::sqrt(B * B - 4.0 * A * C);
  const T r1 = (-B + disc) / (2.0 * A), r2 = (-B - disc) / (2.0 * A);
  return (r1 + beta) / (A * (r1 - r2)) * std::exp(r1 * x) + (r2 + beta) / (A * (r2 - r1)) * std::exp(r2 * x);
}

const double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST(Scale, BrownianClosedForm) {
  for (auto [mu, s] : {std::pair{0.0, 1.0}, std::pair{0.3, 0.7}, std::pair{-0.5, 1.2}}) {
    auto m = LevyModel::brownian(mu, s);
    for (double q : {0.0, 0.5, 2.0}) {
      ScaleEvaluator<double> ev(m, q);
      for (double x : {0.0, 1e-7, 0.01, 0.5, 3.0, 10.0}) {
        const double want = bm_W(mu, s, q, x);
        EXPECT_NEAR(ev.W(x), want, 1e-12 * std::max(1.0, want)) << mu << " " << q << " " << x;
      }
    }
  }
  ScaleEvaluator<double> unit(LevyModel::brownian(0, 1), 1.0);
  EXPECT_NEAR(unit.Z(1.3), std::cosh(std::sqrt(2.0) * 1.3), 1e-12);
  EXPECT_EQ(unit.W(-0.1), 0.0);
  EXPECT_EQ(unit.Z(-0.1), 1.0);
}

TEST(Scale, CramerLundbergClosedForm) {
  auto m = LevyModel::cramer_lundberg(1.5, 1.0, 1.0);
  for (double q : {0.0, 0.3, 1.0, 5.0}) {
    ScaleEvaluator<double> ev(m, q);
    for (double x : {0.0, 0.2, 1.0, 4.0, 12.0}) {
      const double want = cl_W(1.5, 1.0, 1.0, q, x);
      EXPECT_NEAR(ev.W(x), want, 1e-12 * std::max(1.0, want));
    }
  }
  EXPECT_NEAR(ScaleEvaluator<double>(m, 0.7).W(0.0), 1.0 / 1.5, 1e-15);
  // q = 0: W(x) = (1 - (lam m / c) e^{-(1/m - lam/c) x}) / (c - lam m)
  ScaleEvaluator<double> ev0(m, 0.0);
  for (double x : {0.5, 2.0}) {
    EXPECT_NEAR(ev0.W(x), (1.0 - std::exp(-(1.0 - 1.0 / 1.5) * x) / 1.5) / 0.5, 1e-13);
  }
}

TEST(Scale, ComplexQMatchesPartialFractions) {
  auto m = LevyModel::cramer_lundberg(1.5, 1.0, 1.0);
  const cplx q(1.0, 3.0);
  ScaleEvaluator<cplx> ev(m, q);
  for (double x : {0.1, 1.0, 3.0}) {
    const cplx want = cl_W<cplx>(1.5, 1.0, 1.0, q, x);
    EXPECT_NEAR(std::abs(ev.W(x) - want), 0.0, 1e-11 * std::abs(want));
  }
}

TEST(Scale, ZIsOnePlusQIntegralOfW) {
  for (auto m : {LevyModel::brownian(0.2, 1.0), LevyModel::cramer_lundberg(1.5, 1.0, 1.0)}) {
    for (cplx q : {cplx(0.5, 0.0), cplx(2.0, -1.0)}) {
      ScaleEvaluator<cplx> ev(m, q);
      for (double x : {0.3, 2.0}) {
        const cplx I = integrate([&](double y) { return ev.W(y); }, 0.0, x, QuadratureConfig{1e-14, 1e-13, 400});
        EXPECT_NEAR(std::abs(ev.Z(x) - (1.0 + q * I)), 0.0, 1e-11 * std::abs(ev.Z(x)));
      }
    }
  }
}

TEST(Scale, LaplaceTransformIdentity) {
  for (auto m : {LevyModel::brownian(0, 1), LevyModel::cramer_lundberg(1.5, 1.0, 1.0)}) {
    for (double q : {0.5, 1.0}) {
      ScaleEvaluator<double> ev(m, q);
      const double s = ev.phi() + 0.5;
      const double got = integrate([&](double x) { return std::exp(-s * x) * ev.W(x); }, 0.0, kInf,
                                   QuadratureConfig{1e-14, 1e-12, 400});
      EXPECT_NEAR(got, 1.0 / (laplace_exponent(m, s) - q), 1e-10);
    }
  }
}

TEST(Scale, ComplexLaplaceTransformIdentity) {
  auto m = LevyModel::brownian(0.1, 0.9);
  const cplx q(0.5, 2.0);
  ScaleEvaluator<cplx> ev(m, q);
  const double s = ev.phi().real() + 1.0;
  const cplx got = integrate([&](double x) { return std::exp(-s * x) * ev.W(x); }, 0.0, kInf,
                             QuadratureConfig{1e-14, 1e-12, 400});
  const cplx want = 1.0 / (laplace_exponent(m, cplx(s, 0.0)) - q);
  EXPECT_NEAR(std::abs(got - want), 0.0, 1e-10);
}

TEST(Scale, InversionBackendAgrees) {
  for (auto m : {LevyModel::brownian(0, 1), LevyModel::cramer_lundberg(1.5, 1.0, 1.0)}) {
    for (double q : {0.5, 2.0}) {
      ScaleEvaluator<double> cf(m, q);
      ScaleEvaluator<double> inv(m, q, {ScaleBackend::inversion, {}});
      for (double x : {0.1, 1.0, 5.0}) {
        EXPECT_NEAR(inv.W(x) / cf.W(x), 1.0, 1e-6) << x;
        EXPECT_NEAR(inv.Z(x) / cf.Z(x), 1.0, 1e-6) << x;
      }
    }
  }
}

TEST(Scale, StableCrossFunctions) {
  auto m = LevyModel::brownian(0, 1);
  ScaleEvaluator<double> ev(m, 1.0);
  for (auto [a, h] : {std::pair{0.5, 1.0}, std::pair{0.0, 2.0}, std::pair{1.5, 1.0}}) {
    const double naive = ev.Z(a) - ev.W(a) * ev.Z(h) / ev.W(h);
    EXPECT_NEAR(ev.cross(a, h), naive, 1e-12);
  }
  EXPECT_NEAR(ev.cross(0.5, 1.0), std::sinh(std::sqrt(2.0) * 0.5) / std::sinh(std::sqrt(2.0)), 1e-14);
  // Far boundary: E_a[e^{-q tau_0^-}] = e^{-sqrt(2q) a}
  EXPECT_NEAR(ev.cross(1.0, 800.0), std::exp(-std::sqrt(2.0)), 1e-14);

  auto cl = LevyModel::cramer_lundberg(1.5, 1.0, 1.0);
  ScaleEvaluator<cplx> cev(cl, cplx(0.7, 1.5));
  for (auto [a, h] : {std::pair{0.0, 1.0}, std::pair{0.4, 2.0}}) {
    const cplx naive = cev.Z(a) - cev.W(a) * cev.Z(h) / cev.W(h);
    EXPECT_NEAR(std::abs(cev.cross(a, h) - naive), 0.0, 1e-12);
  }
  const double a = 0.3, u = 0.8, d = 0.6;
  const cplx naive = cev.W(a + d) * cev.W(u) / cev.W(u + d) - cev.W(a);
  EXPECT_NEAR(std::abs(cev.killed(a, u, d) - naive), 0.0, 1e-12);
}

TEST(Scale, LargeArgumentsStayFinite) {
  auto m = LevyModel::brownian(0, 1);
  ScaleEvaluator<cplx> ev(m, cplx(300.0, 400.0));
  const cplx r = ev.ratio(49.0, 50.0);
  EXPECT_TRUE(std::isfinite(std::abs(r)));
  EXPECT_NEAR(std::abs(r - std::exp(-ev.phi())), 0.0, 1e-12);
  EXPECT_TRUE(std::isfinite(std::abs(ev.cross(10.0, 50.0))));
}

TEST(Scale, MonotoneW) {
  auto m = LevyModel::cramer_lundberg(1.2, 2.0, 0.5);
  ScaleEvaluator<double> ev(m, 0.3);
  double prev = ev.W(0.0);
  for (double x = 0.05; x < 8.0; x += 0.05) {
    const double w = ev.W(x);
    EXPECT_GT(w, prev);
    prev = w;
  }
}

TEST(Scale, Capabilities) {
  GeneralSnlp g;
  g.gamma_coef = 1.0;
  g.sigma = 0.5;
  g.levy_density = [](double z) { return std::exp(-z); };
  LevyModel gm(g);
  EXPECT_THROW((ScaleEvaluator<double>(gm, 1.0, {ScaleBackend::closed_form, {}})), CapabilityError);
  EXPECT_THROW((ScaleEvaluator<cplx>(gm, cplx(1.0, 1.0))), CapabilityError);
  EXPECT_THROW((ScaleEvaluator<double>(LevyModel::brownian(0, 1), -1.0)), ValidationError);
  ScaleEvaluator<double> ev(gm, 1.0);
  EXPECT_EQ(ev.backend(), ScaleBackend::inversion);
  // Transform identity on the generic route
  const double s = ev.phi() + 1.0;
  const double got = integrate([&](double x) { return std::exp(-s * x) * ev.W(x); }, 0.0, 30.0,
                               QuadratureConfig{1e-9, 1e-8, 200});
  EXPECT_NEAR(got, 1.0 / (laplace_exponent(gm, s) - 1.0), 1e-6);
}
