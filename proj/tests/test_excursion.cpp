#include <gtest/gtest.h>

#include <cmath>

#include "snlp/excursion.hpp"
#include "snlp/occupation.hpp"

using namespace snlp;

namespace {

const double r2 = std::sqrt(2.0);
double W1(double x) { return r2 * std::sinh(r2 * x); }
double Z1(double x) { return std::cosh(r2 * x); }

const LevyModel bm = LevyModel::brownian(0.0, 1.0);
const LevyModel drift = LevyModel::brownian(0.4, 0.8);

}  // namespace

TEST(Excursion, BrownianEqualWeights) {
  ExcursionFunctionals<> ex({bm, 1.0, 1.0, 1.0, -1.0});
  EXPECT_NEAR(ex.n_kill(), std::sinh(2 * r2) / (r2 * std::pow(std::sinh(r2), 2)), 1e-12);
  EXPECT_NEAR(ex.n_up(), 1.0 / W1(1), 1e-13);
  EXPECT_NEAR(ex.n_up(), 0.36542, 1e-5);
  EXPECT_NEAR(ex.n_down(), (Z1(1) * W1(2) - Z1(2) * W1(1)) / (W1(1) * W1(1)), 1e-12);
}

TEST(Excursion, UpTimesScaleIsOne) {
  for (double p : {0.1, 1.0, 7.0}) {
    ExcursionFunctionals<> ex({drift, p, 2.0, 1.3, -0.6});
    EXPECT_NEAR(ex.n_up() * ScaleEvaluator<double>(drift, p).W(1.3), 1.0, 1e-13);
  }
}

TEST(Excursion, DownOverKillMatchesExitFromZero) {
  // From 0 the process makes a Poisson stream of excursions; the first one that
  // ends by a kill, an up-crossing or a down-crossing decides the outcome.
  for (auto [p, q] : {std::pair{1.0, 2.0}, std::pair{2.0, 1.0}, std::pair{0.5, 0.5}}) {
    ExcursionFunctionals<> ex({drift, p, q, 1.0, -1.0});
    const OccupationQuery oq{drift, p, q, 0.0, 1.0, -1.0};
    EXPECT_NEAR(ex.n_down() / ex.n_kill(), exit_down_weighted(oq), 1e-9);
    EXPECT_NEAR(ex.n_up() / ex.n_kill(), exit_up_weighted(oq), 1e-9);
  }
}

TEST(Excursion, Positivity) {
  for (double p : {0.2, 1.0, 5.0}) {
    for (double q : {0.2, 1.0, 5.0}) {
      ExcursionFunctionals<> ex({drift, p, q, 0.7, -1.2});
      EXPECT_GT(ex.n_kill(), 0.0);
      EXPECT_GT(ex.n_up(), 0.0);
      EXPECT_GT(ex.n_down(), 0.0);
      EXPECT_GT(ex.n_kill(), ex.n_up() + ex.n_down());
    }
  }
}

TEST(Excursion, VanishingLimits) {
  double prev_up = 1.0, prev_down = 1.0;
  for (double p : {1e2, 1e3, 1e4}) {
    ExcursionFunctionals<> ex({bm, p, p, 1.0, -1.0});
    const double up = ex.n_up(), down = ex.n_down();
    EXPECT_TRUE(std::isfinite(down));
    EXPECT_GE(down, 0.0);
    EXPECT_LT(up, prev_up);
    EXPECT_LT(down, prev_down);
    prev_up = up;
    prev_down = down;
  }
  EXPECT_LT(prev_up, 1e-50);
  EXPECT_LT(prev_down, 1e-50);
}

TEST(Excursion, ResolventMassBalance) {
  // n(1 - e^{-A(zeta ^ kappa)}) = n_kill - n_up - n_down and equals the
  // weighted integral of the excursion resolvent.
  for (auto [p, q] : {std::pair{1.0, 2.0}, std::pair{3.0, 0.5}}) {
    ExcursionFunctionals<> ex({drift, p, q, 1.0, -1.0});
    auto u = [&](double y) { return ex.n_resolvent_density(y); };
    const double above = integrate(u, 0.0, 1.0, {1e-12, 1e-10, 400});
    const double below = integrate(u, -1.0, 0.0, {1e-12, 1e-10, 400});
    EXPECT_NEAR(p * above + q * below, ex.n_kill() - ex.n_up() - ex.n_down(), 1e-7);
  }
  ExcursionFunctionals<> ex({bm, 1.0, 1.0, 1.0, -1.0});
  EXPECT_NEAR(ex.n_resolvent_density(0.4), W1(0.6) / W1(1), 1e-12);
  EXPECT_NEAR(ex.n_resolvent_density(-1.0 + 1e-9), 0.0, 1e-7);
  EXPECT_THROW(ex.n_resolvent_density(1.0), ValidationError);
}

TEST(Excursion, TransformProductIdentity) {
  // q * fun1 * W^(p)(b) = W^(p,p+q)(b,c)/W^(p+q)(-c)
  for (double q : {0.5, 2.0, 10.0}) {
    ExcursionQuery<> eq{drift, 1.0, q, 1.0, -1.0};
    BivariateScale<> bs(drift, 1.0, 1.0 + q);
    const double want = bs.W(1.0, -1.0) / bs.scale_q().W(1.0);
    EXPECT_NEAR(q * parisian_denominator_transform(eq) * ScaleEvaluator<double>(drift, 1.0).W(1.0), want,
                1e-10 * want);
  }
}

TEST(Excursion, TransformsAgainstExcursionFunctionals) {
  // fun1 = n_kill(p, p+q)/(q W^(p)(b)) - 1/W^(p)(b) ... rewritten through the bivariate values.
  const double p = 0.7, b = 1.2, c = -0.8;
  for (double q : {1e-3, 0.3, 4.0}) {
    ExcursionQuery<> eq{drift, p, q, b, c};
    const auto t = parisian_transforms(eq);
    BivariateScale<> bs(drift, p, p + q);
    const double wr = bs.scale_q().W(-c), wpb = bs.scale_p().W(b);
    const double what = bs.W(b, c) / wr;
    const double zc = bs.Z(b, c) - bs.W(b, c) * bs.scale_q().Z(-c) / wr;
    EXPECT_NEAR(t.denominator, what / (q * wpb), 1e-9 * std::abs(t.denominator));
    EXPECT_NEAR(t.ruin, (what - bs.scale_p().Z(b) + zc) / ((p + q) * wpb), 1e-9);
    EXPECT_NEAR(t.down, -zc / (q * wpb), 1e-9 * std::abs(t.down));
  }
}

TEST(Excursion, DownTransformSmallQLimit) {
  const double p = 1.0;
  ExcursionFunctionals<> ex({bm, p, p, 1.0, -1.0});
  const double ndown = ex.n_down();
  double prev = 1e9;
  for (double q : {1e-1, 1e-2, 1e-3}) {
    const double v = q * parisian_down_numerator_transform({bm, p, q, 1.0, -1.0});
    const double gap = std::abs(v - ndown);
    EXPECT_LT(gap, prev);
    prev = gap;
  }
  EXPECT_LT(prev, 1e-3);
  EXPECT_THROW(parisian_down_numerator_transform({bm, p, 1e-4, 1.0, -1.0}), ValidationError);
}

TEST(Excursion, Capabilities) {
  const auto cl = LevyModel::cramer_lundberg(1.5, 1.0, 1.0);
  EXPECT_THROW((ExcursionFunctionals<>({cl, 1.0, 1.0, 1.0, -1.0})), CapabilityError);
  EXPECT_THROW(parisian_denominator_transform({cl, 1.0, 1.0, 1.0, -1.0}), CapabilityError);
  EXPECT_THROW((ExcursionFunctionals<>({bm, 1.0, 1.0, 1.0, 0.0})), ValidationError);
}
