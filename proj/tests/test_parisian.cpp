#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "snlp/excursion.hpp"
#include "snlp/parisian.hpp"

using namespace snlp;

namespace {

const LevyModel bm = LevyModel::brownian(0.0, 1.0);
const LevyModel drift = LevyModel::brownian(0.3, 1.2);
const LevyModel cl = LevyModel::cramer_lundberg(1.5, 1.0, 1.0);

// Lambda^(0)(x,t) for standard BM: W(x+z) = 2(x+z), so
// Lambda = 2 E[(x + X_t) X_t / t; X_t > 0] = 1 + 2x / sqrt(2 pi t) at x >= 0.
double bm_lambda0(double x, double t) { return 1.0 + 2.0 * x / std::sqrt(2.0 * std::numbers::pi * t); }

double no_lower_limit() { return 1.0 / (1.0 + std::sqrt(2.0 / std::numbers::pi)); }

ParisianQuery ref_query(double p = 0.5, double r = 0.4) { return {bm, 0.5, 0.0, 1.0, -1.0, p, 0.5, r}; }

// int_0^T e^{-qt} f(t) dt with t = u^2 to absorb the t^{-1/2} start.
template <class F>
double time_transform(F f, double q, double T) {
  auto g = [&](double u) { return 2.0 * u * std::exp(-q * u * u) * f(u * u); };
  return integrate(g, 0.0, std::sqrt(T), {1e-9, 1e-7, 200});
}

}  // namespace

TEST(Lambda, BrownianExamples) {
  EXPECT_NEAR(lambda_fn(bm, 0.0, 0.0, 1.0), 1.0, 1e-10);
  EXPECT_NEAR(lambda_fn(bm, 0.0, 1.0, 1.0), 1.0 + 2.0 / std::sqrt(2.0 * std::numbers::pi), 1e-9);
  for (double t : {0.25, 1.0, 3.0})
    for (double x : {0.0, 0.5, 2.0}) EXPECT_NEAR(lambda_fn(bm, 0.0, x, t), bm_lambda0(x, t), 1e-9);
  // Lambda^(p)(0,t) = e^{pt}
  for (double p : {0.5, 2.0}) EXPECT_NEAR(lambda_fn(drift, p, 0.0, 0.7), std::exp(0.7 * p), 1e-9 * std::exp(1.4));
}

TEST(Lambda, RoutesAgree) {
  ParisianConfig dens, inv;
  dens.lambda_route = LambdaRoute::density;
  inv.lambda_route = LambdaRoute::inversion;
  for (double p : {0.0, 1.0})
    for (double x : {-0.6, 0.0, 0.8})
      for (double t : {0.2, 1.5}) {
        const double a = lambda_fn(drift, p, x, t, dens), b = lambda_fn(drift, p, x, t, inv);
        EXPECT_NEAR(a, b, 1e-8 * std::max(1.0, std::abs(a))) << p << " " << x << " " << t;
      }
  EXPECT_THROW(lambda_fn(cl, 1.0, 0.5, 1.0, dens), CapabilityError);
}

TEST(Lambda, KendallRelation) {
  // int e^{-st} e^{-pt} Lambda^(p)(0,t) dt = int e^{-phi(p+s) z} W^(p)(z) dz, both equal 1/s... at s = p = 1.
  const double lhs = integrate([](double t) { return std::exp(-2.0 * t) * lambda_fn(bm, 1.0, 0.0, t); }, 0.0,
                              std::numeric_limits<double>::infinity());
  ScaleEvaluator<double> w(bm, 1.0);
  const double Phi = phi(bm, 2.0);
  const double rhs = integrate([&](double z) { return std::exp(-Phi * z) * w.W(z); }, 0.0,
                              std::numeric_limits<double>::infinity());
  EXPECT_NEAR(lhs, 1.0, 1e-4);
  EXPECT_NEAR(rhs, 1.0, 1e-4);
}

TEST(Lambda, KendallRelationCramerLundberg) {
  // Inversion route for a model without a density: check the time transform at x = 0.7.
  const double p = 0.5, s = 1.3, x = 0.7;
  LambdaFunction lam(cl, p);
  const double lhs = time_transform([&](double t) { return std::exp(-p * t) * lam(x, t); }, s, 40.0);
  ScaleEvaluator<double> w(cl, p);
  const double Phi = phi(cl, p + s);
  const double rhs =
      integrate([&](double z) { return std::exp(-Phi * z) * w.W(z + x); }, 0.0, std::numeric_limits<double>::infinity());
  EXPECT_NEAR(lhs, rhs, 1e-6 * rhs);
}

TEST(Lambda, TimeIntegral) {
  LambdaFunction lam(bm, 0.0);
  EXPECT_DOUBLE_EQ(lam.time_integral(0.5, 0.0), 0.0);
  EXPECT_NEAR(lam.time_integral(0.0, 2.0), 2.0, 1e-9);
  // int_0^T (1 + 2x/sqrt(2 pi t)) dt = T + 4x sqrt(T) / sqrt(2 pi)
  EXPECT_NEAR(lam.time_integral(0.5, 2.0), 2.0 + 2.0 * std::sqrt(2.0) / std::sqrt(2.0 * std::numbers::pi), 1e-8);
  LambdaFunction lp(drift, 0.8);
  const double whole = lp.time_integral(0.4, 1.5);
  const double tail = integrate([&](double t) { return lp(0.4, t); }, 0.6, 1.5);
  EXPECT_NEAR(lp.time_integral(0.4, 0.6) + tail, whole, 1e-8 * whole);
}

TEST(Kernels, BoundaryValues) {
  ParisianKernels ker(bm, 1.0, -1.0);
  const auto at0 = ker(0.7, 0.0);
  EXPECT_EQ(at0.H, 1.0);
  EXPECT_EQ(at0.J, 0.0);
  EXPECT_EQ(at0.K, 0.0);
  const auto small = ker(1e-7, -0.4);
  EXPECT_EQ(small.H, 0.0);
  EXPECT_EQ(small.J, -1.0);
  EXPECT_EQ(small.K, 0.0);
  EXPECT_EQ(ker.K(0.0, 0.5), 0.0);
  EXPECT_EQ(ker.K(-0.2, -0.5), 0.0);
  EXPECT_TRUE(std::isinf(ker(0.0, 0.5).H));
  EXPECT_FALSE(ker(0.5, 0.5).accuracy_warning);
  EXPECT_THROW(ker(0.5, -1.0), ValidationError);
}

TEST(Kernels, SignsAndMonotonicity) {
  ParisianKernels ker(drift, 0.7, -1.0);
  for (double t : {0.1, 0.5, 1.5}) {
    const auto v = ker(t, -0.5);
    EXPECT_GE(v.H, -1e-9);
    EXPECT_LE(v.J, 1e-9);
    EXPECT_LE(v.K, 1e-9);
  }
  double prev = std::numeric_limits<double>::infinity();
  for (double t : {0.05, 0.2, 0.6, 1.4}) {
    const double h = ker(t, 0.6).H;
    EXPECT_LT(h, prev);
    EXPECT_GT(h, 0.0);
    prev = h;
  }
}

struct RoundTripCase {
  LevyModel model;
  double p, q, x, c;
  const char* name;
};

void PrintTo(const RoundTripCase& rc, std::ostream* os) { *os << rc.name; }

class KernelRoundTrip : public ::testing::TestWithParam<RoundTripCase> {};

TEST_P(KernelRoundTrip, MatchesTransforms) {
  const auto rc = GetParam();
  ParisianKernels ker(rc.model, rc.p, rc.c);
  const auto want = ker.transforms(cplx(rc.q, 0.0), rc.x);
  const double T = 36.0 / rc.q;
  const double H = time_transform([&](double t) { return ker(t, rc.x).H; }, rc.q, T);
  const double J = time_transform([&](double t) { return ker(t, rc.x).J; }, rc.q, T);
  const double K = time_transform([&](double t) { return ker.K(t, rc.x); }, rc.q, T);
  EXPECT_NEAR(H, want[0].real(), 1e-3 * std::abs(want[0]));
  EXPECT_NEAR(J, want[1].real(), 1e-3 * std::abs(want[1]));
  EXPECT_NEAR(K, want[2].real(), 1e-3 * std::abs(want[2]));
}

INSTANTIATE_TEST_SUITE_P(Triples, KernelRoundTrip,
                         ::testing::Values(RoundTripCase{bm, 1.0, 1.0, 0.5, -1.0, "BrownianAbove"},
                                           RoundTripCase{bm, 0.5, 2.0, -0.4, -1.0, "BrownianBelow"},
                                           RoundTripCase{drift, 1.0, 1.5, 0.8, -0.7, "DriftAbove"},
                                           RoundTripCase{cl, 1.0, 1.0, -0.5, -1.0, "CramerLundbergBelow"}),
                         [](const auto& info) { return std::string(info.param.name); });

TEST(Kernels, RecoveryLimits) {
  // As c -> -inf: H -> e^{-pt} Lambda(x,t), J -> e^{-pt}(Lambda(x,t) - p int_0^t Lambda(x,s) ds - Z(x)).
  const double p = 1.0;
  ParisianKernels ker(bm, p, -50.0);
  LambdaFunction lam(bm, p);
  for (double x : {-0.5, 0.5, 1.0}) {
    for (double t : {0.25, 0.5, 1.0}) {
      const auto v = ker(t, x);
      const double L = lam(x, t);
      EXPECT_NEAR(v.H, std::exp(-p * t) * L, 1e-3 * L) << x << " " << t;
      const double Jl = std::exp(-p * t) * (L - p * lam.time_integral(x, t) - lam.scale().Z(x));
      EXPECT_NEAR(v.J, Jl, 1e-3 * std::abs(Jl)) << x << " " << t;
    }
  }
}

TEST(Kernels, GaverStehfestForModelsWithoutComplexScale) {
  ParisianConfig cfg;
  cfg.inversion = InversionConfig::with(InversionMethod::gaver_stehfest);
  const auto v_gs = kernels(bm, 1.0, 0.5, 0.5, -1.0, cfg);
  const auto v_eu = kernels(bm, 1.0, 0.5, 0.5, -1.0);
  EXPECT_NEAR(v_gs.H, v_eu.H, 1e-4 * v_eu.H);
  // bounded variation at tiny t: round-off is amplified by the inversion and flagged
  EXPECT_TRUE(ParisianKernels(cl, 1.0, -1.0)(1e-4, 0.5).accuracy_warning);
  const LevyModel general = GeneralSnlp{1.0, 0.5, [](double z) { return std::exp(-z); }};
  EXPECT_THROW(ParisianKernels(general, 1.0, -1.0), CapabilityError);
}

TEST(Parisian, UpAtUpperBarrier) {
  auto pq = ref_query();
  pq.x = pq.b;
  EXPECT_DOUBLE_EQ(parisian_up(pq), 1.0);
  const auto all = parisian_all(pq);
  EXPECT_NEAR(all.ruin.raw, 0.0, 1e-12);
  EXPECT_NEAR(all.down, 0.0, 1e-12);
}

TEST(Parisian, ReferenceQueryBounds) {
  const auto v = parisian_all(ref_query());
  for (double u : {v.up, v.ruin.raw, v.ruin.shifted, v.down}) {
    EXPECT_GT(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  EXPECT_NEAR(v.ruin.shifted, v.ruin.raw * std::exp(0.25), 1e-14);
  EXPECT_LT(v.up + v.ruin.raw + v.down, 1.0);
}

TEST(Parisian, DownMonotoneInClockBudget) {
  double prev = -1.0;
  for (double r : {0.0, 0.1, 0.25, 0.4, 0.5}) {
    auto pq = ref_query(0.5, r);
    const double d = parisian_down(pq);
    EXPECT_GE(d, prev - 1e-9);
    prev = d;
  }
  EXPECT_NEAR(parisian_down(ref_query(0.5, 0.0)), 0.0, 1e-12);
}

TEST(Parisian, ThreeWaySplit) {
  const auto pq = ref_query(1e-3, 0.5);
  const auto v = parisian_all(pq);
  const double total = v.up + v.down + v.ruin.raw;
  EXPECT_GE(total, 0.99);
  EXPECT_LE(total, 1.0);
}

TEST(Parisian, LongHorizonRuinIsBounded) {
  ParisianQuery pq{bm, 0.0, 0.0, 1.0, -1.0, 0.5, 20.0, 20.0};
  const auto v = parisian_all(pq);
  // shifted = raw e^{p gamma}: kernel round-off of ~1e-10 is magnified by e^{10}
  EXPECT_GE(v.ruin.shifted, -1e-5);
  EXPECT_LE(v.ruin.shifted, 1.0);
  EXPECT_LT(v.ruin.raw, 1e-4);
}

TEST(Parisian, NoLowerBarrierLimit) {
  // Lambda^(0) gives up = Lambda(0,1)/Lambda(1,1) = 1/(1 + sqrt(2/pi)).
  EXPECT_NEAR(one_sided_up(bm, 1e-9, 0.0, 1.0, 1.0), no_lower_limit(), 1e-6);
  EXPECT_NEAR(one_sided_ruin(bm, 1e-9, 0.0, 1.0, 1.0), 1.0 - no_lower_limit(), 1e-6);
  ParisianQuery pq{bm, 0.0, 0.0, 1.0, NEG_INF, 1e-9, 1.0, 0.5};
  EXPECT_EQ(parisian_down(pq), 0.0);
}

TEST(Parisian, FarLowerBarrierMatchesNoLowerBarrier) {
  for (double x : {0.0, 0.5}) {
    ParisianQuery far{bm, x, 0.0, 1.0, -50.0, 0.5, 0.5, 0.5};
    ParisianQuery none = far;
    none.c = NEG_INF;
    const auto a = parisian_all(far), b = parisian_all(none);
    EXPECT_NEAR(a.up, b.up, 1e-3 * b.up);
    EXPECT_NEAR(a.ruin.shifted, b.ruin.shifted, 1e-3 * b.ruin.shifted);
  }
  // a path that starts below 0 with part of the clock used up
  ParisianQuery far{bm, -0.3, 0.2, 1.0, -50.0, 0.5, 0.5, 0.5};
  ParisianQuery none = far;
  none.c = NEG_INF;
  const auto a = parisian_all(far), b = parisian_all(none);
  EXPECT_NEAR(a.up, b.up, 1e-3 * b.up);
  EXPECT_NEAR(a.ruin.shifted, b.ruin.shifted, 1e-3 * b.ruin.shifted);
}

TEST(Parisian, AgreesWithExcursionAssembly) {
  const double p = 0.5, b = 1.0, c = -1.0, gamma = 0.5, r = 0.4;
  const auto v = parisian_all({bm, 0.0, 0.0, b, c, p, gamma, r});
  const auto a = assemble_from_transforms(bm, p, b, c, gamma, r);
  EXPECT_NEAR(v.up, a.up, 1e-4);
  EXPECT_NEAR(v.ruin.shifted, a.ruin_shifted, 1e-4);
  EXPECT_NEAR(v.down, a.down, 1e-4);
}

TEST(Parisian, Validation) {
  auto pq = ref_query();
  pq.x = 1.5;
  EXPECT_THROW(parisian_up(pq), ValidationError);
  pq = ref_query();
  pq.t0 = 0.1;
  EXPECT_THROW(parisian_up(pq), ValidationError);
  pq = ref_query();
  pq.r = 0.6;
  EXPECT_THROW(parisian_down(pq), ValidationError);
}

TEST(Resolvent, AboveZeroClosedForm) {
  ResolventQuery rq{bm, 0.5, 1.0, -1.0, 0.5, 0.4, 0.0, 0.0};
  ParisianKernels ker(bm, 0.5, -1.0);
  const double hb = ker(0.5, 1.0).H;
  ScaleEvaluator<double> w(bm, 0.5);
  for (double y : {0.1, 0.5, 0.9}) EXPECT_NEAR(parisian_resolvent_density(rq, y), w.W(1.0 - y) / hb, 1e-10);
  EXPECT_NEAR(parisian_resolvent_density(rq, 1.0 - 1e-9), 0.0, 1e-7);
}

TEST(Resolvent, FarBarrierMatchesNoLowerBarrier) {
  ResolventQuery far{bm, 0.5, 1.0, -50.0, 0.5, 0.5, 0.5, 0.0};
  for (double y : {0.0, 0.3, 0.7}) {
    const double want = one_sided_resolvent(bm, 0.5, 0.5, 1.0, 0.5, y);
    EXPECT_NEAR(parisian_resolvent_density(far, y), want, 1e-3 * want);
  }
}

TEST(Resolvent, MassBalance) {
  // From 0 with r = gamma the clock filter is inactive, so
  // p int u(y) dy = 1 - E[e^{-p tau}] = 1 - up - ruin_raw - down.
  const double p = 0.5, gamma = 0.5;
  ResolventQuery rq{bm, p, 1.0, -1.0, gamma, gamma, 0.0, 0.0};
  const auto v = parisian_all({bm, 0.0, 0.0, 1.0, -1.0, p, gamma, gamma});
  auto u = [&](double y) { return parisian_resolvent_density(rq, y); };
  const QuadratureConfig qc{1e-8, 1e-7, 100};
  const double mass = integrate(u, -1.0, 0.0, qc) + integrate(u, 0.0, 1.0, qc);
  EXPECT_NEAR(p * mass, 1.0 - v.up - v.ruin.raw - v.down, 1e-5);
}

TEST(Resolvent, Validation) {
  ResolventQuery rq{bm, 0.5, 1.0, -1.0, 0.5, 0.4, 0.5, 0.0};
  EXPECT_THROW(parisian_resolvent_density(rq, -0.5), CapabilityError);
  EXPECT_THROW(parisian_resolvent_density(rq, 1.2), ValidationError);
  EXPECT_THROW(one_sided_resolvent(bm, 0.5, 0.0, 1.0, 0.5, -0.1), ValidationError);
}
