#pragma once

// Parisian ruin with a lower barrier c and an upper barrier b: the kernels
// H, J, K (inverted from their q-transforms), the exit/ruin/down transforms,
// the resolvent density, and the c = -infinity formulas built on Lambda.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "snlp/bivariate.hpp"
#include "snlp/excursion.hpp"
#include "snlp/laplace.hpp"
#include "snlp/scale.hpp"

namespace snlp {

inline constexpr double NEG_INF = -std::numeric_limits<double>::infinity();

enum class LambdaRoute { automatic, density, inversion };

struct ParisianConfig {
  InversionConfig inversion{};
  QuadratureConfig quadrature = bivariate_quadrature();
  LambdaRoute lambda_route = LambdaRoute::automatic;
  ScaleOptions scale{};
};

struct ParisianQuery {
  LevyModel model;
  double x = 0.0;
  double t0 = 0.0;
  double b = 1.0;
  double c = -1.0;
  double p = 1.0;
  double gamma = 1.0;
  double r = 0.0;

  bool no_lower_barrier() const { return c == NEG_INF; }

  void validate() const {
    if (!(b > 0.0) || !std::isfinite(b)) throw ValidationError("parisian: b must be finite and > 0");
    if (!(c < 0.0) || std::isnan(c) || c == std::numeric_limits<double>::infinity())
      throw ValidationError("parisian: c must be < 0 (or -inf for no lower barrier)");
    if (!(x > c && x <= b)) throw ValidationError("parisian: x must lie in (c, b]");
    if (!(p >= 0.0) || !std::isfinite(p)) throw ValidationError("parisian: p must be finite and >= 0");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ValidationError("parisian: gamma must be > 0");
    if (!(t0 >= 0.0 && t0 < gamma)) throw ValidationError("parisian: t0 must lie in [0, gamma)");
    if (x >= 0.0 && t0 != 0.0) throw ValidationError("parisian: t0 must be 0 when x >= 0");
    if (!(r >= 0.0 && r <= gamma)) throw ValidationError("parisian: r must lie in [0, gamma]");
  }
};

struct ParisianKernelValue {
  double H = 0.0, J = 0.0, K = 0.0;
  bool accuracy_warning = false;
  double error_estimate = 0.0;
};

struct RuinValue {
  double raw = 0.0;      // E[e^{-p tau_gamma}; ...]
  double shifted = 0.0;  // E[e^{-p (tau_gamma - gamma)}; ...] = raw e^{p gamma}
};

struct ParisianValues {
  double up = 0.0;
  RuinValue ruin;
  double down = 0.0;
  bool accuracy_warning = false;
};

// Lambda^(p)(x,t) = int_0^inf W^(p)(x+z) (z/t) P(X_t in dz) and friends.
class LambdaFunction {
 public:
  LambdaFunction(const LevyModel& model, double p, ParisianConfig cfg = {})
      : model_(model), p_(p), cfg_(cfg), w_(model, p, cfg.scale) {
    if (!(p >= 0.0)) throw ValidationError("lambda: p must be >= 0");
    route_ = cfg.lambda_route;
    if (route_ == LambdaRoute::automatic)
      route_ = model.caps().transition_density ? LambdaRoute::density : LambdaRoute::inversion;
    if (route_ == LambdaRoute::density && !model.caps().transition_density)
      throw CapabilityError("lambda: density route needs a transition density; use route inversion");
  }

  LambdaRoute route() const { return route_; }

  double operator()(double x, double t) const {
    if (!(t > 0.0)) throw ValidationError("lambda: t must be > 0");
    return route_ == LambdaRoute::density ? by_density(x, t) : by_inversion(x, t);
  }

  double by_density(double x, double t) const {
    const auto* bm = model_.brownian_spec();
    if (!bm) throw CapabilityError("lambda: density route needs a transition density; use route inversion");
    const double mean = bm->mu * t, sd = bm->sigma * std::sqrt(t);
    const double th = real_part(w_.phi());
    const double lo = std::max(0.0, -x);
    // The integrand is a tilted Gaussian bump centred near mean + th sd^2.
    const double centre = std::max(lo, mean + th * sd * sd);
    const double hi = std::max(centre, lo) + 14.0 * sd;
    auto f = [&](double z) {
      const auto ws = w_.W_scaled(x + z);
      const double u = (z - mean) / sd;
      return ws.mantissa * (z / t) * std::exp(ws.exponent - 0.5 * u * u) / (sd * std::sqrt(2.0 * std::numbers::pi));
    };
    std::vector<double> pts;
    for (double k : {-4.0, -1.0, 0.0, 1.0, 4.0}) pts.push_back(centre + k * sd);
    return integrate(f, lo, hi, QuadratureConfig{1e-300, 1e-12, 2000}, pts);
  }

  // Inverts int e^{-st} e^{-pt} Lambda(x,t) dt = int_0^inf e^{-phi(p+s) z} W^(p)(z+x) dz.
  double by_inversion(double x, double t) const {
    if (model_.caps().closed_form_scale) {
      auto G = [&](cplx s) {
        const cplx Phi = ScaleEvaluator<cplx>(model_, cplx(p_, 0.0) + s).phi();
        return kendall_transform<cplx>(Phi, s, x);
      };
      InversionConfig inv = cfg_.inversion;
      if (inv.method == InversionMethod::gaver_stehfest) inv = InversionConfig{};
      return std::exp(p_ * t) * laplace_invert(G, t, inv);
    }
    std::function<double(double)> G = [&](double s) {
      return kendall_transform<double>(phi(model_, p_ + s), s, x);
    };
    return std::exp(p_ * t) * laplace_invert_detailed(G, t).value;
  }

  // int_0^upper Lambda(x,s) ds, with s = u^2 to absorb the s^{-1/2} start.
  double time_integral(double x, double upper) const {
    if (!(upper >= 0.0)) throw ValidationError("lambda: upper limit must be >= 0");
    if (upper == 0.0) return 0.0;
    auto f = [&](double u) { return 2.0 * u * (*this)(x, u * u); };
    return integrate(f, 0.0, std::sqrt(upper), QuadratureConfig{1e-13, 1e-10, 400});
  }

  const ScaleEvaluator<double>& scale() const { return w_; }

 private:
  template <class T>
  T kendall_transform(T Phi, T s, double x) const {
    if (x < 0.0) return std::exp(Phi * x) / s;
    if (!model_.caps().closed_form_scale) {
      auto f = [&](double z) { return std::exp(-Phi * z) * w_.W(z + x); };
      return T(integrate(f, 0.0, std::numeric_limits<double>::infinity(), QuadratureConfig{1e-13, 1e-9, 400}));
    }
    const double th = real_part(w_.phi());
    const double rate = real_part(Phi) - th;
    auto f = [&](double z) {
      const auto ws = w_.W_scaled(z + x);
      return T(ws.mantissa) * std::exp(T(ws.exponent) - Phi * z);
    };
    const double hi = 45.0 / rate;
    return integrate(f, 0.0, hi, QuadratureConfig{1e-15, 1e-12, 2000}, graded_points(0.0, hi, rate, false));
  }

  LevyModel model_;
  double p_;
  ParisianConfig cfg_;
  ScaleEvaluator<double> w_;
  LambdaRoute route_;
};

inline double lambda_fn(const LevyModel& model, double p, double x, double t, ParisianConfig cfg = {}) {
  return LambdaFunction(model, p, cfg)(x, t);
}

inline double lambda_time_integral(const LevyModel& model, double p, double x, double upper,
                                   ParisianConfig cfg = {}) {
  return LambdaFunction(model, p, cfg).time_integral(x, upper);
}

// H, J, K at fixed (p, c); evaluations at different (t, x) reuse the
// evaluator for W^(p).
class ParisianKernels {
 public:
  ParisianKernels(const LevyModel& model, double p, double c, ParisianConfig cfg = {})
      : model_(model), p_(p), c_(c), cfg_(cfg) {
    if (!(c < 0.0) || !std::isfinite(c)) throw ValidationError("kernels: c must be finite and < 0");
    if (!(p >= 0.0) || !std::isfinite(p)) throw ValidationError("kernels: p must be >= 0");
    cfg_.inversion.validate();
    const bool complex_ok = model.caps().closed_form_scale;
    if (!complex_ok && cfg_.inversion.method != InversionMethod::gaver_stehfest)
      throw CapabilityError("kernels: this model has no complex scale functions; use method gaver_stehfest");
    wp_ = make_scale<cplx>(model, cplx(p, 0.0), cfg_.scale);
  }

  // q-transforms of H, J, K at x.
  std::array<cplx, 3> transforms(cplx q, double x) const {
    const cplx r = cplx(p_, 0.0) + q;
    BivariateScale<cplx> bs(wp_, make_scale<cplx>(model_, r, cfg_.scale), cfg_.quadrature);
    const cplx what = bs.w_normalized(x, c_);
    const cplx zc = bs.z_compensated(x, c_);
    return {what / q, (what - wp_->Z(x) + zc) / r, -zc / q};
  }

  ParisianKernelValue operator()(double t, double x) const {
    if (!(x > c_)) throw ValidationError("kernels: x must be > c");
    if (!(t >= 0.0) || !std::isfinite(t)) throw ValidationError("kernels: t must be >= 0");
    if (x == 0.0) return {1.0, 0.0, 0.0};
    if (x < 0.0 && t < 1e-6) return {0.0, -1.0, 0.0};
    if (t == 0.0) {
      const double inf = std::numeric_limits<double>::infinity();
      return {inf, inf, 0.0};
    }
    auto res = laplace_invert_joint<3>([&](cplx q) { return transforms(q, x); }, t, cfg_.inversion);
    ParisianKernelValue v{res[0].value, res[1].value, res[2].value, false, 0.0};
    for (const auto& r : res) {
      v.accuracy_warning = v.accuracy_warning || r.accuracy_warning;
      v.error_estimate = std::max(v.error_estimate, r.error_estimate);
    }
    return v;
  }

  double K(double t, double x) const { return t <= 0.0 ? 0.0 : (*this)(t, x).K; }

  const ScaleEvaluator<cplx>& scale_p() const { return *wp_; }

  // Laplace-domain resolvent bracket divided by q, inverted at t.
  InversionResult resolvent_numerator(double t, double b, double y) const {
    auto F = [&](cplx q) {
      BivariateScale<cplx> bs(wp_, make_scale<cplx>(model_, cplx(p_, 0.0) + q, cfg_.scale), cfg_.quadrature);
      return std::array<cplx, 1>{bs.resolvent_bracket(b, y, c_) / q};
    };
    return laplace_invert_joint<1>(F, t, cfg_.inversion)[0];
  }

 private:
  LevyModel model_;
  double p_, c_;
  ParisianConfig cfg_;
  ScalePtr<cplx> wp_;
};

inline ParisianKernelValue kernels(const LevyModel& model, double p, double t, double x, double c,
                                   ParisianConfig cfg = {}) {
  return ParisianKernels(model, p, c, cfg)(t, x);
}

namespace detail {

inline ParisianValues parisian_no_lower(const ParisianQuery& pq, const ParisianConfig& cfg) {
  LambdaFunction lam(pq.model, pq.p, cfg);
  const double p = pq.p, g = pq.gamma, s = g - pq.t0;
  const double lx = lam(pq.x, s), lb = lam(pq.b, g);
  const double ratio = lx / lb;
  ParisianValues v;
  v.up = std::exp(p * pq.t0) * ratio;
  const auto& w = lam.scale();
  const double ix = p > 0.0 ? lam.time_integral(pq.x, s) : 0.0;
  const double ib = p > 0.0 ? lam.time_integral(pq.b, g) : 0.0;
  const double bracket = (w.Z(pq.x) + p * ix) - ratio * (w.Z(pq.b) + p * ib);
  v.ruin.raw = std::exp(-p * s) * bracket;
  v.ruin.shifted = std::exp(p * pq.t0) * bracket;
  v.down = 0.0;
  return v;
}

}  // namespace detail

// Up, ruin and down transforms for one query, sharing kernel evaluations.
inline ParisianValues parisian_all(const ParisianQuery& pq, ParisianConfig cfg = {}) {
  pq.validate();
  if (pq.no_lower_barrier()) return detail::parisian_no_lower(pq, cfg);
  ParisianKernels ker(pq.model, pq.p, pq.c, cfg);
  const auto kb = ker(pq.gamma, pq.b);
  const auto kx = ker(pq.gamma - pq.t0, pq.x);
  ParisianValues v;
  const double ratio = (pq.x == pq.b && pq.t0 == 0.0) ? 1.0 : kx.H / kb.H;
  v.up = ratio;
  v.ruin.raw = ratio * kb.J - kx.J;
  v.ruin.shifted = v.ruin.raw * std::exp(pq.p * pq.gamma);
  v.accuracy_warning = kb.accuracy_warning || kx.accuracy_warning;
  auto K = [&](double t, double x) {
    if (t <= 0.0) return 0.0;
    const auto k = ker(t, x);
    v.accuracy_warning = v.accuracy_warning || k.accuracy_warning;
    return k.K;
  };
  v.down = ratio * K(pq.r, pq.b) - K(pq.r - pq.t0, pq.x);
  return v;
}

inline double parisian_up(const ParisianQuery& pq, ParisianConfig cfg = {}) {
  pq.validate();
  if (pq.x == pq.b && pq.t0 == 0.0) return 1.0;
  if (pq.no_lower_barrier()) return detail::parisian_no_lower(pq, cfg).up;
  ParisianKernels ker(pq.model, pq.p, pq.c, cfg);
  return ker(pq.gamma - pq.t0, pq.x).H / ker(pq.gamma, pq.b).H;
}

inline RuinValue parisian_ruin(const ParisianQuery& pq, ParisianConfig cfg = {}) {
  pq.validate();
  if (pq.no_lower_barrier()) return detail::parisian_no_lower(pq, cfg).ruin;
  ParisianKernels ker(pq.model, pq.p, pq.c, cfg);
  const auto kb = ker(pq.gamma, pq.b);
  const auto kx = ker(pq.gamma - pq.t0, pq.x);
  const double ratio = (pq.x == pq.b && pq.t0 == 0.0) ? 1.0 : kx.H / kb.H;
  const double raw = ratio * kb.J - kx.J;
  return {raw, raw * std::exp(pq.p * pq.gamma)};
}

// With no lower barrier the down event can't happen and this returns 0.
inline double parisian_down(const ParisianQuery& pq, ParisianConfig cfg = {}) {
  pq.validate();
  if (pq.no_lower_barrier()) return 0.0;
  ParisianKernels ker(pq.model, pq.p, pq.c, cfg);
  const double ratio = (pq.x == pq.b && pq.t0 == 0.0) ? 1.0 : ker(pq.gamma - pq.t0, pq.x).H / ker(pq.gamma, pq.b).H;
  return ratio * ker.K(pq.r, pq.b) - ker.K(pq.r - pq.t0, pq.x);
}

inline double one_sided_up(const LevyModel& model, double p, double x, double b, double gamma,
                           ParisianConfig cfg = {}) {
  ParisianQuery pq{model, x, 0.0, b, NEG_INF, p, gamma, 0.0};
  return parisian_up(pq, cfg);
}

// E_x[e^{-p (tau_gamma - gamma)}; tau_gamma < tau_b+]
inline double one_sided_ruin(const LevyModel& model, double p, double x, double b, double gamma,
                             ParisianConfig cfg = {}) {
  ParisianQuery pq{model, x, 0.0, b, NEG_INF, p, gamma, 0.0};
  return parisian_ruin(pq, cfg).shifted;
}

inline double one_sided_resolvent(const LevyModel& model, double p, double x, double b, double gamma, double y,
                                  ParisianConfig cfg = {}) {
  if (!(y >= 0.0)) throw ValidationError("one_sided_resolvent: only available for y >= 0");
  if (y >= b) return 0.0;
  LambdaFunction lam(model, p, cfg);
  const auto& w = lam.scale();
  return lam(x, gamma) / lam(b, gamma) * w.W(b - y) - w.W(x - y);
}

struct ResolventQuery {
  LevyModel model;
  double p = 1.0, b = 1.0, c = -1.0, gamma = 1.0, r = 1.0;
  double x = 0.0, t0 = 0.0;
};

// Density in y of int e^{-ps} P_{(x,t0)}(X_s in dy, l(s) <= r, s < tau_b+ ^ tau_c- ^ tau_gamma) ds.
// y < 0 is only available from x = 0 with a fresh clock.
inline double parisian_resolvent_density(const ResolventQuery& rq, double y, ParisianConfig cfg = {}) {
  ParisianQuery pq{rq.model, rq.x, rq.t0, rq.b, rq.c, rq.p, rq.gamma, rq.r};
  pq.validate();
  if (!(y > rq.c && y < rq.b)) throw ValidationError("parisian_resolvent_density: y must lie in (c, b)");
  if (pq.no_lower_barrier()) {
    if (rq.t0 != 0.0) throw ValidationError("parisian_resolvent_density: t0 must be 0 without a lower barrier");
    return one_sided_resolvent(rq.model, rq.p, rq.x, rq.b, rq.gamma, y, cfg);
  }
  ParisianKernels ker(rq.model, rq.p, rq.c, cfg);
  const double hb = ker(rq.gamma, rq.b).H;
  if (y >= 0.0) {
    const auto& w = ker.scale_p();
    const double hx = ker(rq.gamma - rq.t0, rq.x).H;
    return hx / hb * w.W(rq.b - y).real() - w.W(rq.x - y).real();
  }
  if (rq.x != 0.0 || rq.t0 != 0.0)
    throw CapabilityError("parisian_resolvent_density: y < 0 is only available from x = 0 with t0 = 0");
  if (!(rq.r > 0.0)) return 0.0;
  return ker.resolvent_numerator(rq.r, rq.b, y).value / hb;
}

}  // namespace snlp
