#pragma once

// Excursion-measure functionals (as scale-function compositions) and the
// q-transforms that share the Parisian denominator.

#include <cmath>

#include "snlp/bivariate.hpp"
#include "snlp/laplace.hpp"

namespace snlp {

template <class T = double>
struct ExcursionQuery {
  LevyModel model;
  T p{1.0};
  T q{1.0};
  double b = 1.0;
  double c = -1.0;

  void validate() const {
    if (!model.caps().unbounded_variation)
      throw CapabilityError("excursion: the excursion measure functionals need an unbounded variation model");
    if (!(b > 0.0) || !(c < 0.0) || !std::isfinite(b) || !std::isfinite(c))
      throw ValidationError("excursion: need b > 0 > c, both finite");
  }
};

template <class T = double>
class ExcursionFunctionals {
 public:
  explicit ExcursionFunctionals(const ExcursionQuery<T>& eq, ScaleOptions opts = {},
                                QuadratureConfig quad = bivariate_quadrature())
      : eq_(eq), opts_(opts), quad_(quad), bs_((eq.validate(), eq.model), eq.p, eq.q, opts, quad) {}

  // n(1 - e^{-p zeta+ - q zeta-} 1(zeta < kappa_b+ ^ kappa_c-))
  T n_kill() const { return bs_.w_normalized(eq_.b, eq_.c) / wpb(); }

  // n(e^{-p kappa_b+}; kappa_b+ < zeta)
  T n_up() const { return T(1.0) / wpb(); }

  // n(e^{-p zeta+ - q (kappa_c- - zeta+)}; kappa_c- < zeta ^ kappa_b+)
  //   = (Z^(q)(-c) W^(p,q)(b,c) - Z^(p,q)(b,c) W^(q)(-c)) / (W^(p)(b) W^(q)(-c))
  T n_down() const { return -bs_.z_compensated(eq_.b, eq_.c) / wpb(); }

  //   W^(p,q)(b,y)/W^(p)(b) - W^(p,q)(b,c) W^(q)(-y) / (W^(p)(b) W^(q)(-c))
  T n_resolvent_density(double y) const {
    if (!(y > eq_.c && y < eq_.b)) throw ValidationError("excursion: y must lie in (c, b)");
    return bs_.resolvent_bracket(eq_.b, y, eq_.c) / wpb();
  }

  const BivariateScale<T>& bivariate() const { return bs_; }

 private:
  T wpb() const { return bs_.scale_p().W(eq_.b); }

  ExcursionQuery<T> eq_;
  ScaleOptions opts_;
  QuadratureConfig quad_;
  BivariateScale<T> bs_;
};

// The three transforms in q that share the Parisian denominator, with r = p+q
// and What = W^(p,r)(b,c) / W^(r)(-c):
//   denominator  What / (q W^(p)(b))
//   ruin         (What - Z^(p)(b) + Zc) / (r W^(p)(b))
//   down         -Zc / (q W^(p)(b))
// where Zc = Z^(p,r)(b,c) - What Z^(r)(-c). Evaluated through the stable
// normalized forms so they can be inverted in q.
template <class T>
struct ParisianTransforms {
  T denominator, ruin, down;
};

template <class T>
ParisianTransforms<T> parisian_transforms(const ScalePtr<T>& wp, const LevyModel& model, T q, double b, double c,
                                          ScaleOptions opts = {}, QuadratureConfig quad = bivariate_quadrature()) {
  const T p = wp->q();
  const T r = p + q;
  BivariateScale<T> bs(wp, make_scale<T>(model, r, opts), quad);
  const T what = bs.w_normalized(b, c);
  const T zc = bs.z_compensated(b, c);
  const T wpb = wp->W(b);
  return {what / (q * wpb), (what - wp->Z(b) + zc) / (r * wpb), -zc / (q * wpb)};
}

inline void check_transform_query(const ExcursionQuery<double>& eq) {
  eq.validate();
  if (!(eq.p > 0.0) || !(eq.q > 0.0)) throw ValidationError("excursion: transforms need real p, q > 0");
}

inline ParisianTransforms<double> parisian_transforms(const ExcursionQuery<double>& eq, ScaleOptions opts = {}) {
  check_transform_query(eq);
  return parisian_transforms<double>(make_scale<double>(eq.model, eq.p, opts), eq.model, eq.q, eq.b, eq.c, opts);
}

inline double parisian_denominator_transform(const ExcursionQuery<double>& eq) {
  return parisian_transforms(eq).denominator;
}
inline double parisian_ruin_numerator_transform(const ExcursionQuery<double>& eq) {
  return parisian_transforms(eq).ruin;
}
inline double parisian_down_numerator_transform(const ExcursionQuery<double>& eq) {
  if (eq.q < 1e-3) throw ValidationError("excursion: the down transform is only evaluated for q >= 1e-3");
  return parisian_transforms(eq).down;
}

// Ratios of the inverted transforms at a start from 0 with a fresh clock.
struct ExcursionAssembly {
  double up, ruin_shifted, down;
};

inline ExcursionAssembly assemble_from_transforms(const LevyModel& model, double p, double b, double c, double gamma,
                                                  double r,
                                                  InversionConfig inv = InversionConfig::with(InversionMethod::talbot)) {
  ExcursionQuery<double>{model, p, p, b, c}.validate();
  if (!(p > 0.0) || !(gamma > 0.0) || !(r >= 0.0 && r <= gamma))
    throw ValidationError("excursion: need p > 0, gamma > 0 and r in [0, gamma]");
  const auto wp = make_scale<cplx>(model, cplx(p, 0.0));
  auto F = [&](cplx q) {
    const auto t = parisian_transforms<cplx>(wp, model, q, b, c);
    return std::array<cplx, 3>{t.denominator, t.ruin, t.down};
  };
  const auto at_gamma = laplace_invert_joint<3>(F, gamma, inv);
  const double den = at_gamma[0].value;
  const double num_ruin = at_gamma[1].value;
  double num_down = 0.0;
  if (r > 0.0) num_down = r == gamma ? at_gamma[2].value : laplace_invert_joint<3>(F, r, inv)[2].value;
  const double wpb = wp->W(b).real();
  return {1.0 / (wpb * den), std::exp(p * gamma) * num_ruin / den, num_down / den};
}

}  // namespace snlp
