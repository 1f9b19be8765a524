#pragma once

// Exit identities weighted by occupation times: exp(-(p O+ + q O-)) where O+
// and O- are the times spent above and below 0.

#include <cmath>

#include "snlp/bivariate.hpp"

namespace snlp {

struct OccupationQuery {
  LevyModel model;
  double p = 1.0;  // weight on time above 0
  double q = 1.0;  // weight on time below 0
  double x = 0.0;
  double b = 1.0;
  double c = -1.0;

  void validate() const {
    if (!(b > 0.0) || !(c < 0.0) || !std::isfinite(b) || !std::isfinite(c))
      throw ValidationError("occupation: need b > 0 > c, both finite");
    if (!(x >= c && x <= b)) throw ValidationError("occupation: x must lie in [c, b]");
    if (!(p >= 0.0) || !(q >= 0.0) || !std::isfinite(p) || !std::isfinite(q))
      throw ValidationError("occupation: weights p, q must be finite and >= 0");
  }
};

class OccupationIdentities {
 public:
  explicit OccupationIdentities(const OccupationQuery& oq, ScaleOptions opts = {},
                                QuadratureConfig quad = bivariate_quadrature())
      : oq_(oq), bs_((oq.validate(), oq.model), oq.p, oq.q, opts, quad) {}

  // E_x[e^{-(p O+ + q O-)(tau_b+)}; tau_b+ <= tau_c-]
  double exit_up() const {
    if (oq_.x >= oq_.b) return 1.0;
    return bs_.W(oq_.x, oq_.c) / bs_.W(oq_.b, oq_.c);
  }

  // E_x[e^{-(p O+ + q O-)(tau_c-)}; tau_c- <= tau_b+]
  double exit_down() const {
    return bs_.Z(oq_.x, oq_.c) - bs_.W(oq_.x, oq_.c) / bs_.W(oq_.b, oq_.c) * bs_.Z(oq_.b, oq_.c);
  }

  // Weighted resolvent density at y in (c, b).
  double resolvent_density(double y) const {
    if (!(y > oq_.c && y < oq_.b)) throw ValidationError("occupation: y must lie in (c, b)");
    const double ratio = bs_.W(oq_.x, oq_.c) / bs_.W(oq_.b, oq_.c);
    return ratio * bs_.W(oq_.b, y) - second_term(y);
  }

  // Laplace transform of the weighted occupation time at inverse local time.
  double inverse_local_time(double t_local) const {
    if (!oq_.model.caps().unbounded_variation)
      throw CapabilityError("occupation: the local time transform needs an unbounded variation model");
    if (!(t_local >= 0.0)) throw ValidationError("occupation: t_local must be >= 0");
    const double wp = bs_.scale_p().W(oq_.b);
    const double wq = bs_.scale_q().W(-oq_.c);
    return std::exp(-t_local * bs_.W(oq_.b, oq_.c) / (wp * wq));
  }

  // The term printed as W^(q)(x,y) in the resolvent identity, read as the
  // bivariate function.
  double second_term(double y) const { return bs_.W(oq_.x, y); }

  const BivariateScale<double>& bivariate() const { return bs_; }

 private:
  OccupationQuery oq_;
  BivariateScale<double> bs_;
};

inline double exit_up_weighted(const OccupationQuery& oq) { return OccupationIdentities(oq).exit_up(); }
inline double exit_down_weighted(const OccupationQuery& oq) { return OccupationIdentities(oq).exit_down(); }
inline double inverse_local_time_transform(const OccupationQuery& oq, double t_local) {
  return OccupationIdentities(oq).inverse_local_time(t_local);
}
inline double weighted_resolvent_density(const OccupationQuery& oq, double y) {
  return OccupationIdentities(oq).resolvent_density(y);
}

}  // namespace snlp
