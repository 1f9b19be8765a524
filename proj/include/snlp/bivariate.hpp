#pragma once

// Bivariate scale functions
//   W^(p,q)(x,y) = W^(q)(x-y) + (p-q) int_0^x W^(p)(x-z) W^(q)(z-y) dz
//   Z^(p,q)(x,y) = Z^(q)(x-y) + (p-q) int_0^x W^(p)(x-z) Z^(q)(z-y) dz
// plus normalized combinations that stay finite when q is a large complex
// number (the Laplace variable of the Parisian kernels) and c is far below 0.
//
// The normalized helpers use either the defining convolution over [0, x] or
// the equivalent one over [y, 0],
//   W^(p,q)(x,y) = W^(p)(x-y) - (p-q) int_y^0 W^(p)(x-z) W^(q)(z-y) dz,
// which follows from the convolution identity for scale functions. Whichever
// has the smaller exponential growth is used.

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "snlp/quadrature.hpp"
#include "snlp/scale.hpp"

namespace snlp {

inline QuadratureConfig bivariate_quadrature() { return {1e-14, 1e-11, 2000}; }

template <class T = double>
class BivariateScale {
 public:
  BivariateScale(ScalePtr<T> wp, ScalePtr<T> wq, QuadratureConfig quad = bivariate_quadrature())
      : wp_(std::move(wp)), wq_(std::move(wq)), quad_(quad) {
    quad_.validate();
  }

  BivariateScale(const LevyModel& model, T p, T q, ScaleOptions opts = {},
                 QuadratureConfig quad = bivariate_quadrature())
      : BivariateScale(make_scale<T>(model, p, opts), make_scale<T>(model, q, opts), quad) {}

  T p() const { return wp_->q(); }
  T q() const { return wq_->q(); }
  const ScaleEvaluator<T>& scale_p() const { return *wp_; }
  const ScaleEvaluator<T>& scale_q() const { return *wq_; }

  T W(double x, double y) const {
    if (x < y) return T(0.0);
    if (same()) return wq_->W(x - y);
    const double lo = std::max(0.0, y);
    if (x <= lo) return wq_->W(x - y);
    auto f = [&](double z) { return wp_->W(x - z) * wq_->W(z - y); };
    return wq_->W(x - y) + (p() - q()) * integrate(f, lo, x, quad_);
  }

  T Z(double x, double y) const {
    if (x < y) return T(1.0);
    if (same()) return wq_->Z(x - y);
    if (q() == T(0.0)) return x > 0.0 ? wp_->Z(x) : T(1.0);
    if (x <= 0.0) return wq_->Z(x - y);
    auto f = [&](double z) { return wp_->W(x - z) * wq_->Z(z - y); };
    std::vector<double> pts;
    if (y > 0.0 && y < x) pts.push_back(y);
    return wq_->Z(x - y) + (p() - q()) * integrate(f, 0.0, x, quad_, pts);
  }

  // W^(p,q)(x,c) / W^(q)(-c), c < 0.
  T w_normalized(double x, double c) const {
    check_c(c);
    const double h = -c;
    if (x < c) return T(0.0);
    if (x <= 0.0 || same()) return wq_->ratio(x - c, h);
    const auto wh = wq_->W_scaled(h);
    const double gap = real_part(wq_->phi()) - real_part(wp_->phi());
    if (gap >= 0.0) {
      auto f = [&](double z) { return scaled_combine(wp_->W_scaled(x - z), wq_->W_scaled(z - c), wh); };
      const auto pts = graded_points(c, 0.0, gap, true);
      return scaled_ratio(wp_->W_scaled(x - c), wh) - (p() - q()) * integrate(f, c, 0.0, quad_, pts);
    }
    auto f = [&](double z) { return wp_->W(x - z) * wq_->ratio(z - c, h); };
    const auto pts = graded_points(0.0, x, -gap, false);
    return wq_->ratio(x - c, h) + (p() - q()) * integrate(f, 0.0, x, quad_, pts);
  }

  // Z^(p,q)(x,c) - W^(p,q)(x,c) Z^(q)(-c) / W^(q)(-c), c < 0.
  T z_compensated(double x, double c) const {
    check_c(c);
    const double h = -c;
    if (x < c) return T(1.0);
    if (x <= 0.0 || same()) return wq_->cross(x - c, h);
    // On [0, x] the cross term has size e^{theta1 z + theta2 h}; on [c, 0] it is bounded.
    const double grow_direct =
        wq_->backend() == ScaleBackend::closed_form
            ? std::max(0.0, real_part(wq_->phi()) * x + real_part(wq_->second_root()) * h)
            : std::max(0.0, real_part(wq_->phi())) * std::max(0.0, x - h);
    const double grow_shifted = std::max(0.0, real_part(wp_->phi())) * (x - c);
    if (grow_direct <= grow_shifted) {
      auto f = [&](double z) { return wp_->W(x - z) * wq_->cross(z - c, h); };
      return wq_->cross(x - c, h) + (p() - q()) * integrate(f, 0.0, x, quad_);
    }
    const T head = wp_->Z(x - c) - wp_->W(x - c) * wq_->z_over_w(h);
    auto f = [&](double z) { return wp_->W(x - z) * wq_->cross(z - c, h); };
    const double decay = wq_->backend() == ScaleBackend::closed_form ? std::abs(real_part(wq_->second_root())) : 0.0;
    const auto pts = graded_points(c, 0.0, decay, false);
    return head - (p() - q()) * integrate(f, c, 0.0, quad_, pts);
  }

  // W^(p,q)(x,y) - W^(p,q)(x,c) W^(q)(-y) / W^(q)(-c), for c < y < x.
  T resolvent_bracket(double x, double y, double c) const {
    check_c(c);
    if (y <= c || y >= x) return T(0.0);
    if (y > 0.0) return wp_->W(x - y);
    const auto wc = wq_->W_scaled(-c);
    const auto wy = wq_->W_scaled(-y);
    const T head = wp_->W(x - y) - scaled_combine(wq_->W_scaled(-y), wp_->W_scaled(x - c), wc);
    if (same()) return head;
    auto killed = [&](double z) { return wp_->W(x - z) * wq_->killed(z - y, -y, y - c); };
    auto below = [&](double z) { return wp_->W(x - z) * scaled_combine(wq_->W_scaled(z - c), wy, wc); };
    const double rate = std::max(0.0, real_part(wq_->phi()));
    const auto p1 = graded_points(y, 0.0, rate, false);
    const auto p2 = graded_points(c, y, rate, true);
    const T i1 = y < 0.0 ? integrate(killed, y, 0.0, quad_, p1) : T(0.0);
    const T i2 = integrate(below, c, y, quad_, p2);
    return head + (p() - q()) * (i1 + i2);
  }

 private:
  bool same() const { return wp_->q() == wq_->q(); }
  static void check_c(double c) {
    if (!(c < 0.0)) throw ValidationError("bivariate: lower level c must be < 0");
  }

  ScalePtr<T> wp_, wq_;
  QuadratureConfig quad_;
};

}  // namespace snlp
