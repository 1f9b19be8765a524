#pragma once

// q-scale functions W^(q), Z^(q).
//
// Brownian and Cramer-Lundberg models have 1/(psi(s) - q) = N(s) / P(s) with
// P quadratic, so W is a two-exponential. We keep it in the form
// e^{theta1 x} * mantissa(x) so large arguments and complex q don't overflow,
// and the ratio/cross helpers below combine exponents before exponentiating.
// Other models go through numerical Laplace inversion.

#include <cmath>
#include <complex>
#include <memory>
#include <optional>
#include <type_traits>

#include "snlp/errors.hpp"
#include "snlp/laplace.hpp"
#include "snlp/levy_model.hpp"
#include "snlp/quadrature.hpp"

namespace snlp {

enum class ScaleBackend { closed_form, inversion };

template <class T>
inline constexpr bool is_complex_v = !std::is_same_v<T, double>;

inline double real_part(double x) { return x; }
inline double real_part(cplx x) { return x.real(); }

// value = mantissa * exp(exponent)
template <class T>
struct Scaled {
  T exponent{};
  T mantissa{};

  T value() const {
    if (mantissa == T(0.0)) return T(0.0);
    return mantissa * std::exp(exponent);
  }
};

// a * b / c with exponents added before exponentiating
template <class T>
T scaled_combine(const Scaled<T>& a, const Scaled<T>& b, const Scaled<T>& c) {
  if (a.mantissa == T(0.0) || b.mantissa == T(0.0)) return T(0.0);
  return a.mantissa * b.mantissa / c.mantissa * std::exp(a.exponent + b.exponent - c.exponent);
}

template <class T>
T scaled_ratio(const Scaled<T>& a, const Scaled<T>& c) {
  if (a.mantissa == T(0.0)) return T(0.0);
  return a.mantissa / c.mantissa * std::exp(a.exponent - c.exponent);
}

struct ScaleOptions {
  std::optional<ScaleBackend> backend;
  InversionConfig inversion{};
};

namespace detail {

inline double expm1_any(double w) { return std::expm1(w); }
inline cplx expm1_any(cplx w) {
  const double s = std::sin(0.5 * w.imag());
  return {std::expm1(w.real()) * std::cos(w.imag()) - 2.0 * s * s, std::exp(w.real()) * std::sin(w.imag())};
}

// (1 - e^{-w}) / w
template <class T>
T one_minus_exp_over(T w) {
  if (std::abs(w) < 1e-3) {
    const T w2 = w * w;
    return 1.0 - w / 2.0 + w2 / 6.0 - w2 * w / 24.0 + w2 * w2 / 120.0;
  }
  return -expm1_any(-w) / w;
}

}  // namespace detail

template <class T = double>
class ScaleEvaluator {
 public:
  using value_type = T;

  ScaleEvaluator(LevyModel model, T q, ScaleOptions opts = {}) : model_(std::move(model)), q_(q) {
    const bool closed_ok = model_.caps().closed_form_scale;
    backend_ = opts.backend.value_or(closed_ok ? ScaleBackend::closed_form : ScaleBackend::inversion);
    inversion_ = opts.inversion;
    inversion_.validate();
    if (!std::isfinite(std::abs(q_))) throw ValidationError("scale: q must be finite");
    if (backend_ == ScaleBackend::closed_form) {
      if (!closed_ok)
        throw CapabilityError("scale: closed form needs a Brownian or Cramer-Lundberg model; use backend inversion");
      if constexpr (!is_complex_v<T>) {
        if (q_ < 0.0) throw ValidationError("scale: q must be >= 0");
      }
      setup_closed();
    } else {
      if constexpr (is_complex_v<T>) {
        if (q_.imag() != 0.0)
          throw CapabilityError("scale: the inversion backend needs real q; use backend closed_form");
      }
      if (real_part(q_) < 0.0) throw ValidationError("scale: q must be >= 0");
      if (inversion_.method == InversionMethod::talbot)
        throw CapabilityError("scale: talbot contours leave the half plane where psi is defined; use euler");
      phi_ = T(snlp::phi(model_, real_part(q_)));
    }
  }

  const LevyModel& model() const { return model_; }
  T q() const { return q_; }
  ScaleBackend backend() const { return backend_; }

  // Largest root of psi(theta) = q. For real q this is phi(q).
  T phi() const { return phi_; }
  // The other root of the quadratic denominator (closed form only).
  T second_root() const { return theta2_; }

  Scaled<T> W_scaled(double x) const {
    if (x < 0.0) return {T(0.0), T(0.0)};
    if (backend_ == ScaleBackend::closed_form) {
      const auto [m0, m1] = mantissas(x);
      return {theta1_ * x, (alpha_ * m1 + beta0_ * m0) / a2_};
    }
    return {T(0.0), W_inversion(x)};
  }

  Scaled<T> Z_scaled(double x) const {
    if (x <= 0.0) return {T(0.0), T(1.0)};
    if (backend_ == ScaleBackend::closed_form) {
      if (q_ == T(0.0)) return {T(0.0), T(1.0)};
      // Z = 1 + q int_0^x W; the constant drops out because N(0) = -a0/q.
      const auto [m0, m1] = mantissas(x);
      return {theta1_ * x, (q_ * alpha_ / a2_) * m0 - 2.0 * m_ * m0 + m1};
    }
    return {T(0.0), Z_inversion(x)};
  }

  T W(double x) const { return W_scaled(x).value(); }
  T Z(double x) const { return Z_scaled(x).value(); }

  // W(a) / W(h)
  T ratio(double a, double h) const {
    if (a < 0.0) return T(0.0);
    return scaled_ratio(W_scaled(a), W_scaled(h));
  }

  // Z(a) / W(a), for a > 0
  T z_over_w(double a) const {
    const auto w = W_scaled(a), z = Z_scaled(a);
    return z.mantissa / w.mantissa * std::exp(z.exponent - w.exponent);
  }

  // Z(a) - W(a) Z(h) / W(h): the two-sided exit-down functional from a
  // inside [0, h]. Written so nothing cancels when h is large.
  T cross(double a, double h) const {
    if (a < 0.0) return T(1.0);
    if (backend_ != ScaleBackend::closed_form) return Z(a) - W(a) * Z(h) / W(h);
    const double v = a - h;
    const double av = std::abs(v);
    const T sv = (v < 0.0 ? -av : av) * detail::one_minus_exp_over(2.0 * d_ * av);
    const T expo = m_ * (a + h) + d_ * av - theta1_ * h;
    return -(n1n2_ / (a2_ * g_)) * sv / W_scaled(h).mantissa * std::exp(expo);
  }

  // W(a + delta) W(u) / W(u + delta) - W(a), all arguments >= 0. With
  // a = z - y, u = -y, delta = y - c this is the resolvent density of the
  // process killed on leaving [c, 0].
  T killed(double a, double u, double delta) const {
    if (backend_ != ScaleBackend::closed_form) return W(a + delta) * W(u) / W(u + delta) - W(a);
    const T sd = delta * detail::one_minus_exp_over(2.0 * d_ * delta);
    const double v = u - a, av = std::abs(v);
    const T sv = (v < 0.0 ? -av : av) * detail::one_minus_exp_over(2.0 * d_ * av);
    const T expo = m_ * (a + u + delta) + d_ * (delta + av) - theta1_ * (u + delta);
    return (n1n2_ / (a2_ * a2_)) * sd * sv / W_scaled(u + delta).mantissa * std::exp(expo);
  }

 private:
  void setup_closed() {
    if (auto* b = model_.brownian_spec()) {
      a2_ = T(0.5 * b->sigma * b->sigma);
      a1_ = T(b->mu);
      a0_ = -q_;
      alpha_ = T(0.0);
      beta0_ = T(1.0);
      g_ = T(1.0);
    } else {
      const auto* c = model_.cl_spec();
      const double beta = 1.0 / c->jump_mean;
      a2_ = T(c->premium);
      a1_ = c->premium * beta - c->jump_rate - q_;
      a0_ = -q_ * beta;
      alpha_ = T(1.0);
      beta0_ = T(beta);
      g_ = T(beta);
    }
    m_ = -a1_ / (2.0 * a2_);
    if constexpr (is_complex_v<T>) {
      d_ = std::sqrt(a1_ * a1_ - 4.0 * a2_ * a0_) / (2.0 * a2_);
      if (d_.real() < 0.0) d_ = -d_;
    } else {
      d_ = std::sqrt(std::max(0.0, a1_ * a1_ - 4.0 * a2_ * a0_)) / (2.0 * a2_);
    }
    theta1_ = m_ + d_;
    theta2_ = m_ - d_;
    phi_ = theta1_;
    n1n2_ = (alpha_ * theta1_ + beta0_) * (alpha_ * theta2_ + beta0_);
  }

  // e^{-theta1 x} * e^{m x} sinh(d x)/d and its derivative counterpart
  std::pair<T, T> mantissas(double x) const {
    const T w = 2.0 * d_ * x;
    const T m0 = x * detail::one_minus_exp_over(w);
    const T m1 = m_ * m0 + 0.5 * (1.0 + std::exp(-w));
    return {m0, m1};
  }

  T W_inversion(double x) const {
    const double w0 = model_.scale_at_zero();
    if (x == 0.0) return T(w0);
    const double ph = real_part(phi_), q = real_part(q_);
    InversionConfig cfg = inversion_;
    cfg.shift = 0.0;
    auto F = [&](cplx s) { return 1.0 / (laplace_exponent(model_, s + ph) - q); };
    double v;
    if (cfg.method == InversionMethod::gaver_stehfest) {
      std::function<double(double)> Fr = [&](double s) { return 1.0 / (laplace_exponent(model_, s + ph) - q); };
      v = laplace_invert_detailed(Fr, x, cfg, w0).value;
    } else {
      v = laplace_invert(F, x, cfg, w0);
    }
    return T(std::exp(ph * x) * v);
  }

  T Z_inversion(double x) const {
    const double ph = real_part(phi_), q = real_part(q_);
    if (q == 0.0) return T(1.0);
    InversionConfig cfg = inversion_;
    cfg.shift = 0.0;
    auto F = [&](cplx s) {
      const cplx th = s + ph;
      const cplx p = laplace_exponent(model_, th);
      return p / (th * (p - q));
    };
    double v;
    if (cfg.method == InversionMethod::gaver_stehfest) {
      std::function<double(double)> Fr = [&](double s) {
        const double th = s + ph;
        const double p = laplace_exponent(model_, th);
        return p / (th * (p - q));
      };
      v = laplace_invert_detailed(Fr, x, cfg, 1.0).value;
    } else {
      v = laplace_invert(F, x, cfg, 1.0);
    }
    return T(std::exp(ph * x) * v);
  }

  LevyModel model_;
  T q_;
  ScaleBackend backend_;
  InversionConfig inversion_;
  T phi_{};
  // closed form data
  T a2_{}, a1_{}, a0_{}, alpha_{}, beta0_{}, g_{}, m_{}, d_{}, theta1_{}, theta2_{}, n1n2_{};
};

template <class T>
using ScalePtr = std::shared_ptr<const ScaleEvaluator<T>>;

template <class T>
ScalePtr<T> make_scale(const LevyModel& model, T q, ScaleOptions opts = {}) {
  return std::make_shared<const ScaleEvaluator<T>>(model, q, opts);
}

// Convenience one-shot evaluators.
inline double scale_W(const LevyModel& model, double q, double x, ScaleOptions opts = {}) {
  return ScaleEvaluator<double>(model, q, opts).W(x);
}
inline double scale_Z(const LevyModel& model, double q, double x, ScaleOptions opts = {}) {
  return ScaleEvaluator<double>(model, q, opts).Z(x);
}

}  // namespace snlp
