#pragma once

// Numerical Laplace inversion: Euler summation (Abate-Whitt), fixed Talbot
// and Gaver-Stehfest. All three share a joint interface so several transforms
// can be inverted on one set of nodes.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "snlp/errors.hpp"
#include "snlp/quadrature.hpp"

namespace snlp {

enum class InversionMethod { euler, talbot, gaver_stehfest };

inline std::string to_string(InversionMethod m) {
  switch (m) {
    case InversionMethod::euler: return "euler";
    case InversionMethod::talbot: return "talbot";
    case InversionMethod::gaver_stehfest: return "gaver_stehfest";
  }
  return "?";
}

inline InversionMethod parse_inversion_method(const std::string& s) {
  if (s == "euler") return InversionMethod::euler;
  if (s == "talbot") return InversionMethod::talbot;
  if (s == "gaver_stehfest" || s == "stehfest") return InversionMethod::gaver_stehfest;
  throw ValidationError("unknown inversion method '" + s + "' (euler, talbot, gaver_stehfest)");
}

struct InversionConfig {
  InversionMethod method = InversionMethod::euler;
  int terms = 20;
  // Evaluate F(s + shift) and multiply by e^{shift t}. Keeps exponentially
  // growing originals inside the method's comfort zone.
  double shift = 0.0;

  static InversionConfig with(InversionMethod m) {
    InversionConfig c;
    c.method = m;
    c.terms = (m == InversionMethod::gaver_stehfest) ? 14 : 20;
    return c;
  }

  void validate() const {
    if (method == InversionMethod::gaver_stehfest) {
      if (terms < 4 || terms > 30 || terms % 2 != 0)
        throw ValidationError("gaver_stehfest: terms must be even and in [4, 30]");
    } else if (terms < 4 || terms > 60) {
      throw ValidationError("inversion: terms must be in [4, 60]");
    }
    if (!std::isfinite(shift)) throw ValidationError("inversion: shift must be finite");
  }
};

struct InversionResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool accuracy_warning = false;
};

namespace detail {

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Euler weights xi_k for k = 0..n+m
inline std::vector<double> euler_xi(int n, int m) {
  std::vector<double> xi(static_cast<std::size_t>(n + m + 1), 1.0);
  xi[0] = 0.5;
  const double scale = std::ldexp(1.0, -m);
  for (int j = m; j >= 1; --j) {
    double acc = 0.0;
    for (int i = j; i <= m; ++i) acc += binomial(m, i);
    xi[static_cast<std::size_t>(n + j)] = acc * scale;
  }
  return xi;
}

inline std::vector<double> stehfest_weights(int n) {
  const int h = n / 2;
  std::vector<double> v(static_cast<std::size_t>(n + 1), 0.0);
  auto fact = [](int k) { return std::tgamma(k + 1.0); };
  for (int k = 1; k <= n; ++k) {
    double s = 0.0;
    for (int j = (k + 1) / 2; j <= std::min(k, h); ++j) {
      s += std::pow(j, h) * fact(2 * j) /
           (fact(h - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k));
    }
    v[static_cast<std::size_t>(k)] = (((k + h) % 2) ? -1.0 : 1.0) * s;
  }
  return v;
}

inline double warning_level(double value) { return 1e-6 * std::max(1.0, std::abs(value)); }

}  // namespace detail

// f(s) returns std::array<cplx, N>. For Gaver-Stehfest f is only called at
// real s (imaginary part zero) and the real parts are used.
template <std::size_t N, class F>
std::array<InversionResult, N> laplace_invert_joint(F&& f, double t, const InversionConfig& cfg) {
  cfg.validate();
  if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("laplace_invert: t must be > 0");
  std::array<InversionResult, N> out{};
  const double growth = std::exp(cfg.shift * t);
  const cplx sh(cfg.shift, 0.0);

  if (cfg.method == InversionMethod::euler) {
    const int M = cfg.terms;
    const auto xi = detail::euler_xi(M, M);
    const auto xi2 = detail::euler_xi(M, M - 1);
    const double a = M * std::numbers::ln10 / 3.0;
    std::array<double, N> s1{}, s2{};
    for (int k = 0; k <= 2 * M; ++k) {
      const cplx s(a / t, std::numbers::pi * k / t);
      const auto v = f(s + sh);
      const double sign = (k % 2) ? -1.0 : 1.0;
      for (std::size_t i = 0; i < N; ++i) {
        const double re = std::real(v[i]);
        s1[i] += sign * xi[static_cast<std::size_t>(k)] * re;
        if (k < 2 * M) s2[i] += sign * xi2[static_cast<std::size_t>(k)] * re;
      }
    }
    const double pre = std::pow(10.0, M / 3.0) / t * growth;
    for (std::size_t i = 0; i < N; ++i) {
      out[i].value = pre * s1[i];
      out[i].error_estimate = std::abs(pre * (s1[i] - s2[i]));
    }
  } else if (cfg.method == InversionMethod::talbot) {
    const int M = cfg.terms;
    const double r = 2.0 * M / (5.0 * t);
    std::array<double, N> sum{}, tail{};
    for (int k = 0; k < M; ++k) {
      std::array<double, N> term{};
      if (k == 0) {
        const auto v = f(cplx(r, 0.0) + sh);
        for (std::size_t i = 0; i < N; ++i) term[i] = 0.5 * std::exp(r * t) * std::real(v[i]);
      } else {
        const double th = k * std::numbers::pi / M;
        const double cot = 1.0 / std::tan(th);
        const cplx s = r * th * cplx(cot, 1.0);
        const double sigma = th + (th * cot - 1.0) * cot;
        const auto v = f(s + sh);
        const cplx w = std::exp(t * s) * cplx(1.0, sigma);
        for (std::size_t i = 0; i < N; ++i) term[i] = std::real(w * v[i]);
      }
      for (std::size_t i = 0; i < N; ++i) {
        sum[i] += term[i];
        if (4 * k >= 3 * M) tail[i] += std::abs(term[i]);
      }
    }
    for (std::size_t i = 0; i < N; ++i) {
      out[i].value = r / M * sum[i] * growth;
      out[i].error_estimate = r / M * tail[i] * growth;
    }
  } else {
    const int n = cfg.terms;
    const auto v1 = detail::stehfest_weights(n);
    const auto v2 = detail::stehfest_weights(n - 2);
    const double a = std::numbers::ln2 / t;
    std::array<double, N> s1{}, s2{};
    for (int k = 1; k <= n; ++k) {
      const auto v = f(cplx(k * a, 0.0) + sh);
      for (std::size_t i = 0; i < N; ++i) {
        const double re = std::real(v[i]);
        s1[i] += v1[static_cast<std::size_t>(k)] * re;
        if (k <= n - 2) s2[i] += v2[static_cast<std::size_t>(k)] * re;
      }
    }
    for (std::size_t i = 0; i < N; ++i) {
      out[i].value = a * s1[i] * growth;
      out[i].error_estimate = std::abs(a * (s1[i] - s2[i]) * growth);
    }
  }
  for (auto& r : out) {
    if (!std::isfinite(r.value)) throw NumericalError("laplace_invert: non-finite result");
    r.accuracy_warning = r.error_estimate > detail::warning_level(r.value);
  }
  return out;
}

// Invert one transform. With small_t_limit set, t < 1e-6 returns the limit
// instead of inverting.
inline InversionResult laplace_invert_detailed(const std::function<cplx(cplx)>& F, double t,
                                               const InversionConfig& cfg = {},
                                               std::optional<double> small_t_limit = std::nullopt) {
  if (small_t_limit && t >= 0.0 && t < 1e-6) return {*small_t_limit, 0.0, false};
  return laplace_invert_joint<1>([&](cplx s) { return std::array<cplx, 1>{F(s)}; }, t, cfg)[0];
}

inline double laplace_invert(const std::function<cplx(cplx)>& F, double t, const InversionConfig& cfg = {},
                             std::optional<double> small_t_limit = std::nullopt) {
  return laplace_invert_detailed(F, t, cfg, small_t_limit).value;
}

// Real-only transform: Gaver-Stehfest is the only method that fits.
inline InversionResult laplace_invert_detailed(const std::function<double(double)>& F, double t,
                                               const InversionConfig& cfg = InversionConfig::with(
                                                   InversionMethod::gaver_stehfest),
                                               std::optional<double> small_t_limit = std::nullopt) {
  if (cfg.method != InversionMethod::gaver_stehfest)
    throw CapabilityError("laplace_invert: transform is real-only; use method gaver_stehfest");
  if (small_t_limit && t >= 0.0 && t < 1e-6) return {*small_t_limit, 0.0, false};
  return laplace_invert_joint<1>([&](cplx s) { return std::array<cplx, 1>{cplx(F(s.real()), 0.0)}; }, t,
                                 cfg)[0];
}

}  // namespace snlp
