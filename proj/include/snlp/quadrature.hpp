#pragma once

// Adaptive Gauss-Kronrod (7/15) quadrature, templated on the integrand value
// type so the same code handles real and complex integrands.

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <sstream>
#include <type_traits>
#include <vector>

#include "snlp/errors.hpp"

namespace snlp {

using cplx = std::complex<double>;

struct QuadratureConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-9;
  int max_subdivisions = 400;

  void validate() const {
    if (!(abs_tol >= 0.0) || !(rel_tol >= 0.0) || (abs_tol == 0.0 && rel_tol == 0.0))
      throw ValidationError("quadrature: tolerances must be non-negative and not both zero");
    if (max_subdivisions < 1) throw ValidationError("quadrature: max_subdivisions must be >= 1");
  }
};

template <class T>
struct QuadratureResult {
  T value{};
  double abs_error = 0.0;
  int subdivisions = 0;
  bool converged = false;
};

// Deterministic pairwise summation. Order of the input is the order of the sum.
template <class T>
T pairwise_sum(std::span<const T> v) {
  if (v.empty()) return T{};
  if (v.size() <= 8) {
    T s{};
    for (const auto& x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

namespace detail {

inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the nodes kXgk[1], kXgk[3], kXgk[5], kXgk[7].
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
struct Panel {
  double a, b;
  T value;
  double err;
  double abs_integral;
};

template <class T, class F>
Panel<T> gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  T fc = f(c);
  T kron = fc * kWgk[7];
  T gauss = fc * kWg[3];
  double absk = std::abs(fc) * kWgk[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    T f1 = f(c - dx);
    T f2 = f(c + dx);
    kron += (f1 + f2) * kWgk[j];
    absk += (std::abs(f1) + std::abs(f2)) * kWgk[j];
    if (j % 2 == 1) gauss += (f1 + f2) * kWg[j / 2];
  }
  Panel<T> p{a, b, kron * h, std::abs((kron - gauss) * h), absk * std::abs(h)};
  if (!std::isfinite(std::abs(p.value))) p.err = std::numeric_limits<double>::infinity();
  return p;
}

inline cplx as_complex(double v) { return {v, 0.0}; }
inline cplx as_complex(cplx v) { return v; }

template <class T>
[[noreturn]] void quad_fail(const char* msg, T est, double res) {
  std::ostringstream os;
  os << "quadrature: " << msg << " (estimate " << std::abs(est) << ", residual " << res << ")";
  throw IntegrationError(os.str(), as_complex(est), res);
}

}  // namespace detail

// Integrate f over consecutive intervals [pts[0], pts[1]], [pts[1], pts[2]], ...
// The points become forced panel edges, useful at kinks and jumps.
template <class F>
auto integrate_detailed(F&& f, std::span<const double> pts, const QuadratureConfig& cfg = {})
    -> QuadratureResult<std::invoke_result_t<F&, double>> {
  using T = std::invoke_result_t<F&, double>;
  cfg.validate();
  if (pts.size() < 2) throw ValidationError("quadrature: need at least two points");
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (!std::isfinite(pts[i]) || !std::isfinite(pts[i + 1]) || pts[i + 1] < pts[i])
      throw ValidationError("quadrature: breakpoints must be finite and ascending");
  }

  std::vector<detail::Panel<T>> panels;
  panels.reserve(static_cast<std::size_t>(cfg.max_subdivisions) + pts.size());
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (pts[i + 1] > pts[i]) panels.push_back(detail::gk15<T>(f, pts[i], pts[i + 1]));
  }
  QuadratureResult<T> out;
  if (panels.empty()) {
    out.converged = true;
    return out;
  }

  auto worst = [&] {
    return std::max_element(panels.begin(), panels.end(),
                            [](const auto& x, const auto& y) { return x.err < y.err; });
  };
  auto totals = [&](T& value, double& err, double& absint) {
    value = T{};
    err = 0.0;
    absint = 0.0;
    for (const auto& p : panels) {
      value += p.value;
      err += p.err;
      absint += p.abs_integral;
    }
  };

  T value;
  double err, absint;
  totals(value, err, absint);
  while (true) {
    const double floor = 50.0 * DBL_EPSILON * absint;
    const double target = std::max({cfg.abs_tol, cfg.rel_tol * std::abs(value), floor});
    if (err <= target) {
      out.converged = true;
      break;
    }
    if (static_cast<int>(panels.size()) >= cfg.max_subdivisions) break;
    auto it = worst();
    const double a = it->a, b = it->b, m = 0.5 * (a + b);
    if (!(m > a && m < b) || (b - a) < 1e-15 * std::max(1.0, std::abs(m))) {
      // Can't split any further; keep what we have.
      break;
    }
    *it = detail::gk15<T>(f, a, m);
    panels.push_back(detail::gk15<T>(f, m, b));
    totals(value, err, absint);
  }

  std::sort(panels.begin(), panels.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
  std::vector<T> vals;
  vals.reserve(panels.size());
  for (const auto& p : panels) vals.push_back(p.value);
  out.value = pairwise_sum(std::span<const T>(vals));
  out.abs_error = err;
  out.subdivisions = static_cast<int>(panels.size());
  return out;
}

// Integrate over [a, b]. b may be +infinity, in which case the range is
// covered by doubling panels until the last one is below tolerance.
// Throws IntegrationError when the tolerance is not met.
template <class F>
auto integrate(F&& f, double a, double b, const QuadratureConfig& cfg = {},
               std::span<const double> interior = {}) -> std::invoke_result_t<F&, double> {
  using T = std::invoke_result_t<F&, double>;
  auto fail = [](const char* msg, T est, double res) { detail::quad_fail(msg, est, res); };

  if (std::isinf(b) && b > 0) {
    if (!std::isfinite(a)) throw ValidationError("quadrature: lower limit must be finite");
    std::vector<T> pieces;
    double lo = a, width = 1.0;
    int small = 0;
    for (int k = 0; k < 80; ++k) {
      const double hi = lo + width;
      const double pts[2] = {lo, hi};
      auto r = integrate_detailed(f, std::span<const double>(pts, 2), cfg);
      if (!r.converged) fail("semi-infinite panel did not converge", r.value, r.abs_error);
      pieces.push_back(r.value);
      const T total = pairwise_sum(std::span<const T>(pieces));
      if (std::abs(r.value) <= std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total))) {
        if (++small >= 2) return total;
      } else {
        small = 0;
      }
      lo = hi;
      width *= 2.0;
    }
    detail::quad_fail("semi-infinite tail did not decay", pairwise_sum(std::span<const T>(pieces)),
                      0.0);
  }

  std::vector<double> pts;
  pts.push_back(a);
  for (double x : interior)
    if (x > a && x < b) pts.push_back(x);
  pts.push_back(b);
  std::sort(pts.begin() + 1, pts.end() - 1);
  auto r = integrate_detailed(f, std::span<const double>(pts), cfg);
  if (!r.converged) fail("tolerance not reached", r.value, r.abs_error);
  return r.value;
}

// Breakpoints on [lo, hi] that cluster near one end with spacing ~1/rate,
// doubling away from it. For integrands like exp(-rate * distance).
inline std::vector<double> graded_points(double lo, double hi, double rate, bool near_hi) {
  std::vector<double> pts;
  if (!(rate > 0.0) || !std::isfinite(rate) || (hi - lo) * rate <= 4.0) return pts;
  double step = 1.0 / rate;
  for (double d = step; d < hi - lo; d *= 2.0) pts.push_back(near_hi ? hi - d : lo + d);
  std::sort(pts.begin(), pts.end());
  return pts;
}

}  // namespace snlp
