#pragma once

// Spectrally negative Levy models: Laplace exponent psi, its right inverse
// phi, and the Brownian transition density.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <variant>

#include "snlp/errors.hpp"
#include "snlp/quadrature.hpp"

namespace snlp {

// X_t = mu t + sigma B_t
struct BrownianDrift {
  double mu = 0.0;
  double sigma = 1.0;
};

// X_t = premium t - (compound Poisson sum of Exp(mean jump_mean) claims)
struct CramerLundberg {
  double premium = 1.5;
  double jump_rate = 1.0;
  double jump_mean = 1.0;
};

// Generic triplet. psi(theta) = gamma_coef theta + sigma^2 theta^2 / 2
//   + int_0^inf (e^{-theta z} - 1 + theta z 1{z <= 1}) levy_density(z) dz
// where levy_density is the density of the (positive) jump sizes of -X.
struct GeneralSnlp {
  double gamma_coef = 0.0;
  double sigma = 0.0;
  std::function<double(double)> levy_density;
};

struct ModelCaps {
  bool closed_form_scale = false;
  bool transition_density = false;
  bool complex_exponent = false;
  bool unbounded_variation = false;
};

class LevyModel {
 public:
  using Spec = std::variant<BrownianDrift, CramerLundberg, GeneralSnlp>;

  LevyModel(BrownianDrift m) : spec_(m) { validate(); }
  LevyModel(CramerLundberg m) : spec_(m) { validate(); }
  LevyModel(GeneralSnlp m) : spec_(std::move(m)) { validate(); }

  static LevyModel brownian(double mu, double sigma) { return LevyModel(BrownianDrift{mu, sigma}); }
  static LevyModel cramer_lundberg(double premium, double rate, double mean) {
    return LevyModel(CramerLundberg{premium, rate, mean});
  }

  const Spec& spec() const { return spec_; }
  const ModelCaps& caps() const { return caps_; }
  const BrownianDrift* brownian_spec() const { return std::get_if<BrownianDrift>(&spec_); }
  const CramerLundberg* cl_spec() const { return std::get_if<CramerLundberg>(&spec_); }
  const GeneralSnlp* general_spec() const { return std::get_if<GeneralSnlp>(&spec_); }

  // Quadrature settings used for the jump integral of GeneralSnlp.
  QuadratureConfig jump_quadrature{1e-13, 1e-11, 400};

  // W(0+) = 1/drift for bounded variation paths, 0 otherwise.
  double scale_at_zero() const { return w0_; }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    if (auto* b = brownian_spec()) os << "brownian(mu=" << b->mu << ",sigma=" << b->sigma << ")";
    else if (auto* c = cl_spec())
      os << "cramer_lundberg(premium=" << c->premium << ",jump_rate=" << c->jump_rate
         << ",jump_mean=" << c->jump_mean << ")";
    else {
      auto* g = general_spec();
      os << "general(gamma=" << g->gamma_coef << ",sigma=" << g->sigma << ")";
    }
    return os.str();
  }

 private:
  void validate();

  Spec spec_;
  ModelCaps caps_;
  double w0_ = 0.0;
};

namespace detail {

// int_a^b z^k nu(z) dz for the generic model
// (log substitution, the integrand can be steep near 0)
inline double levy_moment(const GeneralSnlp& g, double a, double b, int k, const QuadratureConfig& q) {
  if (a == 0.0) return levy_moment(g, 1e-40, b, k, q);
  auto f = [&](double u) {
    const double z = std::exp(u);
    return std::pow(z, k + 1) * g.levy_density(z);
  };
  return integrate(f, std::log(a), std::log(b), q);
}

// e^{-w} - 1 + w for small |w| without cancellation
template <class T>
T exp_defect(T w) {
  if (std::abs(w) < 1e-2) {
    T s = T(0.0), term = -w;
    for (int n = 2; n < 14; ++n) {
      term *= -w / double(n);
      s += term;
    }
    return s;
  }
  return std::exp(-w) - 1.0 + w;
}

}  // namespace detail

inline void LevyModel::validate() {
  if (auto* b = std::get_if<BrownianDrift>(&spec_)) {
    if (!std::isfinite(b->mu) || !(b->sigma > 0.0) || !std::isfinite(b->sigma))
      throw ValidationError("brownian: sigma must be > 0 and mu finite");
    caps_ = {true, true, true, true};
    w0_ = 0.0;
  } else if (auto* c = std::get_if<CramerLundberg>(&spec_)) {
    if (!(c->premium > 0.0) || !(c->jump_rate > 0.0) || !(c->jump_mean > 0.0) ||
        !std::isfinite(c->premium) || !std::isfinite(c->jump_rate) || !std::isfinite(c->jump_mean))
      throw ValidationError("cramer_lundberg: premium, jump_rate and jump_mean must be > 0");
    caps_ = {true, false, true, false};
    w0_ = 1.0 / c->premium;
  } else {
    auto& g = std::get<GeneralSnlp>(spec_);
    if (!g.levy_density) throw ValidationError("general: levy_density is required");
    if (!(g.sigma >= 0.0) || !std::isfinite(g.gamma_coef))
      throw ValidationError("general: sigma must be >= 0 and gamma finite");
    // Growth of the small-jump integrals over successive decades tells
    // finite from infinite variation (and mass).
    const auto& q = jump_quadrature;
    const double e1 = 1e-6, e2 = 1e-9, e3 = 1e-12;
    auto var = [&](double a, double b) { return detail::levy_moment(g, a, b, 1, q); };
    auto mass = [&](double a, double b) { return detail::levy_moment(g, a, b, 0, q); };
    const double v1 = var(e2, e1), v2 = var(e3, e2);
    const bool infinite_variation = v1 > 0.0 && v2 >= 0.999 * v1;
    const double m1 = mass(e2, e1), m2 = mass(e3, e2);
    const bool infinite_mass = infinite_variation || (m1 > 0.0 && m2 >= 0.999 * m1);
    if (g.sigma == 0.0 && g.gamma_coef <= 0.0 && !infinite_mass)
      throw ValidationError("general: sigma = 0, gamma <= 0 and finite jump mass may give monotone paths");
    caps_ = {false, false, true, g.sigma > 0.0 || infinite_variation};
    if (caps_.unbounded_variation) {
      w0_ = 0.0;
    } else {
      const double drift = g.gamma_coef + var(0.0, 1.0);
      if (!(drift > 0.0)) throw ValidationError("general: bounded variation model needs positive drift");
      w0_ = 1.0 / drift;
    }
  }
}

// psi(theta) for real or complex theta (Re theta >= 0 for the generic model).
template <class T>
T laplace_exponent(const LevyModel& model, T theta) {
  if (auto* b = model.brownian_spec()) return b->mu * theta + 0.5 * b->sigma * b->sigma * theta * theta;
  if (auto* c = model.cl_spec()) {
    const double beta = 1.0 / c->jump_mean;
    return c->premium * theta - c->jump_rate * theta / (beta + theta);
  }
  const auto& g = *model.general_spec();
  auto small = [&](double z) -> T { return detail::exp_defect(theta * z) * g.levy_density(z); };
  auto large = [&](double z) -> T { return (std::exp(-theta * z) - 1.0) * g.levy_density(z); };
  T jumps = integrate(small, 0.0, 1.0, model.jump_quadrature) +
            integrate(large, 1.0, std::numeric_limits<double>::infinity(), model.jump_quadrature);
  return g.gamma_coef * theta + 0.5 * g.sigma * g.sigma * theta * theta + jumps;
}

inline double psi_prime(const LevyModel& model, double theta) {
  if (auto* b = model.brownian_spec()) return b->mu + b->sigma * b->sigma * theta;
  if (auto* c = model.cl_spec()) {
    const double beta = 1.0 / c->jump_mean;
    return c->premium - c->jump_rate * beta / ((beta + theta) * (beta + theta));
  }
  const auto& g = *model.general_spec();
  auto small = [&](double z) { return z * (-std::expm1(-theta * z)) * g.levy_density(z); };
  auto large = [&](double z) { return -z * std::exp(-theta * z) * g.levy_density(z); };
  return g.gamma_coef + g.sigma * g.sigma * theta + integrate(small, 0.0, 1.0, model.jump_quadrature) +
         integrate(large, 1.0, std::numeric_limits<double>::infinity(), model.jump_quadrature);
}

// Largest root of psi(theta) = s, s >= 0. Bracket by doubling, then a
// safeguarded Newton iteration.
inline double phi(const LevyModel& model, double s) {
  if (!(s >= 0.0) || !std::isfinite(s)) throw ValidationError("phi: s must be finite and >= 0");
  auto f = [&](double th) { return laplace_exponent(model, th) - s; };
  double hi = 1.0;
  int guard = 0;
  while (f(hi) <= 0.0) {
    hi *= 2.0;
    if (++guard > 200) throw NumericalError("phi: could not bracket the root");
  }
  double lo = 0.0;
  if (s == 0.0) {
    if (psi_prime(model, 0.0) >= 0.0) return 0.0;
    lo = hi;
    guard = 0;
    while (f(lo) >= 0.0) {
      lo *= 0.5;
      if (++guard > 200) return 0.0;
    }
  }
  double x = hi;
  for (int it = 0; it < 200; ++it) {
    const double fx = f(x);
    if (fx > 0.0) hi = x;
    else lo = x;
    if (hi - lo <= 1e-12 * std::max(1.0, std::abs(hi))) break;
    const double d = psi_prime(model, x);
    double nx = (d > 0.0) ? x - fx / d : 0.5 * (lo + hi);
    if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
    if (std::abs(nx - x) <= 1e-13 * std::max(1.0, std::abs(x))) {
      x = nx;
      break;
    }
    x = nx;
  }
  return x;
}

// Density of X_t at z. Only the Brownian model has one here.
inline double transition_density(const LevyModel& model, double t, double z) {
  const auto* b = model.brownian_spec();
  if (!b) throw CapabilityError("transition_density: only available for the Brownian model; use the inversion route");
  if (!(t > 0.0)) throw ValidationError("transition_density: t must be > 0");
  const double v = b->sigma * b->sigma * t;
  const double d = z - b->mu * t;
  return std::exp(-0.5 * d * d / v) / std::sqrt(2.0 * std::numbers::pi * v);
}

}  // namespace snlp
