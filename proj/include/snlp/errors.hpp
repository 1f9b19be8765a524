#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace snlp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: out-of-range parameters, malformed configs.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// The model or method can't do what was asked (complex q on a real-only
// backend, a density route for a model without a density, ...).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// Adaptive quadrature gave up. Keeps the best estimate and its residual so
// callers can decide what to do with it.
class IntegrationError : public NumericalError {
 public:
  IntegrationError(const std::string& what, std::complex<double> estimate, double residual)
      : NumericalError(what), estimate_(estimate), residual_(residual) {}

  std::complex<double> estimate() const { return estimate_; }
  double residual() const { return residual_; }

 private:
  std::complex<double> estimate_;
  double residual_;
};

}  // namespace snlp
