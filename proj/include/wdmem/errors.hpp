#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace wdmem {

// Root of every error the library throws. Catch this to handle all of them.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (R <= 0, phi_t <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A memristive element reported a negative memductance.
class PassivityError : public Error {
 public:
  using Error::Error;
};

// Inconsistent configuration: bad adaptor port resistances, unknown config keys,
// empty curves, missing files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed CSV or config file contents.
class FormatError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Identification could not produce a characteristic (no monotone segment, ...).
class IdentificationError : public Error {
 public:
  using Error::Error;
};

// Post-processing precondition failures (trace shorter than a period, ...).
class AnalysisError : public Error {
 public:
  using Error::Error;
};

// Non-finite values or a diverging fixed-point iteration. Carries the sampling
// instant and the per-sweep residual history when available.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, double t = 0.0, std::vector<double> residuals = {})
      : Error(what), t_(t), residuals_(std::move(residuals)) {}

  double time() const noexcept { return t_; }
  const std::vector<double>& residual_history() const noexcept { return residuals_; }

 private:
  double t_;
  std::vector<double> residuals_;
};

}  // namespace wdmem
