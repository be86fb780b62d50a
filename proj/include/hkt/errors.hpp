#pragma once

#include <stdexcept>
#include <string>

namespace hkt {

// Base for all toolkit errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input data (CSV rows, config fields). Message carries location.
struct FormatError : Error {
  using Error::Error;
};

// Invalid scenario / problem configuration.
struct ConfigError : Error {
  using Error::Error;
};

// Argument outside an operation's stated domain.
struct DomainError : Error {
  using Error::Error;
};

// Numerical solver failure (BEM bracketing, NLP breakdown). Message carries
// the offending inputs.
struct SolverError : Error {
  using Error::Error;
};

}  // namespace hkt
