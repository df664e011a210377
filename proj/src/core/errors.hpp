#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace omh {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// expression layer
struct SyntaxError : Error {
  std::size_t offset;
  SyntaxError(const std::string& what, std::size_t off)
      : Error(what + " (at byte " + std::to_string(off) + ")"), offset(off) {}
};
struct UnknownFunction : Error {
  using Error::Error;
};
struct UnknownVariable : Error {
  using Error::Error;
};
// evaluation outside the mathematical domain (log of nonpositive, sqrt of
// negative, division by exact zero, fractional power of nonpositive base, ...)
struct DomainError : Error {
  using Error::Error;
};

// geometry / phase space
struct SingularPoint : Error {
  using Error::Error;
};
struct NonRealSpectrum : Error {
  using Error::Error;
};
struct ConstraintViolation : Error {
  using Error::Error;
};
struct PeriodicityViolation : Error {
  using Error::Error;
};

// Staeckel layer
struct SingularStackel : Error {
  using Error::Error;
};
struct NotIgnorable : Error {
  using Error::Error;
};
struct NotProjectable : Error {
  using Error::Error;
};
struct NotClassicalForm : Error {
  using Error::Error;
};

// models / separation
struct ForbiddenRegion : Error {
  using Error::Error;
};

// dynamics
struct NewtonDivergence : Error {
  std::size_t step;
  NewtonDivergence(const std::string& what, std::size_t s)
      : Error(what + " (step " + std::to_string(s) + ")"), step(s) {}
};
struct DomainExit : Error {
  std::size_t step;
  DomainExit(const std::string& what, std::size_t s)
      : Error(what + " (step " + std::to_string(s) + ")"), step(s) {}
};

// configuration / CLI
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace omh
