#pragma once

#include <stdexcept>
#include <string>

namespace physim {

// Every failure mode of the engine is a named exception type so callers can
// map them onto exit codes or test expectations without string matching.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// -- state and operator construction ---------------------------------------

class ZeroStateError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NotHermitianError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class SpectrumError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

// -- operator families and decompositions ----------------------------------

class NotCommutingError : public Error {
 public:
  using Error::Error;
};

class DecompositionError : public Error {
 public:
  using Error::Error;
};

class RelationViolation : public Error {
 public:
  using Error::Error;
};

// -- assignment machinery ----------------------------------------------------

class ProtectedSectorViolation : public Error {
 public:
  using Error::Error;
};

class StrictModeUnsatisfiable : public Error {
 public:
  using Error::Error;
};

class UnphysicatedSectorExhausted : public Error {
 public:
  using Error::Error;
};

// -- enumeration and configuration ------------------------------------------

class EnumerationCapError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace physim
